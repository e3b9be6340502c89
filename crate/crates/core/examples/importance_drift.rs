//! How far apart two feature-importance orderings are, and whether that drift
//! tracks the subsets' epsilon.

use reprtree::cart::{DecisionTree, TrainConfig};
use reprtree::dataset::{generate_circles, sample_subset, LabeledDataset};
use reprtree::metrics::{rank_distance, rank_features, spearman};
use reprtree::repr::epsilon_of;

/// Circles with three extra noise features, so orderings can actually move.
fn noisy_circles(seed: u64) -> reprtree::Result<LabeledDataset> {
    let base = generate_circles(600, 0.1, 0.5, seed)?;
    let rows = base
        .rows()
        .enumerate()
        .map(|(i, (p, _))| {
            let k = i as f64;
            vec![
                p[0],
                p[1],
                (k * 0.37).sin(),
                (k * 1.3).cos() * 0.5,
                ((k * 0.11).sin() * 7.0).fract(),
            ]
        })
        .collect();
    LabeledDataset::new(rows, base.labels().to_vec(), 2)
}

fn main() -> reprtree::Result<()> {
    let data = noisy_circles(4)?;
    let cfg = TrainConfig::new(reprtree::cart::Impurity::Gini, 6);
    let reference = rank_features(&DecisionTree::fit(&data, &cfg)?.feature_importance().raw);
    println!("reference ordering {:?}", reference.order);

    let (mut eps, mut dist) = (Vec::new(), Vec::new());
    for seed in 0..30 {
        let subset = sample_subset(&data, 0.1, seed)?;
        let e = epsilon_of(&data, &subset)?.epsilon;
        let ranking = rank_features(&DecisionTree::fit(&subset, &cfg)?.feature_importance().raw);
        let d = rank_distance(&reference, &ranking)?;
        if e.is_finite() {
            eps.push(e);
            dist.push(d);
        }
    }
    let c = spearman(&eps, &dist)?;
    println!("spearman over {} subsets: rho {:.3}, p {:.3e}", c.n, c.rho, c.p_value);
    Ok(())
}
