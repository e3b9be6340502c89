//! Subset experiment on the two-circles data.
//!
//! A depth-4 Gini tree is trained on 150 points and on subsets holding 40%
//! of them. Each subset's epsilon against the training part is printed next
//! to its test accuracy and its importance ranking.
//!
//! ```bash
//! cargo run --release -p reprtree --example circles_experiment -- [seed]
//! ```

use reprtree::cart::{Impurity, TrainConfig};
use reprtree::harness::{run_experiment, DataSource, ExperimentConfig, ModelSpec};

fn main() -> reprtree::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);

    let mut cfg = ExperimentConfig::new(
        DataSource::circles(200),
        ModelSpec::Tree(TrainConfig::new(Impurity::Gini, 4)),
    );
    cfg.subset_fraction = 0.4;
    cfg.subset_count = 2;
    cfg.seed = seed;

    let report = run_experiment(&cfg)?;
    let r = &report.reference;
    println!(
        "full training set: test accuracy {:.2}, importance {:?}",
        r.test_accuracy, r.importance.normalized
    );
    for rec in &report.subsets {
        let m = rec.model.as_ref().expect("both classes are present");
        println!(
            "subset {}: epsilon {:.4}, test accuracy {:.2}, ranking {:?}, rank distance {}",
            rec.index + 1,
            rec.epsilon.unwrap_or(f64::INFINITY),
            m.test_accuracy,
            m.ranking.order,
            m.rank_distance
        );
    }
    Ok(())
}
