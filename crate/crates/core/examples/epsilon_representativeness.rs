//! Covering radius of a subset with respect to the data it came from.

use reprtree::dataset::{generate_circles, sample_subset, LabeledDataset};
use reprtree::repr::{epsilon_of, is_gamma_balanced};

fn main() -> reprtree::Result<()> {
    // hand-sized case: every point of x has a same-label point of xt within 0.5
    let x = LabeledDataset::new(
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 3.0], vec![0.5, 3.5]],
        vec![0, 0, 1, 1],
        2,
    )?;
    let xt = LabeledDataset::new(vec![vec![0.5, 0.0], vec![0.0, 3.5]], vec![0, 1], 2)?;
    let a = epsilon_of(&x, &xt)?;
    println!("epsilon {} with representatives {:?}", a.epsilon, a.rep_of);
    println!("balanced: {:?}", is_gamma_balanced(&a).gamma);

    let circles = generate_circles(400, 0.1, 0.5, 7)?;
    for fraction in [0.05, 0.1, 0.25, 0.5, 1.0] {
        let subset = sample_subset(&circles, fraction, 1)?;
        let a = epsilon_of(&circles, &subset)?;
        println!(
            "fraction {fraction:>4}: {} points, epsilon {:.4}",
            subset.len(),
            a.epsilon
        );
    }

    // a subset missing a class cannot represent it
    let only_outer = circles.select(&(0..200).collect::<Vec<_>>())?;
    let a = epsilon_of(&circles, &only_outer)?;
    println!(
        "outer ring only: epsilon {}, uncovered {:?}",
        a.epsilon, a.uncovered_classes
    );
    Ok(())
}
