//! Gamma-balanced subsets: every representative stands for exactly gamma
//! points of the original data.

use reprtree::dataset::generate_circles;
use reprtree::repr::{construct_balanced_subset, is_gamma_balanced};

fn main() -> reprtree::Result<()> {
    let x = generate_circles(120, 0.05, 0.5, 3)?;
    for gamma in [1, 2, 3, 4, 6] {
        let (xt, assignment) = construct_balanced_subset(&x, gamma, 11)?;
        let check = is_gamma_balanced(&assignment);
        println!(
            "gamma {gamma}: {} representatives, balanced {}, epsilon {:.4}",
            xt.len(),
            check.balanced,
            assignment.epsilon
        );
    }
    match construct_balanced_subset(&x, 7, 11) {
        Ok(_) => println!("unexpected success"),
        Err(e) => println!("gamma 7: {e}"),
    }
    Ok(())
}
