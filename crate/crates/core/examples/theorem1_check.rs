//! Accuracy preservation inside the tree margin.
//!
//! A tree is fitted, its smallest node margin M is read off, and every point
//! is moved by less than M. The perturbed copy reaches the same leaves and
//! gets exactly the same accuracy. Moving by 2M is shown for contrast, then
//! the randomized campaign is run.

use reprtree::cart::{check_theorem1, DecisionTree, Impurity, TrainConfig};
use reprtree::dataset::generate_circles;
use reprtree::harness::{run_theorem1_campaign, CampaignConfig};
use reprtree::repr::{perturbed_copy, ReprAssignment};

fn main() -> reprtree::Result<()> {
    let x = generate_circles(200, 0.1, 0.5, 5)?;
    let tree = DecisionTree::fit(&x, &TrainConfig::new(Impurity::Gini, 5))?;
    let m = tree.min_margin();
    println!("min margin M = {m:.6}");

    for fraction in [0.5, 0.9, 2.0] {
        let xt = perturbed_copy(&x, fraction * m, 17)?;
        let assignment = ReprAssignment::identity(&x, &xt)?;
        let v = check_theorem1(&tree, &x, &xt, &assignment)?;
        println!(
            "radius {fraction} M: epsilon {:.6}, hypothesis {}, routes match {}, correct {}/{} vs {}/{}",
            v.epsilon, v.hypothesis_holds, v.routes_match, v.correct_x, v.n_x, v.correct_xt, v.n_xt
        );
    }

    let summary = run_theorem1_campaign(&CampaignConfig::default())?;
    println!(
        "campaign: {} passed, {} failed, {} skipped",
        summary.passed, summary.failed, summary.skipped
    );
    Ok(())
}
