//! Saving and loading trees as JSON and as indented text.

use reprtree::cart::{DecisionTree, Impurity, TrainConfig};
use reprtree::dataset::generate_circles;

fn main() -> reprtree::Result<()> {
    let data = generate_circles(60, 0.1, 0.5, 1)?;
    let tree = DecisionTree::fit(&data, &TrainConfig::new(Impurity::Entropy, 3))?;

    let text = tree.to_text();
    print!("{text}");
    let back = DecisionTree::from_text(&text)?;
    assert_eq!(back, tree);

    let json = tree.to_json()?;
    println!("json: {} bytes", json.len());
    assert_eq!(DecisionTree::from_json(&json)?, tree);

    for id in tree.internal_ids() {
        let s = tree.node(id).split().expect("internal");
        println!(
            "node {id}: x{} threshold {:.4} margin {:.4}",
            s.feature, s.threshold, s.margin
        );
    }
    Ok(())
}
