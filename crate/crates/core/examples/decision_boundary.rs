//! Prediction rasters for the full training set and for one subset, written
//! as `x1,x2,class` CSV files ready for any plotting tool.
//!
//! ```bash
//! cargo run --release -p reprtree --example decision_boundary -- out/
//! ```

use std::path::PathBuf;

use reprtree::cart::{DecisionTree, TrainConfig};
use reprtree::dataset::{generate_circles, sample_subset};
use reprtree::harness::{export_boundary_grid, padded_bounds};

fn main() -> reprtree::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "boundary-out".into()));
    std::fs::create_dir_all(&dir).expect("output directory");

    let data = generate_circles(200, 0.1, 0.5, 0)?;
    let subset = sample_subset(&data, 0.4, 9)?;
    let bounds = padded_bounds(&data, 0.1)?;

    for (name, ds) in [("full", &data), ("subset", &subset)] {
        let tree = DecisionTree::fit(ds, &TrainConfig::default())?;
        let path = dir.join(format!("{name}.csv"));
        let rows = export_boundary_grid(&tree, bounds, 80, &path)?;
        println!("{name}: {rows} points -> {}", path.display());
    }
    Ok(())
}
