//! Subset experiment on a tabular CSV such as the vehicle platooning
//! (collision) data: 100 subsets of 10% of the training part, one run with a
//! depth-10 Gini tree and one with a 25-stage boosted ensemble.
//!
//! ```bash
//! cargo run --release -p reprtree --example collision_study -- data.csv [label-column]
//! ```
//!
//! The label column defaults to the last one.

use std::path::PathBuf;

use reprtree::boost::BoostConfig;
use reprtree::cart::{Impurity, TrainConfig};
use reprtree::harness::{run_experiment, DataSource, ExperimentConfig, ModelSpec};

fn main() -> reprtree::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: collision_study <data.csv> [label-column]");
        return Ok(());
    };
    let data = DataSource::Csv {
        path: PathBuf::from(path),
        label_column: args.next().unwrap_or_else(|| "-1".into()),
        has_header: true,
    };

    let models = [
        ("tree", ModelSpec::Tree(TrainConfig::new(Impurity::Gini, 10))),
        ("boosted", ModelSpec::Boosted(BoostConfig::new(25, 10))),
    ];
    for (name, model) in models {
        let cfg = ExperimentConfig::new(data.clone(), model);
        let report = run_experiment(&cfg)?;
        println!("{name}: test accuracy {:.3}", report.reference.test_accuracy);
        match report.correlation {
            Some(c) => println!("{name}: spearman rho {:.3}, p {:.2e}", c.rho, c.p_value),
            None => println!("{name}: {}", report.correlation_note.unwrap_or_default()),
        }
    }
    Ok(())
}
