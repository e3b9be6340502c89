//! `reprtree`: epsilon-representative subsets and decision-tree stability.
//!
//! Measures how far a training subset is from the data it was drawn from
//! (a label-aware L∞ covering radius), grows CART trees and logistic
//! gradient-boosted ensembles on both, and correlates that distance with the
//! drift of the models' feature-importance orderings.
//!
//! ## Modules
//!
//! - [`dataset`] - labeled point clouds, CSV I/O, synthetic circles, splits, scaling
//! - [`repr`] - epsilon-representativeness, balanced assignments, perturbed copies
//! - [`cart`] - decision trees, margins, feature importance, the accuracy-preservation check
//! - [`boost`] - gradient boosting with logistic loss
//! - [`metrics`] - importance rankings, rank distance, Spearman correlation
//! - [`harness`] - experiment runner, property campaign, boundary grids, reports
//!
//! ## Examples
//!
//! Every major capability has a runnable example under `crates/core/examples/`:
//!
//! - **`circles_experiment`** - full subset experiment on the two-circles data
//! - **`epsilon_representativeness`** - covering radius between two datasets
//! - **`balanced_subset`** - gamma-balanced subsets and their assignments
//! - **`theorem1_check`** - perturbed copies inside the tree margin keep accuracy
//! - **`decision_boundary`** - export a prediction raster for plotting
//! - **`gradient_boosting`** - boosted ensemble, log-loss trace and importances
//! - **`importance_drift`** - rank distance between importance orderings
//! - **`tree_formats`** - JSON and text serialization of trees
//! - **`collision_study`** - subset experiment on a user-supplied CSV
//!
//! ```bash
//! cargo run --release -p reprtree --example circles_experiment
//! cargo run --release -p reprtree --example theorem1_check
//! ```
//!
//! The `reprtree` binary wraps the same functionality as subcommands
//! (`run`, `theorem1`, `boundary`, `epsilon`, `train`).

pub mod boost;
pub mod cart;
pub mod cli;
pub mod dataset;
mod error;
pub mod harness;
pub mod metrics;
pub mod repr;

pub use error::{Error, Result};

/// A fitted model that maps a feature vector to a class index.
pub trait Classifier {
    fn n_features(&self) -> usize;

    fn classify(&self, x: &[f64]) -> Result<usize>;
}
