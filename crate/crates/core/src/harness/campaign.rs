//! Randomized campaign for the accuracy-preservation property: trees fitted
//! on Gaussian mixtures keep their accuracy on copies perturbed by less than
//! the smallest node margin.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, streams, KvConfig, COMMON_KEYS};
use crate::cart::{check_theorem1, DecisionTree, Impurity, TrainConfig};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::repr::{perturbed_copy, ReprAssignment};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub trials: usize,
    /// Perturbation radius as a multiple of the tree's minimum margin.
    pub radius_fraction: f64,
    pub seed: u64,
    pub n_range: (usize, usize),
    pub d_range: (usize, usize),
    pub class_choices: Vec<usize>,
    /// Depths are drawn from `1..=max_depth`.
    pub max_depth: usize,
    /// Spread of the mixture centers; points have unit spread around them.
    pub center_sd: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            radius_fraction: 0.9,
            seed: 0,
            n_range: (20, 200),
            d_range: (1, 5),
            class_choices: vec![2, 3],
            max_depth: 6,
            center_sd: 1.5,
        }
    }
}

impl CampaignConfig {
    pub fn keys() -> Vec<&'static str> {
        [COMMON_KEYS, &["trials", "radius-fraction"]].concat()
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        kv.check_keys(&Self::keys())?;
        let d = Self::default();
        let cfg = Self {
            trials: kv.parse_or("trials", d.trials)?,
            radius_fraction: kv.parse_or("radius-fraction", d.radius_fraction)?,
            seed: kv.parse_or("seed", d.seed)?,
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Fractions of 1 or more are accepted; such trials violate the
    /// hypothesis and are reported separately.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.radius_fraction >= 0.0 && self.radius_fraction.is_finite()) {
            return bad(format!(
                "radius fraction must be finite and >= 0, got {}",
                self.radius_fraction
            ));
        }
        if self.n_range.0 < 2 || self.n_range.0 > self.n_range.1 {
            return bad(format!("bad sample-size range {:?}", self.n_range));
        }
        if self.d_range.0 == 0 || self.d_range.0 > self.d_range.1 {
            return bad(format!("bad dimension range {:?}", self.d_range));
        }
        if self.class_choices.is_empty() || self.class_choices.iter().any(|&c| c < 2 || c > self.n_range.0) {
            return bad(format!("bad class choices {:?}", self.class_choices));
        }
        if self.max_depth == 0 {
            return bad("max depth must be at least 1".into());
        }
        if !(self.center_sd >= 0.0 && self.center_sd.is_finite()) {
            return bad(format!("bad center spread {}", self.center_sd));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Passed,
    Failed,
    /// The tree is a single leaf, so there is no margin to stay within.
    Skipped,
    /// `epsilon >= M`; the property promises nothing.
    HypothesisViolated {
        conclusion_held: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub n: usize,
    pub d: usize,
    pub classes: usize,
    pub max_depth: usize,
    pub impurity: Impurity,
    pub min_margin: f64,
    pub epsilon: Option<f64>,
    pub correct_x: usize,
    pub correct_xt: usize,
    pub mismatched_points: usize,
    pub status: TrialStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub config: CampaignConfig,
    pub trials: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub hypothesis_violated: usize,
    /// Violations where routing or accuracy did change.
    pub violated_and_changed: usize,
    pub outcomes: Vec<TrialOutcome>,
}

impl CampaignSummary {
    pub fn all_held(&self) -> bool {
        self.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &TrialOutcome> {
        self.outcomes.iter().filter(|o| o.status == TrialStatus::Failed)
    }
}

/// Gaussian mixture with one unit-variance component per class and labels
/// cycling through the classes.
pub fn gaussian_mixture(n: usize, d: usize, classes: usize, center_sd: f64, seed: u64) -> Result<LabeledDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let centers: Vec<f64> = (0..classes * d).map(|_| center_sd * unit.sample(&mut rng)).collect();
    let labels: Vec<usize> = (0..n).map(|i| i % classes).collect();
    let mut points = Vec::with_capacity(n * d);
    for &y in &labels {
        points.extend((0..d).map(|j| centers[y * d + j] + unit.sample(&mut rng)));
    }
    LabeledDataset::from_flat(points, d, labels, classes)
}

fn run_trial(cfg: &CampaignConfig, trial: usize) -> Result<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, streams::TRIAL, trial as u64));
    let n = rng.random_range(cfg.n_range.0..=cfg.n_range.1);
    let d = rng.random_range(cfg.d_range.0..=cfg.d_range.1);
    let classes = cfg.class_choices[rng.random_range(0..cfg.class_choices.len())];
    let max_depth = rng.random_range(1..=cfg.max_depth);
    let impurity = if rng.random::<bool>() {
        Impurity::Gini
    } else {
        Impurity::Entropy
    };
    let x = gaussian_mixture(n, d, classes, cfg.center_sd, rng.random())?;
    let tree = DecisionTree::fit(&x, &TrainConfig::new(impurity, max_depth))?;
    let min_margin = tree.min_margin();

    let mut outcome = TrialOutcome {
        trial,
        n,
        d,
        classes,
        max_depth,
        impurity,
        min_margin,
        epsilon: None,
        correct_x: 0,
        correct_xt: 0,
        mismatched_points: 0,
        status: TrialStatus::Skipped,
    };
    if !min_margin.is_finite() {
        return Ok(outcome);
    }
    let radius = cfg.radius_fraction * min_margin;
    let xt = perturbed_copy(&x, radius, derive_seed(cfg.seed, streams::PERTURB, trial as u64))?;
    let assignment = ReprAssignment::identity(&x, &xt)?;
    let verdict = check_theorem1(&tree, &x, &xt, &assignment)?;
    let conclusion = verdict.routes_match && verdict.acc_equal && verdict.leaf_counts_scale;
    outcome.epsilon = Some(verdict.epsilon);
    outcome.correct_x = verdict.correct_x;
    outcome.correct_xt = verdict.correct_xt;
    outcome.mismatched_points = verdict.mismatched_points.len();
    outcome.status = match (verdict.hypothesis_holds, conclusion) {
        (false, held) => TrialStatus::HypothesisViolated { conclusion_held: held },
        (true, true) => TrialStatus::Passed,
        (true, false) => TrialStatus::Failed,
    };
    Ok(outcome)
}

/// Runs `cfg.trials` independent trials. Each trial draws a mixture, fits a
/// tree of random depth and impurity, perturbs every point by less than
/// `radius_fraction · M` and checks routing and exact accuracy equality.
pub fn run_theorem1_campaign(cfg: &CampaignConfig) -> Result<CampaignSummary> {
    cfg.validate()?;
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let count = |pred: &dyn Fn(&TrialStatus) -> bool| outcomes.iter().filter(|o| pred(&o.status)).count();
    Ok(CampaignSummary {
        config: cfg.clone(),
        trials: cfg.trials,
        passed: count(&|s| *s == TrialStatus::Passed),
        failed: count(&|s| *s == TrialStatus::Failed),
        skipped: count(&|s| *s == TrialStatus::Skipped),
        hypothesis_violated: count(&|s| matches!(s, TrialStatus::HypothesisViolated { .. })),
        violated_and_changed: count(&|s| *s == TrialStatus::HypothesisViolated { conclusion_held: false }),
        outcomes,
    })
}
