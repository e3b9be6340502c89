//! Gradient-boosted regression trees for binary classification.
//!
//! Classic logistic-loss boosting: start from the training log-odds, fit each
//! stage's tree to the residuals `y − σ(F(x))` by squared-error reduction, set
//! each leaf by one Newton step `Σ r / Σ p(1 − p)`, and add the stage scaled by
//! the learning rate.

use serde::{Deserialize, Serialize};

use crate::cart::{goes_left, midpoint, FeatureImportance, Split};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::Classifier;

/// Newton denominators below this give a zero leaf value.
const HESSIAN_FLOOR: f64 = 1e-12;
/// Probabilities are kept inside `[P_FLOOR, 1 − P_FLOOR]`.
const P_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub n_stages: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_split: usize,
}

impl BoostConfig {
    pub fn new(n_stages: usize, max_depth: usize) -> Self {
        Self {
            n_stages,
            max_depth,
            learning_rate: 0.1,
            min_samples_split: 2,
        }
    }

    pub fn with_learning_rate(mut self, learning_rate: f64) -> Self {
        self.learning_rate = learning_rate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_stages == 0 {
            return Err(Error::InvalidArgument("n_stages must be at least 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.learning_rate) {
            return Err(Error::InvalidArgument(format!(
                "learning_rate must lie in [0, 1], got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

impl Default for BoostConfig {
    fn default() -> Self {
        Self::new(25, 10)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegressionKind {
    Internal(Split),
    Leaf { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionNode {
    pub id: usize,
    pub depth: usize,
    pub n_samples: usize,
    pub kind: RegressionKind,
}

/// One boosting stage. Internal nodes route exactly like [`crate::cart::DecisionTree`];
/// a split's `info_gain` is its decrease in residual variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    n_features: usize,
    nodes: Vec<RegressionNode>,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[RegressionNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &RegressionNode {
        &self.nodes[id - 1]
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut id = 1;
        loop {
            match &self.node(id).kind {
                RegressionKind::Leaf { value } => return *value,
                RegressionKind::Internal(s) => {
                    id = if goes_left(s.threshold, x[s.feature]) {
                        s.left
                    } else {
                        s.right
                    };
                }
            }
        }
    }

    /// `Σ N_i · gain_i` per feature.
    pub fn feature_importance(&self) -> FeatureImportance {
        let mut raw = vec![0.0; self.n_features];
        for node in &self.nodes {
            if let RegressionKind::Internal(s) = &node.kind {
                raw[s.feature] += node.n_samples as f64 * s.info_gain;
            }
        }
        FeatureImportance::from_raw(raw)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::Model("stage has no nodes".into()));
        }
        for (k, node) in self.nodes.iter().enumerate() {
            if node.id != k + 1 {
                return Err(Error::Model(format!("stage node at {k} has id {}", node.id)));
            }
            if let RegressionKind::Internal(s) = &node.kind {
                if s.feature >= self.n_features
                    || [s.left, s.right].iter().any(|&c| c <= node.id || c > self.nodes.len())
                {
                    return Err(Error::Model(format!("stage node {} is malformed", node.id)));
                }
            }
        }
        Ok(())
    }
}

/// A fitted binary boosting ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedEnsemble {
    pub config: BoostConfig,
    pub n_features: usize,
    /// Log-odds of class 1 in the training data.
    pub initial_score: f64,
    pub stages: Vec<RegressionTree>,
    /// Training log-loss before any stage, then after each stage.
    pub train_log_loss: Vec<f64>,
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(P_FLOOR, 1.0 - P_FLOOR)
}

fn log_loss(labels: &[usize], scores: &[f64]) -> f64 {
    let total: f64 = labels
        .iter()
        .zip(scores)
        .map(|(&y, &f)| {
            let p = sigmoid(f);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / labels.len() as f64
}

impl BoostedEnsemble {
    pub fn fit(train: &LabeledDataset, cfg: &BoostConfig) -> Result<Self> {
        cfg.validate()?;
        if train.num_classes() != 2 {
            return Err(Error::NonBinary(train.num_classes()));
        }
        let y: Vec<f64> = train.labels().iter().map(|&l| l as f64).collect();
        let rate = y.iter().sum::<f64>() / y.len() as f64;
        if rate <= 0.0 || rate >= 1.0 {
            return Err(Error::SingleClass(rate));
        }
        let initial_score = (rate / (1.0 - rate)).ln();
        let mut scores = vec![initial_score; train.len()];
        let mut train_log_loss = vec![log_loss(train.labels(), &scores)];
        let mut stages = Vec::with_capacity(cfg.n_stages);
        for _ in 0..cfg.n_stages {
            let probs: Vec<f64> = scores.iter().map(|&f| sigmoid(f)).collect();
            let residuals: Vec<f64> = y.iter().zip(&probs).map(|(y, p)| y - p).collect();
            let hessians: Vec<f64> = probs.iter().map(|p| p * (1.0 - p)).collect();
            let mut grower = StageGrower {
                ds: train,
                cfg,
                residuals: &residuals,
                hessians: &hessians,
                nodes: Vec::new(),
            };
            grower.grow((0..train.len()).collect(), 0);
            let tree = RegressionTree {
                n_features: train.n_features(),
                nodes: grower.nodes,
            };
            for (i, (x, _)) in train.rows().enumerate() {
                scores[i] += cfg.learning_rate * tree.predict(x);
            }
            train_log_loss.push(log_loss(train.labels(), &scores));
            stages.push(tree);
        }
        Ok(Self {
            config: *cfg,
            n_features: train.n_features(),
            initial_score,
            stages,
            train_log_loss,
        })
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found,
            });
        }
        Ok(())
    }

    /// `initial_score + learning_rate · Σ stage outputs`.
    pub fn raw_score(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        let sum: f64 = self.stages.iter().map(|t| t.predict(x)).sum();
        Ok(self.initial_score + self.config.learning_rate * sum)
    }

    /// Probability of class 1, strictly inside `(0, 1)`.
    pub fn predict_proba(&self, x: &[f64]) -> Result<f64> {
        Ok(sigmoid(self.raw_score(x)?))
    }

    /// Class 1 iff the probability is at least 0.5.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(usize::from(self.predict_proba(x)? >= 0.5))
    }

    pub fn accuracy(&self, ds: &LabeledDataset) -> Result<f64> {
        self.check_dim(ds.n_features())?;
        let mut correct = 0usize;
        for (x, l) in ds.rows() {
            correct += usize::from(self.predict(x)? == l);
        }
        Ok(correct as f64 / ds.len() as f64)
    }

    pub fn stage_importances(&self) -> Vec<Vec<f64>> {
        self.stages.iter().map(|t| t.feature_importance().raw).collect()
    }

    /// Sum of the stages' raw importances, plus the percentage view.
    pub fn feature_importance(&self) -> FeatureImportance {
        let mut raw = vec![0.0; self.n_features];
        for stage in self.stage_importances() {
            raw.iter_mut().zip(stage).for_each(|(r, s)| *r += s);
        }
        FeatureImportance::from_raw(raw)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let ens: Self = serde_json::from_str(s)?;
        ens.config.validate()?;
        for stage in &ens.stages {
            if stage.n_features != ens.n_features {
                return Err(Error::Model("stage feature count disagrees with ensemble".into()));
            }
            stage.validate()?;
        }
        Ok(ens)
    }
}

impl Classifier for BoostedEnsemble {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn classify(&self, x: &[f64]) -> Result<usize> {
        self.predict(x)
    }
}

struct StageGrower<'a> {
    ds: &'a LabeledDataset,
    cfg: &'a BoostConfig,
    residuals: &'a [f64],
    hessians: &'a [f64],
    nodes: Vec<RegressionNode>,
}

struct StageCandidate {
    feature: usize,
    threshold: f64,
    margin: f64,
    gain: f64,
}

impl StageGrower<'_> {
    fn grow(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let n = indices.len();
        let id = self.nodes.len() + 1;
        self.nodes.push(RegressionNode {
            id,
            depth,
            n_samples: n,
            kind: RegressionKind::Leaf {
                value: self.newton_value(&indices),
            },
        });
        if depth >= self.cfg.max_depth || n < self.cfg.min_samples_split.max(2) {
            return id;
        }
        let Some(best) = self.best_split(&indices) else {
            return id;
        };
        let ds = self.ds;
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| goes_left(best.threshold, ds.point(i)[best.feature]));
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[id - 1].kind = RegressionKind::Internal(Split {
            feature: best.feature,
            threshold: best.threshold,
            margin: best.margin,
            info_gain: best.gain,
            left,
            right,
        });
        id
    }

    fn newton_value(&self, indices: &[usize]) -> f64 {
        let num: f64 = indices.iter().map(|&i| self.residuals[i]).sum();
        let den: f64 = indices.iter().map(|&i| self.hessians[i]).sum();
        if den < HESSIAN_FLOOR {
            0.0
        } else {
            num / den
        }
    }

    /// Largest decrease in residual variance; for two children this equals
    /// `n_l n_r / n² · (mean_l − mean_r)²`.
    fn best_split(&self, indices: &[usize]) -> Option<StageCandidate> {
        let ds = self.ds;
        let n = indices.len();
        let nf = n as f64;
        let total: f64 = indices.iter().map(|&i| self.residuals[i]).sum();
        let mut best: Option<StageCandidate> = None;
        let mut column: Vec<(f64, f64)> = Vec::with_capacity(n);
        for j in 0..ds.n_features() {
            column.clear();
            column.extend(indices.iter().map(|&i| (ds.point(i)[j], self.residuals[i])));
            column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_sum = 0.0;
            for k in 0..n - 1 {
                let (a, r) = column[k];
                left_sum += r;
                let b = column[k + 1].0;
                if a == b {
                    continue;
                }
                let n_left = (k + 1) as f64;
                let n_right = nf - n_left;
                let diff = left_sum / n_left - (total - left_sum) / n_right;
                let gain = n_left * n_right / (nf * nf) * diff * diff;
                if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let threshold = midpoint(a, b);
                    best = Some(StageCandidate {
                        feature: j,
                        threshold,
                        margin: (threshold - a).min(b - threshold),
                        gain,
                    });
                }
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_circles;

    fn separable() -> LabeledDataset {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64]).collect();
        let labels = (0..20).map(|i| usize::from(i >= 10)).collect();
        LabeledDataset::new(rows, labels, 2).unwrap()
    }

    #[test]
    fn separable_data_is_learned() {
        let ds = separable();
        let ens = BoostedEnsemble::fit(&ds, &BoostConfig::new(10, 2)).unwrap();
        assert_eq!(ens.stages.len(), 10);
        assert_eq!(ens.accuracy(&ds).unwrap(), 1.0);
        assert_eq!(ens.initial_score, 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let three = LabeledDataset::new(vec![vec![0.0], vec![1.0], vec![2.0]], vec![0, 1, 2], 3).unwrap();
        assert!(matches!(
            BoostedEnsemble::fit(&three, &BoostConfig::new(2, 2)),
            Err(Error::NonBinary(3))
        ));
        let one = LabeledDataset::new(vec![vec![0.0], vec![1.0]], vec![1, 1], 2).unwrap();
        assert!(matches!(
            BoostedEnsemble::fit(&one, &BoostConfig::new(2, 2)),
            Err(Error::SingleClass(_))
        ));
        assert!(BoostedEnsemble::fit(&separable(), &BoostConfig::new(0, 2)).is_err());
        assert!(BoostedEnsemble::fit(&separable(), &BoostConfig::new(1, 2).with_learning_rate(1.5)).is_err());
    }

    #[test]
    fn small_learning_rate_stays_near_base_rate() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..30).map(|i| usize::from(i % 3 == 0)).collect();
        let ds = LabeledDataset::new(rows, labels, 2).unwrap();
        let base = 10.0 / 30.0;
        let mut prev = f64::INFINITY;
        for lr in [0.5, 0.1, 0.01, 0.001] {
            let ens = BoostedEnsemble::fit(&ds, &BoostConfig::new(1, 3).with_learning_rate(lr)).unwrap();
            let worst = ds
                .rows()
                .map(|(x, _)| (ens.predict_proba(x).unwrap() - base).abs())
                .fold(0.0, f64::max);
            assert!(worst < prev);
            prev = worst;
        }
        assert!(prev < 0.01);
    }

    #[test]
    fn zero_learning_rate_predicts_majority() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..30).map(|i| usize::from(i % 3 == 0)).collect();
        let ds = LabeledDataset::new(rows, labels, 2).unwrap();
        let ens = BoostedEnsemble::fit(&ds, &BoostConfig::new(1, 3).with_learning_rate(0.0)).unwrap();
        assert_eq!(ens.predict_proba(&[4.0]).unwrap(), sigmoid(ens.initial_score));
        assert!((ens.accuracy(&ds).unwrap() - 20.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn half_probability_is_class_one() {
        let ds = separable();
        let mut ens = BoostedEnsemble::fit(&ds, &BoostConfig::new(1, 1).with_learning_rate(0.0)).unwrap();
        ens.initial_score = 0.0;
        assert_eq!(ens.predict_proba(&[3.0]).unwrap(), 0.5);
        assert_eq!(ens.predict(&[3.0]).unwrap(), 1);
        assert!(ens.predict(&[3.0, 1.0]).is_err());
    }

    #[test]
    fn log_loss_never_increases_on_circles() {
        let ds = generate_circles(150, 0.1, 0.5, 5).unwrap();
        let ens = BoostedEnsemble::fit(&ds, &BoostConfig::new(25, 4)).unwrap();
        assert_eq!(ens.train_log_loss.len(), 26);
        for w in ens.train_log_loss.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{w:?}");
        }
    }

    #[test]
    fn importance_is_sum_of_stages() {
        let ds = generate_circles(100, 0.1, 0.5, 6).unwrap();
        let one = BoostedEnsemble::fit(&ds, &BoostConfig::new(1, 3)).unwrap();
        assert_eq!(one.feature_importance(), one.stages[0].feature_importance());

        let two = BoostedEnsemble::fit(&ds, &BoostConfig::new(2, 3)).unwrap();
        let per = two.stage_importances();
        let summed: Vec<f64> = per[0].iter().zip(&per[1]).map(|(a, b)| a + b).collect();
        assert_eq!(two.feature_importance().raw, summed);
    }

    #[test]
    fn unused_feature_has_zero_importance() {
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 3.0]).collect();
        let labels = (0..20).map(|i| usize::from(i >= 10)).collect();
        let ds = LabeledDataset::new(rows, labels, 2).unwrap();
        let ens = BoostedEnsemble::fit(&ds, &BoostConfig::new(5, 3)).unwrap();
        let fi = ens.feature_importance();
        assert_eq!(fi.raw[1], 0.0);
        assert!((fi.normalized.iter().sum::<f64>() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn json_round_trip() {
        let ds = generate_circles(60, 0.1, 0.5, 7).unwrap();
        let ens = BoostedEnsemble::fit(&ds, &BoostConfig::new(3, 3)).unwrap();
        let back = BoostedEnsemble::from_json(&ens.to_json().unwrap()).unwrap();
        assert_eq!(back, ens);
    }
}
