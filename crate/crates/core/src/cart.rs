//! Binary decision trees grown by greedy impurity minimization.
//!
//! Nodes are numbered from 1 (the root) in depth-first, left-first order.
//! A point reaching internal node `i` goes to the left child when
//! `t_i − x[j_i] > 0` and to the right child otherwise, so a value equal to
//! the threshold goes right. Thresholds sit at midpoints between consecutive
//! distinct training values, which keeps every node margin strictly positive.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::repr::{is_gamma_balanced, ReprAssignment};
use crate::Classifier;

const PROB_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Impurity {
    Gini,
    Entropy,
}

impl Impurity {
    pub fn evaluate(self, class_proportions: &[f64]) -> Result<f64> {
        check_probabilities(class_proportions)?;
        Ok(self.of_proportions(class_proportions.iter().copied()))
    }

    fn of_proportions(self, props: impl Iterator<Item = f64>) -> f64 {
        match self {
            Impurity::Gini => props.fold(0.0, |acc, p| acc + p * (1.0 - p)),
            Impurity::Entropy => props.filter(|&p| p > 0.0).fold(0.0, |acc, p| acc - p * p.log2()),
        }
    }

    pub(crate) fn of_counts(self, counts: &[usize], n: usize) -> f64 {
        if n == 0 {
            return 0.0;
        }
        let n = n as f64;
        self.of_proportions(counts.iter().map(|&c| c as f64 / n))
    }

    pub fn name(self) -> &'static str {
        match self {
            Impurity::Gini => "gini",
            Impurity::Entropy => "entropy",
        }
    }
}

impl std::str::FromStr for Impurity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gini" => Ok(Impurity::Gini),
            "entropy" => Ok(Impurity::Entropy),
            other => Err(Error::InvalidArgument(format!("unknown impurity {other:?}"))),
        }
    }
}

fn check_probabilities(p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if p.is_empty() || p.iter().any(|&v| v.is_nan() || v < 0.0) || (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(Error::InvalidArgument(format!("{p:?} is not a probability vector")));
    }
    Ok(())
}

/// Gini index `Σ p (1 − p)`.
pub fn gini(class_proportions: &[f64]) -> Result<f64> {
    Impurity::Gini.evaluate(class_proportions)
}

/// Entropy `−Σ p log₂ p`, with `0 log 0 = 0`.
pub fn entropy(class_proportions: &[f64]) -> Result<f64> {
    Impurity::Entropy.evaluate(class_proportions)
}

/// Parent impurity minus the size-weighted impurities of the two children,
/// clamped at zero.
pub fn info_gain(
    parent: &[f64],
    left: &[f64],
    right: &[f64],
    n_left: usize,
    n_right: usize,
    impurity: Impurity,
) -> Result<f64> {
    if n_left == 0 || n_right == 0 {
        return Err(Error::InvalidArgument("both children need at least one example".into()));
    }
    let n = (n_left + n_right) as f64;
    let gain = impurity.evaluate(parent)?
        - n_left as f64 / n * impurity.evaluate(left)?
        - n_right as f64 / n * impurity.evaluate(right)?;
    Ok(gain.max(0.0))
}

/// Routing rule shared by all trees in the crate.
#[inline]
pub fn goes_left(threshold: f64, value: f64) -> bool {
    threshold - value > 0.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub impurity: Impurity,
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// A split is taken only when its gain is strictly greater than this.
    pub min_gain: f64,
}

impl TrainConfig {
    pub fn new(impurity: Impurity, max_depth: usize) -> Self {
        Self {
            impurity,
            max_depth,
            min_samples_split: 2,
            min_gain: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 {
            return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
        }
        if !(self.min_gain >= 0.0 && self.min_gain.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "min_gain must be finite and >= 0, got {}",
                self.min_gain
            )));
        }
        Ok(())
    }
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self::new(Impurity::Gini, 4)
    }
}

/// Decision rule of an internal node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    /// Smallest `|threshold − x[feature]|` over the training points at the node.
    pub margin: f64,
    pub info_gain: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Internal(Split),
    Leaf { class: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub id: usize,
    pub depth: usize,
    pub n_samples: usize,
    pub class_counts: Vec<usize>,
    pub impurity: f64,
    pub kind: NodeKind,
}

impl TreeNode {
    pub fn split(&self) -> Option<&Split> {
        match &self.kind {
            NodeKind::Internal(s) => Some(s),
            NodeKind::Leaf { .. } => None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }
}

/// A fitted classification tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    config: TrainConfig,
    n_features: usize,
    n_classes: usize,
    train_size: usize,
    nodes: Vec<TreeNode>,
}

/// Raw and percentage-normalized feature importances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureImportance {
    pub raw: Vec<f64>,
    /// `raw` scaled to sum to 100, or all zeros.
    pub normalized: Vec<f64>,
}

impl FeatureImportance {
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let total: f64 = raw.iter().sum();
        let normalized = if total > 0.0 {
            raw.iter().map(|v| 100.0 * v / total).collect()
        } else {
            vec![0.0; raw.len()]
        };
        Self { raw, normalized }
    }
}

struct Grower<'a> {
    ds: &'a LabeledDataset,
    cfg: TrainConfig,
    nodes: Vec<TreeNode>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    margin: f64,
    gain: f64,
}

impl DecisionTree {
    /// Greedy recursive CART. Every feature and every midpoint between
    /// consecutive distinct values at a node is tried; the split with the
    /// largest information gain wins, ties going to the lower feature and
    /// then the lower threshold. Growth stops at `max_depth`, at pure nodes,
    /// below `min_samples_split`, or when no split beats `min_gain`.
    pub fn fit(train: &LabeledDataset, cfg: &TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let mut grower = Grower {
            ds: train,
            cfg: *cfg,
            nodes: Vec::new(),
        };
        grower.grow((0..train.len()).collect(), 0);
        Ok(Self {
            config: *cfg,
            n_features: train.n_features(),
            n_classes: train.num_classes(),
            train_size: train.len(),
            nodes: grower.nodes,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn train_size(&self) -> usize {
        self.train_size
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Node by 1-based id.
    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id - 1]
    }

    pub fn internal_ids(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| !n.is_leaf()).map(|n| n.id).collect()
    }

    pub fn leaf_ids(&self) -> Vec<usize> {
        self.nodes.iter().filter(|n| n.is_leaf()).map(|n| n.id).collect()
    }

    /// Smallest internal-node margin; `+inf` for a single-leaf tree.
    pub fn min_margin(&self) -> f64 {
        self.nodes
            .iter()
            .filter_map(TreeNode::split)
            .map(|s| s.margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
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

    pub(crate) fn leaf_of(&self, x: &[f64]) -> usize {
        let mut id = 1;
        loop {
            match &self.node(id).kind {
                NodeKind::Leaf { .. } => return id,
                NodeKind::Internal(s) => {
                    id = if goes_left(s.threshold, x[s.feature]) {
                        s.left
                    } else {
                        s.right
                    };
                }
            }
        }
    }

    fn leaf_class(&self, id: usize) -> usize {
        match self.node(id).kind {
            NodeKind::Leaf { class } => class,
            NodeKind::Internal(_) => unreachable!("leaf_of returns leaves"),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.check_dim(x.len())?;
        Ok(self.leaf_class(self.leaf_of(x)))
    }

    /// Node ids from the root to the leaf reached by `x`.
    pub fn leaf_path(&self, x: &[f64]) -> Result<Vec<usize>> {
        self.check_dim(x.len())?;
        let mut path = vec![1];
        let mut id = 1;
        while let NodeKind::Internal(s) = &self.node(id).kind {
            id = if goes_left(s.threshold, x[s.feature]) {
                s.left
            } else {
                s.right
            };
            path.push(id);
        }
        Ok(path)
    }

    /// `FI(j) = Σ N_i · IG(n_i)` over internal nodes splitting on `j`.
    pub fn feature_importance(&self) -> FeatureImportance {
        let mut raw = vec![0.0; self.n_features];
        for node in &self.nodes {
            if let Some(s) = node.split() {
                raw[s.feature] += node.n_samples as f64 * s.info_gain;
            }
        }
        FeatureImportance::from_raw(raw)
    }

    /// Per-leaf class counts of `ds` routed through the tree, keyed by leaf id.
    pub fn leaf_class_counts(&self, ds: &LabeledDataset) -> Result<BTreeMap<usize, Vec<usize>>> {
        self.check_dim(ds.n_features())?;
        let mut counts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let width = self.n_classes.max(ds.num_classes());
        for (x, label) in ds.rows() {
            counts.entry(self.leaf_of(x)).or_insert_with(|| vec![0; width])[label] += 1;
        }
        Ok(counts)
    }

    /// `Σ_ℓ p_ℓ · p_{ℓ,k_ℓ}` with proportions taken from `ds`.
    pub fn accuracy_leafwise(&self, ds: &LabeledDataset) -> Result<f64> {
        let n = ds.len() as f64;
        let counts = self.leaf_class_counts(ds)?;
        Ok(counts
            .iter()
            .map(|(&leaf, c)| {
                let n_leaf: usize = c.iter().sum();
                let p_leaf = n_leaf as f64 / n;
                let p_correct = c[self.leaf_class(leaf)] as f64 / n_leaf as f64;
                p_leaf * p_correct
            })
            .sum())
    }

    /// Fraction of points whose prediction equals their label.
    pub fn accuracy_empirical(&self, ds: &LabeledDataset) -> Result<f64> {
        Ok(self.correct_count(ds)? as f64 / ds.len() as f64)
    }

    pub fn correct_count(&self, ds: &LabeledDataset) -> Result<usize> {
        self.check_dim(ds.n_features())?;
        Ok(ds
            .rows()
            .filter(|(x, l)| self.leaf_class(self.leaf_of(x)) == *l)
            .count())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let tree: Self = serde_json::from_str(s)?;
        tree.validate()?;
        Ok(tree)
    }

    /// One node per line, indented by depth.
    pub fn to_text(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "decision-tree v1 impurity={} max_depth={} min_samples_split={} min_gain={} \
             n_features={} n_classes={} train_size={}\n",
            c.impurity.name(),
            c.max_depth,
            c.min_samples_split,
            c.min_gain,
            self.n_features,
            self.n_classes,
            self.train_size
        );
        for node in &self.nodes {
            let indent = "  ".repeat(node.depth);
            let counts = join_counts(&node.class_counts);
            let _ = match &node.kind {
                NodeKind::Internal(s) => writeln!(
                    out,
                    "{indent}node {} depth={} feature={} threshold={} margin={} gain={} \
                     impurity={} left={} right={} counts={counts}",
                    node.id, node.depth, s.feature, s.threshold, s.margin, s.info_gain, node.impurity, s.left, s.right
                ),
                NodeKind::Leaf { class } => writeln!(
                    out,
                    "{indent}leaf {} depth={} class={class} impurity={} counts={counts}",
                    node.id, node.depth, node.impurity
                ),
            };
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Model("empty tree text".into()))?;
        let mut head = header.split_whitespace();
        if head.next() != Some("decision-tree") || head.next() != Some("v1") {
            return Err(Error::Model(format!("unrecognized header {header:?}")));
        }
        let fields = KeyValues::parse(head)?;
        let config = TrainConfig {
            impurity: fields.get("impurity")?.parse()?,
            max_depth: fields.num("max_depth")?,
            min_samples_split: fields.num("min_samples_split")?,
            min_gain: fields.num("min_gain")?,
        };
        let mut nodes = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace();
            let kind = parts.next().unwrap_or_default();
            let id: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Model(format!("missing node id in {line:?}")))?;
            let f = KeyValues::parse(parts)?;
            let kind = match kind {
                "node" => NodeKind::Internal(Split {
                    feature: f.num("feature")?,
                    threshold: f.num("threshold")?,
                    margin: f.num("margin")?,
                    info_gain: f.num("gain")?,
                    left: f.num("left")?,
                    right: f.num("right")?,
                }),
                "leaf" => NodeKind::Leaf { class: f.num("class")? },
                other => return Err(Error::Model(format!("unknown line kind {other:?}"))),
            };
            let class_counts = f
                .get("counts")?
                .split(',')
                .map(|c| c.parse::<usize>().map_err(|e| Error::Model(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            nodes.push(TreeNode {
                id,
                depth: f.num("depth")?,
                n_samples: class_counts.iter().sum(),
                class_counts,
                impurity: f.num("impurity")?,
                kind,
            });
        }
        let tree = Self {
            config,
            n_features: fields.num("n_features")?,
            n_classes: fields.num("n_classes")?,
            train_size: fields.num("train_size")?,
            nodes,
        };
        tree.validate()?;
        Ok(tree)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Model(msg));
        if self.nodes.is_empty() {
            return bad("tree has no nodes".into());
        }
        for (k, node) in self.nodes.iter().enumerate() {
            if node.id != k + 1 {
                return bad(format!("node at position {k} has id {}", node.id));
            }
            if node.class_counts.len() != self.n_classes {
                return bad(format!("node {} has {} class counts", node.id, node.class_counts.len()));
            }
            match &node.kind {
                NodeKind::Internal(s) => {
                    if s.feature >= self.n_features {
                        return bad(format!("node {} splits on missing feature {}", node.id, s.feature));
                    }
                    for child in [s.left, s.right] {
                        if child <= node.id || child > self.nodes.len() {
                            return bad(format!("node {} has invalid child {child}", node.id));
                        }
                    }
                }
                NodeKind::Leaf { class } => {
                    if *class >= self.n_classes {
                        return bad(format!("leaf {} predicts missing class {class}", node.id));
                    }
                }
            }
        }
        Ok(())
    }
}

impl Classifier for DecisionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn classify(&self, x: &[f64]) -> Result<usize> {
        self.predict(x)
    }
}

fn join_counts(counts: &[usize]) -> String {
    counts.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

struct KeyValues<'a>(Vec<(&'a str, &'a str)>);

impl<'a> KeyValues<'a> {
    fn parse(parts: impl Iterator<Item = &'a str>) -> Result<Self> {
        parts
            .map(|p| {
                p.split_once('=')
                    .ok_or_else(|| Error::Model(format!("expected key=value, got {p:?}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(KeyValues)
    }

    fn get(&self, key: &str) -> Result<&'a str> {
        self.0
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Model(format!("missing field {key:?}")))
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let raw = self.get(key)?;
        raw.parse()
            .map_err(|_| Error::Model(format!("field {key:?} has bad value {raw:?}")))
    }
}

impl Grower<'_> {
    fn grow(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let ds = self.ds;
        let mut counts = vec![0; ds.num_classes()];
        indices.iter().for_each(|&i| counts[ds.label(i)] += 1);
        let n = indices.len();
        let impurity = self.cfg.impurity.of_counts(&counts, n);
        let majority = majority_class(&counts);

        let id = self.nodes.len() + 1;
        self.nodes.push(TreeNode {
            id,
            depth,
            n_samples: n,
            class_counts: counts.clone(),
            impurity,
            kind: NodeKind::Leaf { class: majority },
        });

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if depth >= self.cfg.max_depth || pure || n < self.cfg.min_samples_split {
            return id;
        }
        let Some(best) = self.best_split(&indices, &counts, impurity) else {
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .iter()
            .partition(|&&i| goes_left(best.threshold, ds.point(i)[best.feature]));
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        self.nodes[id - 1].kind = NodeKind::Internal(Split {
            feature: best.feature,
            threshold: best.threshold,
            margin: best.margin,
            info_gain: best.gain,
            left,
            right,
        });
        id
    }

    fn best_split(&self, indices: &[usize], counts: &[usize], parent: f64) -> Option<Candidate> {
        let ds = self.ds;
        let n = indices.len();
        let imp = self.cfg.impurity;
        let mut best: Option<Candidate> = None;
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(n);
        let mut left = vec![0usize; counts.len()];
        let mut right = vec![0usize; counts.len()];
        for j in 0..ds.n_features() {
            column.clear();
            column.extend(indices.iter().map(|&i| (ds.point(i)[j], ds.label(i))));
            column.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
            left.iter_mut().for_each(|c| *c = 0);
            right.copy_from_slice(counts);
            for k in 0..n - 1 {
                let (a, label) = column[k];
                left[label] += 1;
                right[label] -= 1;
                let b = column[k + 1].0;
                if a == b {
                    continue;
                }
                let n_left = k + 1;
                let n_right = n - n_left;
                let gain = parent
                    - n_left as f64 / n as f64 * imp.of_counts(&left, n_left)
                    - n_right as f64 / n as f64 * imp.of_counts(&right, n_right);
                if gain > self.cfg.min_gain && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let threshold = midpoint(a, b);
                    best = Some(Candidate {
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

/// A threshold `t` with `a < t <= b`, as close to the midpoint as rounding allows.
pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    let t = a * 0.5 + b * 0.5;
    if a < t && t <= b {
        t
    } else {
        b
    }
}

fn majority_class(counts: &[usize]) -> usize {
    counts
        .iter()
        .enumerate()
        .fold((0, 0), |best, (k, &c)| if c > best.1 { (k, c) } else { best })
        .0
}

/// Outcome of checking the accuracy-preservation property for one tree and
/// one representative pair of datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Verdict {
    pub epsilon: f64,
    pub min_margin: f64,
    pub gamma: usize,
    /// `epsilon < min_margin`.
    pub hypothesis_holds: bool,
    /// Every point reaches the same leaf as its representative.
    pub routes_match: bool,
    pub mismatched_points: Vec<usize>,
    pub correct_x: usize,
    pub n_x: usize,
    pub correct_xt: usize,
    pub n_xt: usize,
    /// `correct_x / n_x == correct_xt / n_xt`, compared as integers.
    pub acc_equal: bool,
    /// Every leaf/class count of `X` is `gamma` times the one of `X̃`.
    pub leaf_counts_scale: bool,
    pub acc_x: f64,
    pub acc_xt: f64,
}

impl Theorem1Verdict {
    /// The implication `hypothesis ⇒ (routes match ∧ accuracies equal)`.
    pub fn holds(&self) -> bool {
        !self.hypothesis_holds || (self.routes_match && self.acc_equal && self.leaf_counts_scale)
    }
}

/// Checks that a fixed tree has the same accuracy on `x` and on a
/// gamma-balanced representative `xt` whenever `epsilon < M`.
pub fn check_theorem1(
    tree: &DecisionTree,
    x: &LabeledDataset,
    xt: &LabeledDataset,
    assignment: &ReprAssignment,
) -> Result<Theorem1Verdict> {
    let balance = is_gamma_balanced(assignment);
    let gamma = match balance.gamma {
        Some(g) if balance.balanced => g,
        _ => {
            return Err(Error::NotBalanced(format!(
                "{} unassigned points, offending representatives {:?}",
                balance.unassigned.len(),
                balance.offenders
            )))
        }
    };
    if assignment.rep_of.len() != x.len() || assignment.per_rep_counts.len() != xt.len() {
        return Err(Error::InvalidArgument("assignment does not match the datasets".into()));
    }
    tree.check_dim(x.n_features())?;
    tree.check_dim(xt.n_features())?;

    let min_margin = tree.min_margin();
    let mismatched_points: Vec<usize> = assignment
        .rep_of
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| (i, r)))
        .filter(|&(i, r)| tree.leaf_of(x.point(i)) != tree.leaf_of(xt.point(r)))
        .map(|(i, _)| i)
        .collect();

    let correct_x = tree.correct_count(x)?;
    let correct_xt = tree.correct_count(xt)?;
    let (n_x, n_xt) = (x.len(), xt.len());
    let acc_equal = correct_x as u128 * n_xt as u128 == correct_xt as u128 * n_x as u128;

    let counts_x = tree.leaf_class_counts(x)?;
    let counts_xt = tree.leaf_class_counts(xt)?;
    let leaf_counts_scale = counts_x.len() == counts_xt.len()
        && counts_x.iter().all(|(leaf, cx)| {
            counts_xt
                .get(leaf)
                .is_some_and(|ct| cx.len() == ct.len() && cx.iter().zip(ct).all(|(&a, &b)| a == gamma * b))
        });

    Ok(Theorem1Verdict {
        epsilon: assignment.epsilon,
        min_margin,
        gamma,
        hypothesis_holds: assignment.epsilon < min_margin,
        routes_match: mismatched_points.is_empty(),
        mismatched_points,
        correct_x,
        n_x,
        correct_xt,
        n_xt,
        acc_equal,
        leaf_counts_scale,
        acc_x: tree.accuracy_leafwise(x)?,
        acc_xt: tree.accuracy_leafwise(xt)?,
    })
}
