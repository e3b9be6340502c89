//! Experiment orchestration: subset sampling loops, the accuracy-preservation
//! campaign, decision-boundary grids and report files.

pub mod boundary;
pub mod campaign;
pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boost::{BoostConfig, BoostedEnsemble};
use crate::cart::{DecisionTree, FeatureImportance, Impurity, TrainConfig};
use crate::dataset::{
    generate_circles, load_csv, sample_subset, split, CsvOptions, LabelColumn, LabeledDataset, ScaleTable, SplitSpec,
};
use crate::error::{Error, Result};
use crate::metrics::{rank_distance, rank_features, spearman, CorrelationResult, ImportanceRanking};
use crate::repr::epsilon_of;
use crate::Classifier;

pub use boundary::{boundary_grid, export_boundary_grid, padded_bounds, write_boundary_csv, GridRow};
pub use campaign::{run_theorem1_campaign, CampaignConfig, CampaignSummary, TrialOutcome, TrialStatus};
pub use config::KvConfig;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub(crate) mod streams {
    pub const DATA: u64 = 1;
    pub const SPLIT: u64 = 2;
    pub const SUBSET: u64 = 3;
    pub const TRIAL: u64 = 4;
    pub const PERTURB: u64 = 5;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for item `index` of `stream`, depending only on the three inputs.
pub fn derive_seed(master: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(stream)) ^ index)
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidArgument("threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        /// Header name or 0-based index.
        label_column: String,
        has_header: bool,
    },
    Circles {
        n: usize,
        noise_sd: f64,
        inner_factor: f64,
    },
}

impl DataSource {
    pub fn circles(n: usize) -> Self {
        DataSource::Circles {
            n,
            noise_sd: 0.1,
            inner_factor: 0.5,
        }
    }

    /// Loads or generates the data. `seed` drives synthetic generation only.
    pub fn load(&self, seed: u64) -> Result<(LabeledDataset, Vec<String>)> {
        match self {
            DataSource::Csv {
                path,
                label_column,
                has_header,
            } => {
                let opts = CsvOptions {
                    label_column: LabelColumn::parse(label_column),
                    has_header: *has_header,
                };
                let loaded = load_csv(path, &opts)?;
                Ok((loaded.dataset, loaded.warnings))
            }
            DataSource::Circles {
                n,
                noise_sd,
                inner_factor,
            } => Ok((generate_circles(*n, *noise_sd, *inner_factor, seed)?, Vec::new())),
        }
    }

    pub(crate) fn from_kv(kv: &KvConfig) -> Result<Self> {
        match kv.get("data") {
            Some(path) => Ok(DataSource::Csv {
                path: PathBuf::from(path),
                label_column: kv.get("label-col").unwrap_or("-1").to_string(),
                has_header: !kv.parse_or("no-header", false)?,
            }),
            None => Ok(DataSource::Circles {
                n: kv.parse_or("circles-n", 200)?,
                noise_sd: kv.parse_or("circles-noise", 0.1)?,
                inner_factor: kv.parse_or("circles-inner", 0.5)?,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ModelSpec {
    Tree(TrainConfig),
    Boosted(BoostConfig),
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Tree(cfg) => cfg.validate(),
            ModelSpec::Boosted(cfg) => cfg.validate(),
        }
    }

    pub(crate) fn from_kv(kv: &KvConfig, default_depth: usize) -> Result<Self> {
        let depth = kv.parse_or("max-depth", default_depth)?;
        let min_samples_split = kv.parse_or("min-samples-split", 2)?;
        match kv.get("model").unwrap_or("tree") {
            "tree" => Ok(ModelSpec::Tree(TrainConfig {
                impurity: kv.parse_or("impurity", Impurity::Gini)?,
                max_depth: depth,
                min_samples_split,
                min_gain: kv.parse_or("min-gain", 0.0)?,
            })),
            "boosted" => Ok(ModelSpec::Boosted(BoostConfig {
                n_stages: kv.parse_or("stages", 25)?,
                max_depth: depth,
                learning_rate: kv.parse_or("learning-rate", 0.1)?,
                min_samples_split,
            })),
            other => Err(Error::Config(format!("model must be tree or boosted, got {other:?}"))),
        }
    }
}

/// A fitted tree or ensemble.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Tree(DecisionTree),
    Boosted(BoostedEnsemble),
}

impl FittedModel {
    pub fn fit(train: &LabeledDataset, spec: &ModelSpec) -> Result<Self> {
        match spec {
            ModelSpec::Tree(cfg) => DecisionTree::fit(train, cfg).map(FittedModel::Tree),
            ModelSpec::Boosted(cfg) => BoostedEnsemble::fit(train, cfg).map(FittedModel::Boosted),
        }
    }

    pub fn accuracy(&self, ds: &LabeledDataset) -> Result<f64> {
        match self {
            FittedModel::Tree(t) => t.accuracy_empirical(ds),
            FittedModel::Boosted(b) => b.accuracy(ds),
        }
    }

    pub fn feature_importance(&self) -> FeatureImportance {
        match self {
            FittedModel::Tree(t) => t.feature_importance(),
            FittedModel::Boosted(b) => b.feature_importance(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        match self {
            FittedModel::Tree(t) => t.to_json(),
            FittedModel::Boosted(b) => b.to_json(),
        }
    }

    /// Reads either a tree or an ensemble.
    pub fn from_json(s: &str) -> Result<Self> {
        DecisionTree::from_json(s)
            .map(FittedModel::Tree)
            .or_else(|_| BoostedEnsemble::from_json(s).map(FittedModel::Boosted))
    }
}

impl Classifier for FittedModel {
    fn n_features(&self) -> usize {
        match self {
            FittedModel::Tree(t) => Classifier::n_features(t),
            FittedModel::Boosted(b) => Classifier::n_features(b),
        }
    }

    fn classify(&self, x: &[f64]) -> Result<usize> {
        match self {
            FittedModel::Tree(t) => t.classify(x),
            FittedModel::Boosted(b) => b.classify(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub data: DataSource,
    pub train_fraction: f64,
    pub stratified: bool,
    pub subset_fraction: f64,
    pub subset_count: usize,
    pub model: ModelSpec,
    /// Min-max scaling fitted on the training part.
    pub scale: bool,
    pub seed: u64,
    #[serde(skip)]
    pub out_dir: Option<PathBuf>,
    #[serde(skip)]
    pub threads: Option<usize>,
}

pub(crate) const DATA_KEYS: &[&str] = &[
    "data",
    "label-col",
    "no-header",
    "circles-n",
    "circles-noise",
    "circles-inner",
];

pub(crate) const MODEL_KEYS: &[&str] = &[
    "model",
    "impurity",
    "max-depth",
    "min-samples-split",
    "min-gain",
    "stages",
    "learning-rate",
];

pub(crate) const COMMON_KEYS: &[&str] = &["seed", "out-dir", "threads"];

impl ExperimentConfig {
    pub fn new(data: DataSource, model: ModelSpec) -> Self {
        Self {
            data,
            train_fraction: 0.75,
            stratified: true,
            subset_fraction: 0.1,
            subset_count: 100,
            model,
            scale: true,
            seed: 0,
            out_dir: None,
            threads: None,
        }
    }

    pub fn keys() -> Vec<&'static str> {
        let own = ["train-fraction", "stratified", "subset-fraction", "subsets", "scale"];
        [DATA_KEYS, MODEL_KEYS, COMMON_KEYS, &own].concat()
    }

    pub fn from_kv(kv: &KvConfig) -> Result<Self> {
        kv.check_keys(&Self::keys())?;
        let cfg = Self {
            data: DataSource::from_kv(kv)?,
            train_fraction: kv.parse_or("train-fraction", 0.75)?,
            stratified: kv.parse_or("stratified", true)?,
            subset_fraction: kv.parse_or("subset-fraction", 0.1)?,
            subset_count: kv.parse_or("subsets", 100)?,
            model: ModelSpec::from_kv(kv, 10)?,
            scale: kv.parse_or("scale", true)?,
            seed: kv.parse_or("seed", 0)?,
            out_dir: kv.get("out-dir").map(PathBuf::from),
            threads: kv.parse_opt("threads")?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.subset_fraction > 0.0 && self.subset_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "subset fraction must lie in (0, 1], got {}",
                self.subset_fraction
            )));
        }
        if self.subset_count == 0 {
            return Err(Error::Config("subset count must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        self.model.validate()
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec::new(self.train_fraction, derive_seed(self.seed, streams::SPLIT, 0)).stratified(self.stratified)
    }

    pub fn subset_seed(&self, index: usize) -> u64 {
        derive_seed(self.seed, streams::SUBSET, index as u64)
    }
}

/// Evaluation of one fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    pub importance: FeatureImportance,
    pub ranking: ImportanceRanking,
    /// Against the model fitted on the whole training part.
    pub rank_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetRecord {
    pub index: usize,
    pub seed: u64,
    pub size: usize,
    /// `None` when some class of the training part is absent from the subset.
    pub epsilon: Option<f64>,
    pub epsilon_infinite: bool,
    pub uncovered_classes: Vec<usize>,
    pub model: Option<ModelRecord>,
    /// Why no model could be fitted.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exclusion {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ExperimentConfig,
    /// Dataset each subset's epsilon is measured against.
    pub epsilon_reference: String,
    pub feature_names: Vec<String>,
    pub train_size: usize,
    pub test_size: usize,
    pub warnings: Vec<String>,
    pub reference: ModelRecord,
    pub subsets: Vec<SubsetRecord>,
    /// Spearman correlation of epsilon against rank distance.
    pub correlation: Option<CorrelationResult>,
    pub correlation_note: Option<String>,
    pub exclusions: Vec<Exclusion>,
}

/// Pairs `(epsilon, rank_distance)` usable for correlation, and the records left out.
pub fn correlation_pairs(subsets: &[SubsetRecord]) -> (Vec<f64>, Vec<f64>, Vec<Exclusion>) {
    let (mut eps, mut dist, mut excluded) = (Vec::new(), Vec::new(), Vec::new());
    for rec in subsets {
        match (rec.epsilon, &rec.model) {
            (Some(e), Some(m)) => {
                eps.push(e);
                dist.push(m.rank_distance);
            }
            (None, _) => excluded.push(Exclusion {
                index: rec.index,
                reason: format!("infinite epsilon, classes {:?} missing", rec.uncovered_classes),
            }),
            (Some(_), None) => excluded.push(Exclusion {
                index: rec.index,
                reason: format!("no model: {}", rec.error.as_deref().unwrap_or("unknown")),
            }),
        }
    }
    (eps, dist, excluded)
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Correlation computed afresh from the subset records.
    pub fn recompute_correlation(&self) -> Option<CorrelationResult> {
        let (eps, dist, _) = correlation_pairs(&self.subsets);
        spearman(&eps, &dist).ok()
    }

    /// One row per subset record.
    pub fn write_subsets_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let csv_err = |e: csv::Error| Error::Model(format!("writing subset table: {e}"));
        w.write_record([
            "index",
            "seed",
            "size",
            "epsilon",
            "epsilon_infinite",
            "train_accuracy",
            "test_accuracy",
            "rank_distance",
            "ranking",
            "error",
        ])
        .map_err(csv_err)?;
        for rec in &self.subsets {
            let m = rec.model.as_ref();
            let fmt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
            let ranking = m
                .map(|m| {
                    m.ranking
                        .order
                        .iter()
                        .map(usize::to_string)
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .unwrap_or_default();
            w.write_record([
                rec.index.to_string(),
                rec.seed.to_string(),
                rec.size.to_string(),
                fmt(rec.epsilon),
                rec.epsilon_infinite.to_string(),
                fmt(m.map(|m| m.train_accuracy)),
                fmt(m.map(|m| m.test_accuracy)),
                fmt(m.map(|m| m.rank_distance)),
                ranking,
                rec.error.clone().unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()
            .map_err(|e| Error::Model(format!("writing subset table: {e}")))?;
        Ok(())
    }

    /// Writes `report.json` and `subsets.csv` into `dir`.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json_path = dir.join("report.json");
        fs::write(&json_path, self.to_json()?).map_err(|e| Error::io(&json_path, e))?;
        let csv_path = dir.join("subsets.csv");
        let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
        self.write_subsets_csv(std::io::BufWriter::new(file))?;
        Ok((json_path, csv_path))
    }
}

fn evaluate(
    model: &FittedModel,
    train: &LabeledDataset,
    test: &LabeledDataset,
    reference: Option<&ImportanceRanking>,
) -> Result<ModelRecord> {
    let importance = model.feature_importance();
    let ranking = rank_features(&importance.raw);
    let rank_distance = rank_distance(reference.unwrap_or(&ranking), &ranking)?;
    Ok(ModelRecord {
        train_accuracy: model.accuracy(train)?,
        test_accuracy: model.accuracy(test)?,
        importance,
        ranking,
        rank_distance,
    })
}

/// Runs the subset experiment described by `cfg`.
///
/// The data is split, optionally min-max scaled with bounds fitted on the
/// training part, and a reference model is fitted on the whole training
/// part. Each of the `subset_count` subsets is drawn from the training part
/// with its own derived seed, its epsilon against the training part is
/// measured, and a model fitted on it is compared with the reference. The
/// records keep subset order whatever the worker scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (data, warnings) = cfg.data.load(derive_seed(cfg.seed, streams::DATA, 0))?;
    let (mut train, mut test) = split(&data, &cfg.split_spec())?;
    if cfg.scale {
        let table = ScaleTable::fit(&train);
        train = table.apply(&train)?;
        test = table.apply(&test)?;
    }

    let reference_model = FittedModel::fit(&train, &cfg.model)?;
    let reference = evaluate(&reference_model, &train, &test, None)?;

    let subsets = (0..cfg.subset_count)
        .into_par_iter()
        .map(|index| -> Result<SubsetRecord> {
            let seed = cfg.subset_seed(index);
            let subset = sample_subset(&train, cfg.subset_fraction, seed)?;
            let assignment = epsilon_of(&train, &subset)?;
            let finite = assignment.epsilon.is_finite();
            let (model, error) = match FittedModel::fit(&subset, &cfg.model) {
                Ok(m) => (Some(evaluate(&m, &subset, &test, Some(&reference.ranking))?), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Ok(SubsetRecord {
                index,
                seed,
                size: subset.len(),
                epsilon: finite.then_some(assignment.epsilon),
                epsilon_infinite: !finite,
                uncovered_classes: assignment.uncovered_classes,
                model,
                error,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (eps, dist, exclusions) = correlation_pairs(&subsets);
    let (correlation, correlation_note) = match spearman(&eps, &dist) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(format!("correlation unavailable: {e}"))),
    };

    Ok(ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        config: cfg.clone(),
        epsilon_reference: "training-set".to_string(),
        feature_names: data.feature_names().to_vec(),
        train_size: train.len(),
        test_size: test.len(),
        warnings,
        reference,
        subsets,
        correlation,
        correlation_note,
        exclusions,
    })
}
