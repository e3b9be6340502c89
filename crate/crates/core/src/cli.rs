//! Command-line front end.
//!
//! Every subcommand reads an optional `--config` file of flat keys and lets a
//! flag of the same name override each key. Exit codes: 0 success, 1
//! validation error, 2 I/O error, 3 failed property campaign.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::dataset::{load_csv, load_csv_with_labels, CsvOptions, LabelColumn, ScaleTable};
use crate::error::{Error, Result};
use crate::harness::{
    derive_seed, export_boundary_grid, padded_bounds, run_experiment, run_theorem1_campaign, streams, with_threads,
    CampaignConfig, DataSource, ExperimentConfig, FittedModel, KvConfig, ModelSpec, COMMON_KEYS, DATA_KEYS, MODEL_KEYS,
};
use crate::repr::{epsilon_of, is_gamma_balanced};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_CAMPAIGN_FAILED: i32 = 3;

const DEFAULT_OUT_DIR: &str = "reprtree-out";

#[derive(Debug, Parser)]
#[command(
    name = "reprtree",
    version,
    about = "Representative subsets and decision-tree stability"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Subset experiment: epsilon against importance-ranking drift.
    Run(RunArgs),
    /// Randomized accuracy-preservation campaign.
    Theorem1(Theorem1Args),
    /// Export a decision-boundary grid for planar data.
    Boundary(BoundaryArgs),
    /// Epsilon-representativeness of one CSV with respect to another.
    Epsilon(EpsilonArgs),
    /// Fit a model and write it to disk.
    Train(TrainArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Key-value configuration file (TOML scalars).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// CSV file; two-circles data is generated when absent.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Label column name or 0-based index; negative counts from the end.
    #[arg(long, allow_hyphen_values = true)]
    pub label_col: Option<String>,
    #[arg(long)]
    pub no_header: bool,
    #[arg(long)]
    pub circles_n: Option<usize>,
    #[arg(long)]
    pub circles_noise: Option<f64>,
    #[arg(long)]
    pub circles_inner: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    /// `tree` or `boosted`.
    #[arg(long)]
    pub model: Option<String>,
    /// `gini` or `entropy`.
    #[arg(long)]
    pub impurity: Option<String>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub min_samples_split: Option<usize>,
    #[arg(long)]
    pub min_gain: Option<f64>,
    #[arg(long)]
    pub stages: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub train_fraction: Option<f64>,
    #[arg(long)]
    pub stratified: Option<bool>,
    #[arg(long)]
    pub subset_fraction: Option<f64>,
    #[arg(long)]
    pub subsets: Option<usize>,
    #[arg(long)]
    pub scale: Option<bool>,
}

#[derive(Debug, Args)]
pub struct Theorem1Args {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Perturbation radius as a multiple of the minimum margin.
    #[arg(long)]
    pub radius_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BoundaryArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Previously saved model JSON; otherwise a model is fitted on the data.
    #[arg(long)]
    pub model_file: Option<PathBuf>,
    /// Grid points per axis.
    #[arg(long)]
    pub resolution: Option<usize>,
    /// `lo1,hi1,lo2,hi2`; defaults to the padded data box.
    #[arg(long, allow_hyphen_values = true)]
    pub bounds: Option<String>,
    /// Padding of the default box as a fraction of the data extent.
    #[arg(long)]
    pub pad: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EpsilonArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Reference dataset X.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Candidate representative X̃.
    #[arg(long)]
    pub subset: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub label_col: Option<String>,
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Min-max scale features before fitting.
    #[arg(long)]
    pub scale: Option<bool>,
}

fn put<T: ToString>(kv: &mut KvConfig, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        kv.set(key, v.to_string());
    }
}

fn put_path(kv: &mut KvConfig, key: &str, value: &Option<PathBuf>) {
    if let Some(p) = value {
        kv.set(key, p.to_string_lossy());
    }
}

fn put_flag(kv: &mut KvConfig, key: &str, on: bool) {
    if on {
        kv.set(key, "true");
    }
}

impl CommonArgs {
    /// Config file values overlaid with the flags given here and by `extra`.
    fn resolve(&self, extra: impl FnOnce(&mut KvConfig)) -> Result<KvConfig> {
        let mut kv = match &self.config {
            Some(path) => KvConfig::from_file(path)?,
            None => KvConfig::new(),
        };
        let mut flags = KvConfig::new();
        put(&mut flags, "seed", &self.seed);
        put_path(&mut flags, "out-dir", &self.out_dir);
        put(&mut flags, "threads", &self.threads);
        extra(&mut flags);
        kv.merge(&flags);
        Ok(kv)
    }
}

impl DataArgs {
    fn apply(&self, kv: &mut KvConfig) {
        put_path(kv, "data", &self.data);
        put(kv, "label-col", &self.label_col);
        put_flag(kv, "no-header", self.no_header);
        put(kv, "circles-n", &self.circles_n);
        put(kv, "circles-noise", &self.circles_noise);
        put(kv, "circles-inner", &self.circles_inner);
    }
}

impl ModelArgs {
    fn apply(&self, kv: &mut KvConfig) {
        put(kv, "model", &self.model);
        put(kv, "impurity", &self.impurity);
        put(kv, "max-depth", &self.max_depth);
        put(kv, "min-samples-split", &self.min_samples_split);
        put(kv, "min-gain", &self.min_gain);
        put(kv, "stages", &self.stages);
        put(kv, "learning-rate", &self.learning_rate);
    }
}

fn out_dir(kv: &KvConfig) -> PathBuf {
    PathBuf::from(kv.get("out-dir").unwrap_or(DEFAULT_OUT_DIR))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn cmd_run(args: &RunArgs) -> Result<i32> {
    let kv = args.common.resolve(|kv| {
        args.data.apply(kv);
        args.model.apply(kv);
        put(kv, "train-fraction", &args.train_fraction);
        put(kv, "stratified", &args.stratified);
        put(kv, "subset-fraction", &args.subset_fraction);
        put(kv, "subsets", &args.subsets);
        put(kv, "scale", &args.scale);
    })?;
    let cfg = ExperimentConfig::from_kv(&kv)?;
    let report = with_threads(cfg.threads, || run_experiment(&cfg))??;
    let (json, csv) = report.write(out_dir(&kv))?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!("train/test sizes: {}/{}", report.train_size, report.test_size);
    println!(
        "reference accuracy: train {:.4}, test {:.4}",
        report.reference.train_accuracy, report.reference.test_accuracy
    );
    println!(
        "subsets: {} ({} excluded from correlation)",
        report.subsets.len(),
        report.exclusions.len()
    );
    match (&report.correlation, &report.correlation_note) {
        (Some(c), _) => println!(
            "spearman(epsilon, rank distance): rho {:.4}, p {:.3e}, n {}",
            c.rho, c.p_value, c.n
        ),
        (None, Some(note)) => println!("{note}"),
        (None, None) => {}
    }
    println!("wrote {} and {}", json.display(), csv.display());
    Ok(EXIT_OK)
}

fn cmd_theorem1(args: &Theorem1Args) -> Result<i32> {
    let kv = args.common.resolve(|kv| {
        put(kv, "trials", &args.trials);
        put(kv, "radius-fraction", &args.radius_fraction);
    })?;
    let cfg = CampaignConfig::from_kv(&kv)?;
    let threads = kv.parse_opt("threads")?;
    let summary = with_threads(threads, || run_theorem1_campaign(&cfg))??;
    println!(
        "trials {}: passed {}, failed {}, skipped {}, hypothesis violated {} ({} changed)",
        summary.trials,
        summary.passed,
        summary.failed,
        summary.skipped,
        summary.hypothesis_violated,
        summary.violated_and_changed
    );
    for f in summary.failures() {
        println!(
            "failed trial {}: n {} d {} classes {} depth {} margin {} epsilon {:?}",
            f.trial, f.n, f.d, f.classes, f.max_depth, f.min_margin, f.epsilon
        );
    }
    if kv.get("out-dir").is_some() {
        let path = out_dir(&kv).join("theorem1.json");
        write_json(&path, &summary)?;
        println!("wrote {}", path.display());
    }
    Ok(if summary.all_held() {
        EXIT_OK
    } else {
        EXIT_CAMPAIGN_FAILED
    })
}

fn parse_bounds(text: &str) -> Result<[(f64, f64); 2]> {
    let v: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::Config(format!("bounds must be four numbers, got {text:?}")))?;
    match v.as_slice() {
        &[a, b, c, d] => Ok([(a, b), (c, d)]),
        _ => Err(Error::Config(format!("bounds must be four numbers, got {text:?}"))),
    }
}

fn cmd_boundary(args: &BoundaryArgs) -> Result<i32> {
    let kv = args.common.resolve(|kv| {
        args.data.apply(kv);
        args.model.apply(kv);
        put_path(kv, "model-file", &args.model_file);
        put(kv, "resolution", &args.resolution);
        put(kv, "bounds", &args.bounds);
        put(kv, "pad", &args.pad);
    })?;
    kv.check_keys(
        &[
            DATA_KEYS,
            MODEL_KEYS,
            COMMON_KEYS,
            &["model-file", "resolution", "bounds", "pad"],
        ]
        .concat(),
    )?;
    let seed = kv.parse_or("seed", 0u64)?;
    let (data, _) = DataSource::from_kv(&kv)?.load(derive_seed(seed, streams::DATA, 0))?;
    let model = match kv.get("model-file") {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            FittedModel::from_json(&text)?
        }
        None => FittedModel::fit(&data, &ModelSpec::from_kv(&kv, 4)?)?,
    };
    let bounds = match kv.get("bounds") {
        Some(b) => parse_bounds(b)?,
        None => padded_bounds(&data, kv.parse_or("pad", 0.1)?)?,
    };
    let dir = out_dir(&kv);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let path = dir.join("boundary.csv");
    let rows = export_boundary_grid(&model, bounds, kv.parse_or("resolution", 100)?, &path)?;
    println!("wrote {rows} grid points to {}", path.display());
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct EpsilonOutput {
    n: usize,
    n_subset: usize,
    epsilon: Option<f64>,
    epsilon_infinite: bool,
    uncovered_classes: Vec<String>,
    gamma_balanced: bool,
    gamma: Option<usize>,
}

fn cmd_epsilon(args: &EpsilonArgs) -> Result<i32> {
    let kv = args.common.resolve(|kv| {
        put_path(kv, "data", &args.data);
        put_path(kv, "subset", &args.subset);
        put(kv, "label-col", &args.label_col);
        put_flag(kv, "no-header", args.no_header);
    })?;
    kv.check_keys(&[COMMON_KEYS, &["data", "subset", "label-col", "no-header"]].concat())?;
    let (Some(x_path), Some(xt_path)) = (kv.get("data"), kv.get("subset")) else {
        return Err(Error::Config("epsilon needs --data and --subset".into()));
    };
    let opts = CsvOptions {
        label_column: LabelColumn::parse(kv.get("label-col").unwrap_or("-1")),
        has_header: !kv.parse_or("no-header", false)?,
    };
    let x = load_csv(x_path, &opts)?;
    let xt = load_csv_with_labels(xt_path, &opts, &x.label_names)?;
    for w in x.warnings.iter().chain(&xt.warnings) {
        eprintln!("warning: {w}");
    }
    let classes = x.dataset.num_classes().max(xt.dataset.num_classes());
    let align = |ds: &crate::dataset::LabeledDataset| {
        crate::dataset::LabeledDataset::from_flat(
            ds.points_flat().to_vec(),
            ds.n_features(),
            ds.labels().to_vec(),
            classes,
        )
    };
    let assignment = epsilon_of(&align(&x.dataset)?, &align(&xt.dataset)?)?;
    let balance = is_gamma_balanced(&assignment);
    let name = |k: usize| xt.label_names.get(k).cloned().unwrap_or_else(|| k.to_string());
    let out = EpsilonOutput {
        n: x.dataset.len(),
        n_subset: xt.dataset.len(),
        epsilon: assignment.epsilon.is_finite().then_some(assignment.epsilon),
        epsilon_infinite: !assignment.epsilon.is_finite(),
        uncovered_classes: assignment.uncovered_classes.iter().map(|&k| name(k)).collect(),
        gamma_balanced: balance.balanced,
        gamma: balance.gamma,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    if kv.get("out-dir").is_some() {
        write_json(&out_dir(&kv).join("epsilon.json"), &out)?;
    }
    Ok(EXIT_OK)
}

fn cmd_train(args: &TrainArgs) -> Result<i32> {
    let kv = args.common.resolve(|kv| {
        args.data.apply(kv);
        args.model.apply(kv);
        put(kv, "scale", &args.scale);
    })?;
    kv.check_keys(&[DATA_KEYS, MODEL_KEYS, COMMON_KEYS, &["scale"]].concat())?;
    let seed = kv.parse_or("seed", 0u64)?;
    let (mut data, warnings) = DataSource::from_kv(&kv)?.load(derive_seed(seed, streams::DATA, 0))?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if kv.parse_or("scale", false)? {
        data = ScaleTable::fit(&data).apply(&data)?;
    }
    let spec = ModelSpec::from_kv(&kv, 4)?;
    let model = FittedModel::fit(&data, &spec)?;
    let dir = out_dir(&kv);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let json_path = dir.join("model.json");
    fs::write(&json_path, model.to_json()? + "\n").map_err(|e| Error::io(&json_path, e))?;
    if let FittedModel::Tree(tree) = &model {
        let text_path = dir.join("tree.txt");
        fs::write(&text_path, tree.to_text()).map_err(|e| Error::io(&text_path, e))?;
    }
    println!("training accuracy: {:.4}", model.accuracy(&data)?);
    let fi = model.feature_importance();
    for (name, v) in data.feature_names().iter().zip(&fi.normalized) {
        println!("importance {name}: {v:.2}");
    }
    println!("wrote {}", json_path.display());
    Ok(EXIT_OK)
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Theorem1(a) => cmd_theorem1(a),
        Command::Boundary(a) => cmd_boundary(a),
        Command::Epsilon(a) => cmd_epsilon(a),
        Command::Train(a) => cmd_train(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_io() {
                EXIT_IO
            } else {
                EXIT_INVALID
            }
        }
    }
}
