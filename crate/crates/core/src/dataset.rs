//! Labeled point clouds: construction, CSV ingestion, the two-circles
//! generator, seeded splitting and subsampling, and min-max scaling.
//!
//! A [`LabeledDataset`] is immutable once built. Every operation that changes
//! the data returns a new dataset.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `N` points in `R^d` with class labels in `0..num_classes`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    points: Vec<f64>,
    n_features: usize,
    labels: Vec<usize>,
    num_classes: usize,
    feature_names: Vec<String>,
}

impl LabeledDataset {
    /// Builds a dataset from one `Vec` per row.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        let n_features = rows.first().map(Vec::len).unwrap_or(0);
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != n_features) {
            return Err(Error::InvalidArgument(format!(
                "row {i} has {} values, expected {n_features}",
                row.len()
            )));
        }
        let points = rows.into_iter().flatten().collect();
        Self::from_flat(points, n_features, labels, num_classes)
    }

    /// Builds a dataset from a row-major buffer of `labels.len() * n_features` values.
    pub fn from_flat(points: Vec<f64>, n_features: usize, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyData("a dataset needs at least one point".into()));
        }
        if n_features == 0 {
            return Err(Error::InvalidArgument("a dataset needs at least one feature".into()));
        }
        if points.len() != labels.len() * n_features {
            return Err(Error::InvalidArgument(format!(
                "{} values cannot form {} rows of {n_features} features",
                points.len(),
                labels.len()
            )));
        }
        if num_classes == 0 {
            return Err(Error::InvalidArgument("num_classes must be at least 1".into()));
        }
        if let Some(pos) = points.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite value at row {}, feature {}",
                pos / n_features,
                pos % n_features
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        let feature_names = (0..n_features).map(|j| format!("f{j}")).collect();
        Ok(Self {
            points,
            n_features,
            labels,
            num_classes,
            feature_names,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: names.len(),
            });
        }
        self.feature_names = names;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Always false: a dataset holds at least one point.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.n_features..(i + 1) * self.n_features]
    }

    /// Row-major feature buffer.
    pub fn points_flat(&self) -> &[f64] {
        &self.points
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = (&[f64], usize)> + '_ {
        self.points
            .chunks_exact(self.n_features)
            .zip(self.labels.iter().copied())
    }

    pub fn feature_column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().skip(j).step_by(self.n_features).copied()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyData("selection is empty".into()));
        }
        let mut points = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::InvalidArgument(format!(
                    "row index {i} out of range for {} rows",
                    self.len()
                )));
            }
            points.extend_from_slice(self.point(i));
            labels.push(self.labels[i]);
        }
        Ok(Self {
            points,
            n_features: self.n_features,
            labels,
            num_classes: self.num_classes,
            feature_names: self.feature_names.clone(),
        })
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn concat(&self, other: &LabeledDataset) -> Result<Self> {
        if other.n_features != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: other.n_features,
            });
        }
        let mut out = self.clone();
        out.points.extend_from_slice(&other.points);
        out.labels.extend_from_slice(&other.labels);
        out.num_classes = self.num_classes.max(other.num_classes);
        Ok(out)
    }

    /// Copy with every feature value replaced by `f(feature, value)`.
    pub(crate) fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> Self {
        let d = self.n_features;
        let points = self.points.iter().enumerate().map(|(k, &v)| f(k % d, v)).collect();
        Self { points, ..self.clone() }
    }

    /// Writes the dataset as CSV with a header and a trailing `label` column.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file).map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push("label");
        w.write_record(&header)?;
        for (row, label) in self.rows() {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(label.to_string());
            w.write_record(&record)?;
        }
        w.flush()
    }
}

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    /// Counted from the last column, which is 1.
    FromEnd(usize),
}

impl LabelColumn {
    /// A bare integer is read as a column index, `-k` as the k-th column from
    /// the end, anything else as a header name.
    pub fn parse(spec: &str) -> Self {
        let spec = spec.trim();
        if let Ok(i) = spec.parse::<usize>() {
            return LabelColumn::Index(i);
        }
        match spec.strip_prefix('-').and_then(|k| k.parse::<usize>().ok()) {
            Some(k) if k > 0 => LabelColumn::FromEnd(k),
            _ => LabelColumn::Name(spec.to_string()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    pub has_header: bool,
}

/// A dataset read from CSV together with its label vocabulary and any warnings.
#[derive(Debug, Clone)]
pub struct LoadedCsv {
    pub dataset: LabeledDataset,
    /// `label_names[k]` is the raw label text of class `k`.
    pub label_names: Vec<String>,
    pub warnings: Vec<String>,
}

/// Reads a labeled dataset from CSV.
///
/// Labels that are all non-negative integers keep their value as the class
/// index. Otherwise distinct label strings are numbered in order of first
/// appearance.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<LoadedCsv> {
    load_csv_with_labels(path, opts, &[])
}

/// Like [`load_csv`], but string labels are numbered starting from an existing
/// vocabulary so that two files agree on class indices.
pub fn load_csv_with_labels(path: impl AsRef<Path>, opts: &CsvOptions, known_labels: &[String]) -> Result<LoadedCsv> {
    let path = path.as_ref();
    let csv_err = |source: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .trim(csv::Trim::All)
        .from_reader(file);

    let header: Option<Vec<String>> = if opts.has_header {
        let h = reader.headers().map_err(csv_err)?;
        Some(h.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut points = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut n_columns = header.as_ref().map(Vec::len);
    let mut label_idx = None;

    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let row = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let n = *n_columns.get_or_insert(record.len());
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "{}: need at least one feature column besides the label",
                path.display()
            )));
        }
        let li = match label_idx {
            Some(i) => i,
            None => {
                let i = resolve_label_column(&opts.label_column, header.as_deref(), n)?;
                label_idx = Some(i);
                i
            }
        };
        for (c, cell) in record.iter().enumerate() {
            if c == li {
                raw_labels.push(cell.to_string());
                continue;
            }
            let value = cell
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::ParseCell {
                    row,
                    column: column_name(header.as_deref(), c),
                    value: cell.to_string(),
                })?;
            points.push(value);
        }
    }

    let (Some(n_columns), Some(label_idx)) = (n_columns, label_idx) else {
        return Err(Error::EmptyData(format!("{} has no data rows", path.display())));
    };

    let (labels, label_names) = factorize_labels(&raw_labels, known_labels);
    let mut warnings = Vec::new();
    let distinct = {
        let mut seen = vec![false; label_names.len()];
        labels.iter().for_each(|&l| seen[l] = true);
        seen.iter().filter(|&&s| s).count()
    };
    if distinct < 2 {
        warnings.push(format!(
            "{}: only {distinct} distinct label value(s) present",
            path.display()
        ));
    }
    if distinct < label_names.len() && known_labels.is_empty() {
        warnings.push(format!(
            "{}: {} of {} classes have no points",
            path.display(),
            label_names.len() - distinct,
            label_names.len()
        ));
    }

    let feature_names = match &header {
        Some(h) => h
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != label_idx)
            .map(|(_, name)| name.clone())
            .collect(),
        None => (0..n_columns - 1).map(|j| format!("f{j}")).collect(),
    };
    let dataset = LabeledDataset::from_flat(points, n_columns - 1, labels, label_names.len())?
        .with_feature_names(feature_names)?;
    Ok(LoadedCsv {
        dataset,
        label_names,
        warnings,
    })
}

fn resolve_label_column(spec: &LabelColumn, header: Option<&[String]>, n: usize) -> Result<usize> {
    let by_index = |i: usize| {
        if i < n {
            Ok(i)
        } else {
            Err(Error::InvalidArgument(format!(
                "label column index {i} out of range for {n} columns"
            )))
        }
    };
    match (spec, header) {
        (LabelColumn::Index(i), _) => by_index(*i),
        (LabelColumn::FromEnd(k), _) => match n.checked_sub(*k) {
            Some(i) => Ok(i),
            None => Err(Error::InvalidArgument(format!(
                "label column -{k} out of range for {n} columns"
            ))),
        },
        (LabelColumn::Name(name), Some(h)) => h
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::InvalidArgument(format!("no column named {name:?}"))),
        (LabelColumn::Name(name), None) => Err(Error::InvalidArgument(format!(
            "label column {name:?} given by name but the file has no header"
        ))),
    }
}

fn column_name(header: Option<&[String]>, c: usize) -> String {
    match header.and_then(|h| h.get(c)) {
        Some(name) => format!("{c} ({name})"),
        None => c.to_string(),
    }
}

fn factorize_labels(raw: &[String], known: &[String]) -> (Vec<usize>, Vec<String>) {
    let as_ints: Option<Vec<usize>> = known.iter().chain(raw).map(|s| s.parse::<usize>().ok()).collect();
    if let Some(ints) = as_ints {
        let labels = ints[known.len()..].to_vec();
        let max = ints.iter().copied().max().unwrap_or(0);
        let names = (0..=max).map(|k| k.to_string()).collect();
        return (labels, names);
    }
    let mut names: Vec<String> = known.to_vec();
    let mut index: HashMap<String, usize> = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let labels = raw
        .iter()
        .map(|s| {
            *index.entry(s.clone()).or_insert_with(|| {
                names.push(s.clone());
                names.len() - 1
            })
        })
        .collect();
    (labels, names)
}

/// Two noisy concentric circles: `ceil(n/2)` points of class 0 around the unit
/// circle and `floor(n/2)` points of class 1 around radius `inner_factor`.
pub fn generate_circles(n: usize, noise_sd: f64, inner_factor: f64, seed: u64) -> Result<LabeledDataset> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!("circles need n >= 4, got {n}")));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise_sd must be >= 0, got {noise_sd}")));
    }
    if !(inner_factor > 0.0 && inner_factor < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "inner_factor must lie in (0, 1), got {inner_factor}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd).expect("finite non-negative sd");
    let n_outer = n.div_ceil(2);
    let mut points = Vec::with_capacity(2 * n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let (radius, class) = if i < n_outer { (1.0, 0) } else { (inner_factor, 1) };
        let theta = rng.random::<f64>() * TAU;
        let (mut x, mut y) = (radius * theta.cos(), radius * theta.sin());
        if noise_sd > 0.0 {
            x += noise.sample(&mut rng);
            y += noise.sample(&mut rng);
        }
        points.extend([x, y]);
        labels.push(class);
    }
    LabeledDataset::from_flat(points, 2, labels, 2)
}

/// How to divide a dataset into train and test parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        Self {
            train_fraction,
            seed,
            stratified: false,
        }
    }

    pub fn stratified(mut self, on: bool) -> Self {
        self.stratified = on;
        self
    }
}

/// Seeded train/test partition. Both parts keep the original row order.
pub fn split(ds: &LabeledDataset, spec: &SplitSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    let f = spec.train_fraction;
    if !(f > 0.0 && f < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must lie in (0, 1), got {f}"
        )));
    }
    let n = ds.len();
    let n_train = (n as f64 * f).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(Error::InvalidArgument(format!(
            "train fraction {f} on {n} points leaves an empty train or test set"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut in_train = vec![false; n];
    if spec.stratified {
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.num_classes()];
        for (i, &l) in ds.labels().iter().enumerate() {
            by_class[l].push(i);
        }
        let quotas = largest_remainder(&by_class.iter().map(Vec::len).collect::<Vec<_>>(), f, n_train);
        for (members, quota) in by_class.iter_mut().zip(quotas) {
            members.shuffle(&mut rng);
            members[..quota].iter().for_each(|&i| in_train[i] = true);
        }
    } else {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        order[..n_train].iter().for_each(|&i| in_train[i] = true);
    }
    let (train, test): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| in_train[i]);
    Ok((ds.select(&train)?, ds.select(&test)?))
}

/// Per-group quotas summing to `total`, each near `size * fraction`.
fn largest_remainder(sizes: &[usize], fraction: f64, total: usize) -> Vec<usize> {
    let exact: Vec<f64> = sizes.iter().map(|&s| s as f64 * fraction).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut assigned: usize = quotas.iter().sum();
    for &k in order.iter().cycle().take(4 * sizes.len().max(1)) {
        if assigned >= total {
            break;
        }
        if quotas[k] < sizes[k] {
            quotas[k] += 1;
            assigned += 1;
        }
    }
    quotas
}

/// Uniform sample without replacement of `round(len * fraction)` rows, kept in
/// their original order.
pub fn sample_subset(ds: &LabeledDataset, fraction: f64, seed: u64) -> Result<LabeledDataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "subset fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let k = (ds.len() as f64 * fraction).round() as usize;
    if k == 0 {
        return Err(Error::EmptyData(format!(
            "fraction {fraction} of {} points selects nothing",
            ds.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = rand::seq::index::sample(&mut rng, ds.len(), k).into_vec();
    picked.sort_unstable();
    ds.select(&picked)
}

/// Per-feature `(min, max)` table fitted by [`minmax_scale`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleTable {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScaleTable {
    pub fn fit(ds: &LabeledDataset) -> Self {
        let d = ds.n_features();
        let mut min = vec![f64::INFINITY; d];
        let mut max = vec![f64::NEG_INFINITY; d];
        for (row, _) in ds.rows() {
            for j in 0..d {
                min[j] = min[j].min(row[j]);
                max[j] = max[j].max(row[j]);
            }
        }
        Self { min, max }
    }

    pub fn scale_value(&self, j: usize, v: f64) -> f64 {
        let span = self.max[j] - self.min[j];
        if span > 0.0 {
            (v - self.min[j]) / span
        } else {
            0.0
        }
    }

    /// Applies the fitted affine map; values outside the fitted range leave `[0, 1]`.
    pub fn apply(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        if ds.n_features() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                found: ds.n_features(),
            });
        }
        Ok(ds.map_values(|j, v| self.scale_value(j, v)))
    }
}

/// Maps each feature affinely onto `[0, 1]`; constant features become 0.
pub fn minmax_scale(ds: &LabeledDataset) -> (LabeledDataset, ScaleTable) {
    let table = ScaleTable::fit(ds);
    let scaled = ds.map_values(|j, v| table.scale_value(j, v));
    (scaled, table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    fn opts(label: &str, has_header: bool) -> CsvOptions {
        CsvOptions {
            label_column: LabelColumn::parse(label),
            has_header,
        }
    }

    #[test]
    fn load_small_csv() {
        let f = write_tmp("a,b,y\n0,1,0\n2,3,1\n4,5,0\n");
        let loaded = load_csv(f.path(), &opts("y", true)).unwrap();
        let ds = &loaded.dataset;
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.num_classes(), 2);
        assert_eq!(ds.labels(), &[0, 1, 0]);
        assert_eq!(ds.point(1), &[2.0, 3.0]);
        assert_eq!(ds.feature_names(), &["a".to_string(), "b".to_string()]);
        assert!(loaded.warnings.is_empty());
    }

    #[test]
    fn load_names_bad_cell() {
        let f = write_tmp("a,b,y\n0,1,0\n2,abc,1\n");
        match load_csv(f.path(), &opts("y", true)) {
            Err(Error::ParseCell { row, column, value }) => {
                assert_eq!(row, 3);
                assert!(column.contains('b'));
                assert_eq!(value, "abc");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_nan_and_empty() {
        let f = write_tmp("a,y\nNaN,0\n");
        assert!(matches!(
            load_csv(f.path(), &opts("y", true)),
            Err(Error::ParseCell { .. })
        ));
        let f = write_tmp("a,y\n");
        assert!(matches!(load_csv(f.path(), &opts("y", true)), Err(Error::EmptyData(_))));
        let f = write_tmp("");
        assert!(load_csv(f.path(), &opts("0", false)).is_err());
    }

    #[test]
    fn load_string_labels_first_appearance() {
        let f = write_tmp("1.0,cat\n2.0,dog\n3.0,cat\n4.0,bird\n");
        let loaded = load_csv(f.path(), &opts("1", false)).unwrap();
        assert_eq!(loaded.dataset.labels(), &[0, 1, 0, 2]);
        assert_eq!(loaded.label_names, vec!["cat", "dog", "bird"]);
        assert_eq!(loaded.dataset.feature_names(), &["f0".to_string()]);

        let g = write_tmp("5.0,bird\n6.0,fish\n");
        let again = load_csv_with_labels(g.path(), &opts("1", false), &loaded.label_names).unwrap();
        assert_eq!(again.dataset.labels(), &[2, 3]);
    }

    #[test]
    fn single_class_file_is_accepted_with_warning() {
        let f = write_tmp("x,y\n1,0\n2,0\n");
        let loaded = load_csv(f.path(), &opts("y", true)).unwrap();
        assert_eq!(loaded.dataset.num_classes(), 1);
        assert_eq!(loaded.warnings.len(), 1);
    }

    #[test]
    fn missing_label_column() {
        let f = write_tmp("x,y\n1,0\n");
        assert!(load_csv(f.path(), &opts("z", true)).is_err());
        assert!(load_csv(f.path(), &opts("z", false)).is_err());
        assert!(load_csv(f.path(), &opts("7", false)).is_err());
    }

    #[test]
    fn circles_shape_and_exact_radii() {
        let ds = generate_circles(200, 0.1, 0.5, 7).unwrap();
        assert_eq!((ds.len(), ds.n_features(), ds.num_classes()), (200, 2, 2));
        assert_eq!(ds.class_counts(), vec![100, 100]);

        let exact = generate_circles(5, 0.0, 0.5, 3).unwrap();
        assert_eq!(exact.class_counts(), vec![3, 2]);
        for (p, l) in exact.rows() {
            let r = p[0].hypot(p[1]);
            let want = if l == 0 { 1.0 } else { 0.5 };
            assert!((r - want).abs() < 1e-12);
        }
    }

    #[test]
    fn circles_deterministic_and_validated() {
        let a = generate_circles(50, 0.1, 0.5, 11).unwrap();
        let b = generate_circles(50, 0.1, 0.5, 11).unwrap();
        assert_eq!(a, b);
        assert!(generate_circles(3, 0.1, 0.5, 0).is_err());
        assert!(generate_circles(10, -0.1, 0.5, 0).is_err());
        assert!(generate_circles(10, 0.1, 1.0, 0).is_err());
    }

    #[test]
    fn split_sizes_and_errors() {
        let ds = generate_circles(200, 0.1, 0.5, 1).unwrap();
        let (train, test) = split(&ds, &SplitSpec::new(0.75, 9)).unwrap();
        assert_eq!((train.len(), test.len()), (150, 50));
        let (train, test) = split(&ds, &SplitSpec::new(0.75, 9).stratified(true)).unwrap();
        assert_eq!((train.len(), test.len()), (150, 50));
        assert_eq!(train.class_counts(), vec![75, 75]);

        let tiny = generate_circles(4, 0.1, 0.5, 1).unwrap();
        assert!(split(&tiny, &SplitSpec::new(0.1, 0)).is_err());
        assert!(split(&tiny, &SplitSpec::new(0.95, 0)).is_err());
        assert!(split(&ds, &SplitSpec::new(1.0, 0)).is_err());
    }

    #[test]
    fn stratified_split_keeps_class_mix() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
        let labels: Vec<usize> = (0..100).map(|i| usize::from(i >= 60)).collect();
        let ds = LabeledDataset::new(rows, labels, 2).unwrap();
        for seed in 0..5 {
            let (train, _) = split(&ds, &SplitSpec::new(0.75, seed).stratified(true)).unwrap();
            let counts = train.class_counts();
            assert_eq!(train.len(), 75);
            assert!(counts[0].abs_diff(45) <= 1 && counts[1].abs_diff(30) <= 1, "{counts:?}");
        }
    }

    #[test]
    fn subset_sizes() {
        let ds = generate_circles(150, 0.1, 0.5, 2).unwrap();
        assert_eq!(sample_subset(&ds, 0.4, 1).unwrap().len(), 60);
        let all = sample_subset(&ds, 1.0, 1).unwrap();
        assert_eq!(all, ds);
        assert!(sample_subset(&ds, 0.001, 1).is_err());
        assert!(sample_subset(&ds, 0.0, 1).is_err());
        assert!(sample_subset(&ds, 1.5, 1).is_err());
    }

    #[test]
    fn subsets_from_different_seeds_differ() {
        let ds = generate_circles(150, 0.1, 0.5, 2).unwrap();
        let a = sample_subset(&ds, 0.4, 1).unwrap();
        let b = sample_subset(&ds, 0.4, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn minmax_examples() {
        let ds = LabeledDataset::new(vec![vec![0.0, 3.0], vec![5.0, 3.0], vec![10.0, 3.0]], vec![0, 1, 0], 2).unwrap();
        let (scaled, table) = minmax_scale(&ds);
        assert_eq!(scaled.feature_column(0).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert_eq!(scaled.feature_column(1).collect::<Vec<_>>(), vec![0.0, 0.0, 0.0]);
        assert_eq!(table.scale_value(0, 12.0), 1.2);
        let other = LabeledDataset::new(vec![vec![1.0]], vec![0], 2).unwrap();
        assert!(table.apply(&other).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(LabeledDataset::new(vec![], vec![], 2).is_err());
        assert!(LabeledDataset::new(vec![vec![1.0], vec![1.0, 2.0]], vec![0, 1], 2).is_err());
        assert!(LabeledDataset::new(vec![vec![f64::NAN]], vec![0], 2).is_err());
        assert!(LabeledDataset::new(vec![vec![1.0]], vec![2], 2).is_err());
        assert!(LabeledDataset::new(vec![vec![1.0]], vec![0], 1).is_ok());
    }

    #[test]
    fn csv_write_then_read() {
        let ds = generate_circles(20, 0.1, 0.5, 4).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        ds.write_csv(f.path()).unwrap();
        let back = load_csv(f.path(), &opts("label", true)).unwrap().dataset;
        assert_eq!(back, ds);
    }
}
