//! Prediction rasters over a planar box.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::Classifier;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub x1: f64,
    pub x2: f64,
    pub class: usize,
}

fn axis(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    let last = (resolution - 1) as f64;
    (0..resolution)
        .map(|i| {
            if i + 1 == resolution {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last
            }
        })
        .collect()
}

/// Predictions on a `resolution × resolution` grid spanning `bounds`, both
/// ends included. Rows run over `x1` fastest, then `x2`.
pub fn boundary_grid(model: &dyn Classifier, bounds: [(f64, f64); 2], resolution: usize) -> Result<Vec<GridRow>> {
    if model.n_features() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: model.n_features(),
        });
    }
    if resolution < 2 {
        return Err(Error::InvalidArgument(format!(
            "resolution must be at least 2, got {resolution}"
        )));
    }
    if let Some((lo, hi)) = bounds
        .iter()
        .find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi))
    {
        return Err(Error::InvalidArgument(format!("bad bounds ({lo}, {hi})")));
    }
    let xs = axis(bounds[0].0, bounds[0].1, resolution);
    let ys = axis(bounds[1].0, bounds[1].1, resolution);
    let mut rows = Vec::with_capacity(resolution * resolution);
    for &x2 in &ys {
        for &x1 in &xs {
            rows.push(GridRow {
                x1,
                x2,
                class: model.classify(&[x1, x2])?,
            });
        }
    }
    Ok(rows)
}

pub fn write_boundary_csv<W: Write>(rows: &[GridRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let csv_err = |e: csv::Error| Error::Model(format!("writing grid: {e}"));
    w.write_record(["x1", "x2", "class"]).map_err(csv_err)?;
    for r in rows {
        w.write_record([r.x1.to_string(), r.x2.to_string(), r.class.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Model(format!("writing grid: {e}")))
}

/// Writes the grid to `path` as `x1,x2,class` rows and returns the row count.
pub fn export_boundary_grid(
    model: &dyn Classifier,
    bounds: [(f64, f64); 2],
    resolution: usize,
    path: impl AsRef<Path>,
) -> Result<usize> {
    let rows = boundary_grid(model, bounds, resolution)?;
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_boundary_csv(&rows, BufWriter::new(file))?;
    Ok(rows.len())
}

/// Bounding box of a planar dataset widened by `pad` times its extent on each side.
pub fn padded_bounds(ds: &LabeledDataset, pad: f64) -> Result<[(f64, f64); 2]> {
    if ds.n_features() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: ds.n_features(),
        });
    }
    if ds.is_empty() {
        return Err(Error::EmptyData("no points to bound".into()));
    }
    let mut out = [(0.0, 0.0); 2];
    for (j, b) in out.iter_mut().enumerate() {
        let (lo, hi) = ds
            .feature_column(j)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let extra = (hi - lo) * pad;
        *b = (lo - extra, hi + extra);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cart::{DecisionTree, TrainConfig};

    fn planar(rows: &[[f64; 2]], labels: &[usize]) -> LabeledDataset {
        LabeledDataset::new(rows.iter().map(|r| r.to_vec()).collect(), labels.to_vec(), 2).unwrap()
    }

    #[test]
    fn corners_at_resolution_two() {
        let ds = planar(&[[0.0, 0.0], [1.0, 1.0]], &[0, 0]);
        let tree = DecisionTree::fit(&ds, &TrainConfig::default()).unwrap();
        let rows = boundary_grid(&tree, [(0.0, 1.0), (0.0, 1.0)], 2).unwrap();
        let corners: Vec<(f64, f64)> = rows.iter().map(|r| (r.x1, r.x2)).collect();
        assert_eq!(corners, vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]);
        // single leaf
        assert!(rows.iter().all(|r| r.class == 0));
    }

    #[test]
    fn halves_follow_the_split() {
        let ds = planar(&[[0.25, 0.5], [0.75, 0.5]], &[0, 1]);
        let tree = DecisionTree::fit(&ds, &TrainConfig::default()).unwrap();
        assert_eq!(tree.node(1).split().unwrap().threshold, 0.5);
        let rows = boundary_grid(&tree, [(0.0, 1.0), (0.0, 1.0)], 11).unwrap();
        assert_eq!(rows.len(), 121);
        for r in rows {
            assert_eq!(r.class, usize::from(r.x1 >= 0.5), "{r:?}");
        }
    }

    #[test]
    fn rejects_bad_input() {
        let ds = LabeledDataset::new(vec![vec![0.0], vec![1.0]], vec![0, 1], 2).unwrap();
        let tree = DecisionTree::fit(&ds, &TrainConfig::default()).unwrap();
        assert!(matches!(
            boundary_grid(&tree, [(0.0, 1.0), (0.0, 1.0)], 3),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(padded_bounds(&ds, 0.1).is_err());
        let ds = planar(&[[0.0, 0.0], [1.0, 1.0]], &[0, 1]);
        let tree = DecisionTree::fit(&ds, &TrainConfig::default()).unwrap();
        assert!(boundary_grid(&tree, [(0.0, 1.0), (0.0, 1.0)], 1).is_err());
        assert!(boundary_grid(&tree, [(1.0, 0.0), (0.0, 1.0)], 4).is_err());
    }

    #[test]
    fn csv_layout() {
        let rows = [GridRow {
            x1: 0.5,
            x2: 1.0,
            class: 1,
        }];
        let mut buf = Vec::new();
        write_boundary_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "x1,x2,class\n0.5,1,1\n");
    }
}
