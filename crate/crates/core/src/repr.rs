//! Epsilon-representativeness between labeled datasets.
//!
//! A point `x̃` represents `x` within `eps` when both carry the same label and
//! `‖x̃ − x‖∞ ≤ eps`. A dataset `X̃` is an `eps`-representative of `X` when
//! every point of `X` has such a representative. [`epsilon_of`] reports the
//! smallest such `eps` (a directed, label-aware Hausdorff distance under the
//! Chebyshev norm) together with the nearest-representative assignment.
//!
//! An assignment is gamma-balanced when every point of `X` has exactly one
//! representative and every point of `X̃` represents exactly `gamma` points.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// L∞ distance.
#[inline]
pub fn chebyshev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0_f64, |acc, (x, y)| acc.max((x - y).abs()))
}

/// L∞ distance, or `None` as soon as it is known to exceed `bound`.
#[inline]
fn chebyshev_within(a: &[f64], b: &[f64], bound: f64) -> Option<f64> {
    let mut d = 0.0_f64;
    for (ca, cb) in a.chunks(8).zip(b.chunks(8)) {
        d = d.max(chebyshev(ca, cb));
        if d > bound {
            return None;
        }
    }
    Some(d)
}

/// Mapping from each point of `X` to its representative in `X̃`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReprAssignment {
    /// `rep_of[i]` indexes the representative of `X[i]` in `X̃`.
    pub rep_of: Vec<Option<usize>>,
    /// Largest distance from a point to its representative; `+inf` when some
    /// point has none.
    pub epsilon: f64,
    /// Common representation count when the assignment is balanced.
    pub gamma: Option<usize>,
    pub per_rep_counts: Vec<usize>,
    /// Classes of `X` with no point in `X̃`.
    pub uncovered_classes: Vec<usize>,
}

impl ReprAssignment {
    /// Assignment given explicitly as `rep_of[i]` for every point of `x`.
    ///
    /// Fails if an index is out of range or pairs points of different labels.
    pub fn from_mapping(x: &LabeledDataset, xt: &LabeledDataset, rep_of: Vec<usize>) -> Result<Self> {
        check_dims(x, xt)?;
        if rep_of.len() != x.len() {
            return Err(Error::InvalidArgument(format!(
                "mapping has {} entries for {} points",
                rep_of.len(),
                x.len()
            )));
        }
        let mut epsilon = 0.0_f64;
        for (i, &r) in rep_of.iter().enumerate() {
            if r >= xt.len() {
                return Err(Error::InvalidArgument(format!(
                    "representative {r} out of range for {} points",
                    xt.len()
                )));
            }
            if x.label(i) != xt.label(r) {
                return Err(Error::InvalidArgument(format!(
                    "point {i} (class {}) mapped to representative {r} of class {}",
                    x.label(i),
                    xt.label(r)
                )));
            }
            epsilon = epsilon.max(chebyshev(x.point(i), xt.point(r)));
        }
        Ok(Self::assemble(
            rep_of.into_iter().map(Some).collect(),
            epsilon,
            xt.len(),
            Vec::new(),
        ))
    }

    /// Identity assignment between a dataset and an equally sized copy.
    pub fn identity(x: &LabeledDataset, xt: &LabeledDataset) -> Result<Self> {
        Self::from_mapping(x, xt, (0..x.len()).collect())
    }

    fn assemble(rep_of: Vec<Option<usize>>, epsilon: f64, n_reps: usize, uncovered_classes: Vec<usize>) -> Self {
        let mut per_rep_counts = vec![0; n_reps];
        rep_of.iter().flatten().for_each(|&r| per_rep_counts[r] += 1);
        let all_assigned = rep_of.iter().all(Option::is_some);
        let gamma = match per_rep_counts.first() {
            Some(&g) if all_assigned && per_rep_counts.iter().all(|&c| c == g) => Some(g),
            _ => None,
        };
        Self {
            rep_of,
            epsilon,
            gamma,
            per_rep_counts,
            uncovered_classes,
        }
    }

    pub fn is_covering(&self) -> bool {
        self.epsilon.is_finite()
    }
}

fn check_dims(x: &LabeledDataset, xt: &LabeledDataset) -> Result<()> {
    if x.n_features() != xt.n_features() {
        return Err(Error::DimensionMismatch {
            expected: x.n_features(),
            found: xt.n_features(),
        });
    }
    Ok(())
}

fn uncovered(x: &LabeledDataset, xt: &LabeledDataset) -> Vec<usize> {
    let mut present = vec![false; x.num_classes().max(xt.num_classes())];
    xt.labels().iter().for_each(|&l| present[l] = true);
    let mut missing: Vec<usize> = x.labels().iter().copied().filter(|&l| !present[l]).collect();
    missing.sort_unstable();
    missing.dedup();
    missing
}

/// Nearest same-class representative of every point in `x`, by exhaustive scan.
///
/// Ties go to the lowest index in `xt`. This is the reference for
/// [`epsilon_of`], which returns bit-identical results faster.
pub fn epsilon_of_exhaustive(x: &LabeledDataset, xt: &LabeledDataset) -> Result<ReprAssignment> {
    check_dims(x, xt)?;
    let nearest: Vec<Option<(usize, f64)>> = (0..x.len())
        .into_par_iter()
        .map(|i| {
            let p = x.point(i);
            let mut best: Option<(usize, f64)> = None;
            for r in 0..xt.len() {
                if xt.label(r) != x.label(i) {
                    continue;
                }
                let d = chebyshev(p, xt.point(r));
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((r, d));
                }
            }
            best
        })
        .collect();
    Ok(finish(x, xt, nearest))
}

/// Smallest `eps` for which `xt` is an `eps`-representative of `x`, with the
/// nearest-representative assignment.
///
/// Candidates of each class are sorted along the feature of widest spread and
/// searched outward from the query, stopping once the gap on that feature
/// alone exceeds the best distance found. Ties go to the lowest index in `xt`.
/// When a class of `x` is missing from `xt`, its points get no representative
/// and `epsilon` is `+inf`.
pub fn epsilon_of(x: &LabeledDataset, xt: &LabeledDataset) -> Result<ReprAssignment> {
    check_dims(x, xt)?;
    let index = SortedIndex::build(xt);
    let nearest: Vec<Option<(usize, f64)>> = (0..x.len())
        .into_par_iter()
        .map(|i| index.nearest(x.point(i), x.label(i)))
        .collect();
    Ok(finish(x, xt, nearest))
}

fn finish(x: &LabeledDataset, xt: &LabeledDataset, nearest: Vec<Option<(usize, f64)>>) -> ReprAssignment {
    let epsilon = nearest.iter().fold(0.0_f64, |acc, n| match n {
        Some((_, d)) => acc.max(*d),
        None => f64::INFINITY,
    });
    let rep_of = nearest.into_iter().map(|n| n.map(|(r, _)| r)).collect();
    ReprAssignment::assemble(rep_of, epsilon, xt.len(), uncovered(x, xt))
}

/// Per-class candidate lists sorted along one axis.
struct SortedIndex<'a> {
    xt: &'a LabeledDataset,
    axis: usize,
    /// `(axis value, index)` per class, sorted by value then index.
    classes: Vec<Vec<(f64, usize)>>,
}

impl<'a> SortedIndex<'a> {
    fn build(xt: &'a LabeledDataset) -> Self {
        let axis = (0..xt.n_features())
            .map(|j| {
                let (lo, hi) = xt
                    .feature_column(j)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                (j, hi - lo)
            })
            .fold(
                (0, f64::NEG_INFINITY),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            )
            .0;
        let mut classes: Vec<Vec<(f64, usize)>> = Vec::new();
        for (r, (p, l)) in xt.rows().enumerate() {
            if classes.len() <= l {
                classes.resize_with(l + 1, Vec::new);
            }
            classes[l].push((p[axis], r));
        }
        for c in &mut classes {
            c.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        }
        Self { xt, axis, classes }
    }

    fn nearest(&self, p: &[f64], label: usize) -> Option<(usize, f64)> {
        let cands = self.classes.get(label).filter(|c| !c.is_empty())?;
        let q = p[self.axis];
        let start = cands.partition_point(|&(v, _)| v < q);
        let mut best: Option<(usize, f64)> = None;
        let consider = |r: usize, best: &mut Option<(usize, f64)>| {
            let bound = best.map_or(f64::INFINITY, |(_, d)| d);
            let Some(d) = chebyshev_within(p, self.xt.point(r), bound) else {
                return;
            };
            let better = match *best {
                None => true,
                Some((br, bd)) => d < bd || (d == bd && r < br),
            };
            if better {
                *best = Some((r, d));
            }
        };
        let (mut up, mut down) = (start, start);
        loop {
            let bound = best.map_or(f64::INFINITY, |(_, d)| d);
            let gap_up = cands.get(up).map(|&(v, _)| (v - q).abs());
            let gap_down = down.checked_sub(1).map(|k| (cands[k].0 - q).abs());
            // Gaps grow monotonically away from `start`; a candidate whose gap
            // alone exceeds the bound cannot tie or win.
            let next_up = gap_up.filter(|&g| g <= bound);
            let next_down = gap_down.filter(|&g| g <= bound);
            match (next_up, next_down) {
                (None, None) => break,
                (Some(gu), Some(gd)) if gd < gu => {
                    down -= 1;
                    consider(cands[down].1, &mut best);
                }
                (Some(_), _) => {
                    consider(cands[up].1, &mut best);
                    up += 1;
                }
                (None, Some(_)) => {
                    down -= 1;
                    consider(cands[down].1, &mut best);
                }
            }
        }
        best
    }
}

/// Outcome of [`is_gamma_balanced`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceCheck {
    pub balanced: bool,
    pub gamma: Option<usize>,
    /// Points of `X` without a representative.
    pub unassigned: Vec<usize>,
    /// Representatives whose count breaks the common value.
    pub offenders: Vec<usize>,
}

/// Checks that every point has a representative and every representative
/// covers the same number of points.
///
/// When counts disagree, representatives off the unique most frequent count
/// are reported; if no count is uniquely most frequent, all are reported.
pub fn is_gamma_balanced(assignment: &ReprAssignment) -> BalanceCheck {
    let unassigned: Vec<usize> = assignment
        .rep_of
        .iter()
        .enumerate()
        .filter(|(_, r)| r.is_none())
        .map(|(i, _)| i)
        .collect();
    let counts = &assignment.per_rep_counts;
    let mut freq: Vec<(usize, usize)> = Vec::new();
    for &c in counts {
        match freq.iter_mut().find(|(v, _)| *v == c) {
            Some(entry) => entry.1 += 1,
            None => freq.push((c, 1)),
        }
    }
    freq.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let offenders: Vec<usize> = match freq.as_slice() {
        [] | [_] => Vec::new(),
        [(top, n_top), (_, n_next), ..] => {
            if n_top > n_next {
                (0..counts.len()).filter(|&r| counts[r] != *top).collect()
            } else {
                (0..counts.len()).collect()
            }
        }
    };
    let uniform = freq.len() == 1 && freq[0].0 > 0;
    let balanced = uniform && unassigned.is_empty();
    BalanceCheck {
        balanced,
        gamma: balanced.then(|| freq[0].0),
        unassigned,
        offenders,
    }
}

/// Builds a subset `X̃ ⊆ X` together with an exactly gamma-balanced assignment.
///
/// Within each class, groups are grown farthest-first: the next seed is the
/// unassigned point farthest from all previous seeds (the first is random),
/// and it is grouped with its `gamma − 1` nearest unassigned neighbours. Each
/// group is represented by its 1-center medoid. The returned assignment's
/// `epsilon` is the realized covering radius of those groups, not the
/// nearest-representative value.
pub fn construct_balanced_subset(
    x: &LabeledDataset,
    gamma: usize,
    seed: u64,
) -> Result<(LabeledDataset, ReprAssignment)> {
    if gamma == 0 {
        return Err(Error::InvalidArgument("gamma must be at least 1".into()));
    }
    let counts = x.class_counts();
    if let Some((class, &count)) = counts.iter().enumerate().find(|(_, &c)| c % gamma != 0) {
        return Err(Error::NotDivisible {
            class,
            count,
            gamma,
            remainder: count % gamma,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // (representative index in X, members)
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for class in 0..x.num_classes() {
        let members: Vec<usize> = (0..x.len()).filter(|&i| x.label(i) == class).collect();
        if members.is_empty() {
            continue;
        }
        let mut assigned = vec![false; members.len()];
        // distance from each member to the nearest seed so far
        let mut seed_dist = vec![f64::INFINITY; members.len()];
        let mut remaining = members.len();
        let mut first = true;
        while remaining > 0 {
            let s = if first {
                first = false;
                rng.random_range(0..members.len())
            } else {
                (0..members.len())
                    .filter(|&k| !assigned[k])
                    .fold(None, |best: Option<usize>, k| match best {
                        Some(b) if seed_dist[b] >= seed_dist[k] => Some(b),
                        _ => Some(k),
                    })
                    .expect("remaining > 0")
            };
            let sp = x.point(members[s]);
            for k in 0..members.len() {
                seed_dist[k] = seed_dist[k].min(chebyshev(sp, x.point(members[k])));
            }
            let mut near: Vec<(f64, usize)> = (0..members.len())
                .filter(|&k| !assigned[k] && k != s)
                .map(|k| (chebyshev(sp, x.point(members[k])), k))
                .collect();
            near.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let mut group: Vec<usize> = std::iter::once(s)
                .chain(near.into_iter().take(gamma - 1).map(|(_, k)| k))
                .collect();
            group.iter().for_each(|&k| assigned[k] = true);
            remaining -= group.len();
            group.sort_unstable();
            let group: Vec<usize> = group.into_iter().map(|k| members[k]).collect();
            let medoid = one_center(x, &group);
            groups.push((medoid, group));
        }
    }
    groups.sort_by_key(|g| g.0);
    let rep_indices: Vec<usize> = groups.iter().map(|g| g.0).collect();
    let xt = x.select(&rep_indices)?;
    let mut rep_of = vec![0; x.len()];
    for (t, (_, group)) in groups.iter().enumerate() {
        group.iter().for_each(|&i| rep_of[i] = t);
    }
    let assignment = ReprAssignment::from_mapping(x, &xt, rep_of)?;
    Ok((xt, assignment))
}

/// Group member minimizing the largest distance to the other members.
fn one_center(x: &LabeledDataset, group: &[usize]) -> usize {
    let radius = |c: usize| {
        group
            .iter()
            .map(|&m| chebyshev(x.point(c), x.point(m)))
            .fold(0.0_f64, f64::max)
    };
    group
        .iter()
        .map(|&c| (radius(c), c))
        .fold(None, |best: Option<(f64, usize)>, cur| match best {
            Some(b) if b.0 <= cur.0 => Some(b),
            _ => Some(cur),
        })
        .expect("groups are non-empty")
        .1
}

/// Copy of `x` with every coordinate moved by independent uniform noise in
/// `(−radius, radius)`. Labels are unchanged, so the identity assignment is
/// 1-balanced with realized epsilon below `radius`.
pub fn perturbed_copy(x: &LabeledDataset, radius: f64, seed: u64) -> Result<LabeledDataset> {
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "radius must be finite and >= 0, got {radius}"
        )));
    }
    if radius == 0.0 {
        return Ok(x.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(x.map_values(|_, v| {
        let u: f64 = rng.sample(Open01);
        v + (2.0 * u - 1.0) * radius
    }))
}
