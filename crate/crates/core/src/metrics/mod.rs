//! Feature-importance orderings, the mean absolute rank difference between
//! two orderings, and Spearman correlation with its significance.

pub mod special;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Features sorted by decreasing importance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportanceRanking {
    /// Feature indices, most important first. Ties keep the lower index first.
    pub order: Vec<usize>,
    /// 1-based position of each feature in `order`.
    pub position_of: Vec<usize>,
}

impl ImportanceRanking {
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let mut position_of = vec![0; order.len()];
        for (pos, &f) in order.iter().enumerate() {
            if f >= order.len() || position_of[f] != 0 {
                return Err(Error::InvalidArgument(format!("{order:?} is not a permutation")));
            }
            position_of[f] = pos + 1;
        }
        Ok(Self { order, position_of })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}

pub fn rank_features(importances: &[f64]) -> ImportanceRanking {
    let mut order: Vec<usize> = (0..importances.len()).collect();
    order.sort_by(|&a, &b| importances[b].total_cmp(&importances[a]));
    ImportanceRanking::from_order(order).expect("sorted indices form a permutation")
}

/// Mean over features of `|pos_a(j) − pos_b(j)|`.
pub fn rank_distance(a: &ImportanceRanking, b: &ImportanceRanking) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let total: usize = a
        .position_of
        .iter()
        .zip(&b.position_of)
        .map(|(&p, &q)| p.abs_diff(q))
        .sum();
    Ok(total as f64 / a.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub rho: f64,
    /// Two-sided p-value from the t approximation.
    pub p_value: f64,
    pub n: usize,
}

/// 1-based ranks, tied values sharing the mean of their positions.
pub fn fractional_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let mean = (start + 1 + end) as f64 / 2.0;
        order[start..end].iter().for_each(|&i| ranks[i] = mean);
        start = end;
    }
    ranks
}

fn check_pair(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 3 pairs, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("correlation inputs must be finite".into()));
    }
    Ok(())
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("an input is constant".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho (Pearson correlation of fractional ranks) with a two-sided
/// p-value from `t = rho √((n − 2)/(1 − rho²))` on `n − 2` degrees of freedom.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    check_pair(x, y)?;
    let rho = pearson(&fractional_ranks(x), &fractional_ranks(y))?;
    Ok(CorrelationResult {
        rho,
        p_value: spearman_p_value(rho, x.len()),
        n: x.len(),
    })
}

/// Two-sided t-approximation p-value for a rank correlation `rho` over `n` pairs.
pub fn spearman_p_value(rho: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    if df <= 0.0 {
        return 1.0;
    }
    let denom = 1.0 - rho * rho;
    if denom <= 0.0 {
        return 0.0;
    }
    special::student_t_two_sided(rho * (df / denom).sqrt(), df)
}

/// Largest sample for which [`permutation_p_value`] is available.
pub const MAX_EXACT_N: usize = 10;

/// Exact two-sided permutation p-value of Spearman's rho: the fraction of the
/// `n!` rearrangements of `y` whose |rho| is at least the observed one.
///
/// Doubled ranks are integers, so the statistic is accumulated exactly by a
/// dynamic program over subsets of assigned positions.
pub fn permutation_p_value(x: &[f64], y: &[f64]) -> Result<f64> {
    check_pair(x, y)?;
    let n = x.len();
    if n > MAX_EXACT_N {
        return Err(Error::InvalidArgument(format!(
            "exact permutation p-value supports n <= {MAX_EXACT_N}, got {n}"
        )));
    }
    let doubled = |v: &[f64]| -> Vec<i64> { fractional_ranks(v).iter().map(|r| (2.0 * r).round() as i64).collect() };
    let (a, b) = (doubled(x), doubled(y));
    let (sa, sb): (i64, i64) = (a.iter().sum(), b.iter().sum());
    let n_i = n as i64;
    // n·Σ a_i b_π(i) − Σa·Σb is proportional to rho with a fixed positive factor.
    let centered = |s: i64| (n_i * s - sa * sb).abs();
    if a.iter().all(|&v| v == a[0]) || b.iter().all(|&v| v == b[0]) {
        return Err(Error::UndefinedCorrelation("an input is constant".into()));
    }
    let observed = centered(a.iter().zip(&b).map(|(p, q)| p * q).sum());

    let full = (1usize << n) - 1;
    let mut layers: Vec<HashMap<i64, u64>> = vec![HashMap::new(); full + 1];
    layers[0].insert(0, 1);
    for mask in 0..full {
        if layers[mask].is_empty() {
            continue;
        }
        let k = mask.count_ones() as usize;
        let current = std::mem::take(&mut layers[mask]);
        for (j, &bj) in b.iter().enumerate() {
            if mask & (1 << j) != 0 {
                continue;
            }
            let next = &mut layers[mask | (1 << j)];
            for (&s, &count) in &current {
                *next.entry(s + a[k] * bj).or_insert(0) += count;
            }
        }
    }
    let (mut extreme, mut total) = (0u64, 0u64);
    for (&s, &count) in &layers[full] {
        total += count;
        if centered(s) >= observed {
            extreme += count;
        }
    }
    Ok(extreme as f64 / total as f64)
}
