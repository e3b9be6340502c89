//! Reference implementations used as test oracles. Each one follows the
//! definition directly and shares no code with the library.

#![allow(dead_code)]

use reprtree::dataset::LabeledDataset;

/// Largest over points of `x` of the distance to the nearest same-label point
/// of `xt`, by a plain double loop.
pub fn brute_epsilon(x: &LabeledDataset, xt: &LabeledDataset) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        let mut best = f64::INFINITY;
        for r in 0..xt.len() {
            if xt.label(r) != x.label(i) {
                continue;
            }
            let mut d = 0.0_f64;
            for (a, b) in x.point(i).iter().zip(xt.point(r)) {
                let g = (a - b).abs();
                if g > d {
                    d = g;
                }
            }
            if d < best {
                best = d;
            }
        }
        if best > worst {
            worst = best;
        }
    }
    worst
}

/// Mean absolute position difference, positions found by linear search.
pub fn direct_rank_distance(a: &[usize], b: &[usize]) -> f64 {
    let mut total = 0usize;
    for f in 0..a.len() {
        let pa = a.iter().position(|&v| v == f).unwrap();
        let pb = b.iter().position(|&v| v == f).unwrap();
        total += pa.abs_diff(pb);
    }
    total as f64 / a.len() as f64
}

/// Twice the fractional rank of every value, by counting.
pub fn doubled_ranks(v: &[f64]) -> Vec<i128> {
    v.iter()
        .map(|&x| {
            let less = v.iter().filter(|&&y| y < x).count() as i128;
            let equal = v.iter().filter(|&&y| y == x).count() as i128;
            2 * less + equal + 1
        })
        .collect()
}

/// Numerator and both variance terms of the rank correlation, all exact.
pub fn rank_moments(a: &[i128], b: &[i128]) -> (i128, i128, i128) {
    let n = a.len() as i128;
    let (sa, sb): (i128, i128) = (a.iter().sum(), b.iter().sum());
    let sab: i128 = a.iter().zip(b).map(|(p, q)| p * q).sum();
    let saa: i128 = a.iter().map(|p| p * p).sum();
    let sbb: i128 = b.iter().map(|q| q * q).sum();
    (n * sab - sa * sb, n * saa - sa * sa, n * sbb - sb * sb)
}

/// Spearman's rho from exact integer moments, rounded once at the end.
pub fn reference_spearman(x: &[f64], y: &[f64]) -> f64 {
    let (num, vx, vy) = rank_moments(&doubled_ranks(x), &doubled_ranks(y));
    num as f64 / ((vx as f64) * (vy as f64)).sqrt()
}

/// Two-sided permutation p-value by enumerating every arrangement of `y`.
pub fn enumerated_permutation_p(x: &[f64], y: &[f64]) -> f64 {
    let a = doubled_ranks(x);
    let b = doubled_ranks(y);
    let observed = rank_moments(&a, &b).0.abs();
    let mut perm: Vec<i128> = b.clone();
    let n = perm.len();
    let (mut hits, mut total) = (0u64, 0u64);
    // Heap's algorithm
    let mut c = vec![0usize; n];
    let mut visit = |p: &[i128]| {
        total += 1;
        if rank_moments(&a, p).0.abs() >= observed {
            hits += 1;
        }
    };
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    hits as f64 / total as f64
}

/// `Γ((ν + 1)/2) / (√(νπ) Γ(ν/2))` for whole `ν`, by the half-step recurrence.
fn t_density_constant(nu: u32) -> f64 {
    let pi = std::f64::consts::PI;
    // ratio(ν) = Γ((ν+1)/2)/Γ(ν/2); ratio(1) = 1/√π, ratio(2) = √π/2,
    // ratio(ν + 2) = ratio(ν) · (ν + 1)/ν
    let mut ratio = if nu % 2 == 1 { 1.0 / pi.sqrt() } else { pi.sqrt() / 2.0 };
    let mut k = if nu % 2 == 1 { 1 } else { 2 };
    while k < nu {
        ratio *= (k as f64 + 1.0) / k as f64;
        k += 2;
    }
    ratio / (nu as f64 * pi).sqrt()
}

/// `P(|T| ≥ |t|)` for Student's t by composite Simpson integration of the density.
pub fn simpson_t_tail(t: f64, nu: u32) -> f64 {
    let c = t_density_constant(nu);
    let nu_f = nu as f64;
    let f = |s: f64| c * (1.0 + s * s / nu_f).powf(-(nu_f + 1.0) / 2.0);
    let upper = t.abs();
    let steps = 20_000;
    let h = upper / steps as f64;
    let mut acc = f(0.0) + f(upper);
    for k in 1..steps {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(k as f64 * h);
    }
    1.0 - 2.0 * acc * h / 3.0
}

/// Points sitting on a coarse lattice so that ties and equal distances are common.
pub fn lattice_dataset(rows: Vec<Vec<i32>>, labels: Vec<usize>, classes: usize) -> LabeledDataset {
    let rows = rows
        .into_iter()
        .map(|r| r.into_iter().map(|v| v as f64 * 0.25).collect())
        .collect();
    LabeledDataset::new(rows, labels, classes).unwrap()
}
