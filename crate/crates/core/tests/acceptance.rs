//! Acceptance suite. Prints one line per criterion and exits non-zero when
//! any criterion fails. The collision criterion runs only when
//! `REPRTREE_COLLISION_CSV` names the data file; its label column is taken
//! from `REPRTREE_COLLISION_LABEL` (default: last column).

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use common::{brute_epsilon, direct_rank_distance, enumerated_permutation_p, reference_spearman};
use reprtree::boost::{BoostConfig, BoostedEnsemble};
use reprtree::cart::{entropy, gini, DecisionTree, Impurity, TrainConfig};
use reprtree::dataset::{generate_circles, split, LabeledDataset, SplitSpec};
use reprtree::harness::campaign::gaussian_mixture;
use reprtree::harness::{
    run_experiment, run_theorem1_campaign, with_threads, CampaignConfig, DataSource, ExperimentConfig, ModelSpec,
};
use reprtree::metrics::{permutation_p_value, rank_distance, spearman, spearman_p_value, ImportanceRanking};
use reprtree::repr::epsilon_of;

type Criterion = (&'static str, fn() -> Outcome);

enum Status {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    status: Status,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Outcome {
    Outcome {
        status: if ok { Status::Pass } else { Status::Fail },
        detail,
    }
}

fn ac1_theorem_campaign() -> Outcome {
    let cfg = CampaignConfig {
        trials: 200,
        radius_fraction: 0.9,
        seed: 2024,
        ..CampaignConfig::default()
    };
    let start = Instant::now();
    let summary = with_threads(Some(1), || run_theorem1_campaign(&cfg)).unwrap().unwrap();
    let secs = start.elapsed().as_secs_f64();
    let checked = summary.passed + summary.failed;
    verdict(
        summary.failed == 0 && summary.hypothesis_violated == 0 && checked > 0 && secs < 60.0,
        format!(
            "{} trials: {} passed, {} failed, {} single-leaf skipped, {:.2}s single-threaded",
            summary.trials, summary.passed, summary.failed, summary.skipped, secs
        ),
    )
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, d: usize, c: usize, lattice: bool) -> LabeledDataset {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let points: Vec<f64> = (0..n * d)
        .map(|_| {
            if lattice {
                rng.random_range(-6i32..=6) as f64 * 0.5
            } else {
                normal.sample(rng)
            }
        })
        .collect();
    let labels = (0..n).map(|_| rng.random_range(0..c)).collect();
    LabeledDataset::from_flat(points, d, labels, c).unwrap()
}

fn ac2_epsilon_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut mismatches = 0;
    for k in 0..50 {
        let d = rng.random_range(1..=8);
        let c = rng.random_range(2..=3);
        let lattice = k % 2 == 0;
        let (n, nt) = (rng.random_range(1..=200), rng.random_range(1..=60));
        let x = random_cloud(&mut rng, n, d, c, lattice);
        let xt = random_cloud(&mut rng, nt, d, c, lattice);
        let fast = epsilon_of(&x, &xt).unwrap().epsilon;
        let oracle = brute_epsilon(&x, &xt);
        if fast.is_infinite() || oracle.is_infinite() {
            if fast != oracle {
                mismatches += 1;
            }
        } else {
            worst = worst.max((fast - oracle).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mismatches == 0 && worst <= 1e-12 && secs < 10.0,
        format!("50 instances, max |diff| {worst:e}, {mismatches} coverage mismatches, {secs:.2}s"),
    )
}

fn ac3_accuracy_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let d = rng.random_range(1..=5);
        let c = rng.random_range(2..=3);
        let train = gaussian_mixture(rng.random_range(10..=150), d, c, 1.5, rng.random()).unwrap();
        let eval = gaussian_mixture(rng.random_range(10..=150), d, c, 1.5, rng.random()).unwrap();
        let imp = if rng.random::<bool>() {
            Impurity::Gini
        } else {
            Impurity::Entropy
        };
        let tree = DecisionTree::fit(&train, &TrainConfig::new(imp, rng.random_range(1..=8))).unwrap();
        for ds in [&train, &eval] {
            let diff = (tree.accuracy_leafwise(ds).unwrap() - tree.accuracy_empirical(ds).unwrap()).abs();
            worst = worst.max(diff);
        }
    }
    verdict(worst <= 1e-12, format!("100 tree/dataset pairs, max |diff| {worst:e}"))
}

fn ac4_impurity_values() -> Outcome {
    let checks = [
        gini(&[0.5, 0.5]).unwrap() == 0.5,
        entropy(&[0.5, 0.5]).unwrap() == 1.0,
        gini(&[1.0, 0.0]).unwrap() == 0.0,
        gini(&[0.0, 1.0]).unwrap() == 0.0,
        entropy(&[1.0, 0.0]).unwrap() == 0.0,
        entropy(&[0.0, 1.0]).unwrap() == 0.0,
    ];
    verdict(
        checks.iter().all(|&b| b),
        format!(
            "{}/{} exact equalities",
            checks.iter().filter(|&&b| b).count(),
            checks.len()
        ),
    )
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    if d == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(d - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, d - 1);
            out.push(q);
        }
    }
    out
}

fn ac5_rank_distance() -> Outcome {
    let ranking = |o: &Vec<usize>| ImportanceRanking::from_order(o.clone()).unwrap();
    let mut pairs = 0;
    let mut bad = 0;
    for d in 1..=4 {
        let all = permutations(d);
        for a in &all {
            for b in &all {
                pairs += 1;
                if rank_distance(&ranking(a), &ranking(b)).unwrap() != direct_rank_distance(a, b) {
                    bad += 1;
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let shuffled = |rng: &mut ChaCha8Rng| {
        let mut v: Vec<usize> = (0..23).collect();
        for i in (1..v.len()).rev() {
            v.swap(i, rng.random_range(0..=i));
        }
        v
    };
    for _ in 0..1000 {
        let (a, b) = (shuffled(&mut rng), shuffled(&mut rng));
        pairs += 1;
        if rank_distance(&ranking(&a), &ranking(&b)).unwrap() != direct_rank_distance(&a, &b) {
            bad += 1;
        }
    }
    let mut axiom_failures = 0;
    for _ in 0..1000 {
        let (a, b, c) = (shuffled(&mut rng), shuffled(&mut rng), shuffled(&mut rng));
        let (ra, rb, rc) = (ranking(&a), ranking(&b), ranking(&c));
        let dist = |x: &ImportanceRanking, y: &ImportanceRanking| rank_distance(x, y).unwrap();
        let ok = dist(&ra, &ra) == 0.0
            && dist(&ra, &rb) == dist(&rb, &ra)
            && dist(&ra, &rb) >= 0.0
            && dist(&ra, &rc) <= dist(&ra, &rb) + dist(&rb, &rc) + 1e-12;
        if !ok {
            axiom_failures += 1;
        }
    }
    verdict(
        bad == 0 && axiom_failures == 0,
        format!("{pairs} pairs, {bad} disagreements, {axiom_failures} axiom violations over 1000 triples"),
    )
}

fn ac6_spearman() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let mut worst_rho = 0.0_f64;
    for _ in 0..20 {
        let x: Vec<f64> = (0..100).map(|_| rng.random_range(0..40) as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| {
                if rng.random::<f64>() < 0.2 {
                    7.0
                } else {
                    v + rng.random_range(-25.0..25.0)
                }
            })
            .collect();
        let rho = spearman(&x, &y).unwrap().rho;
        worst_rho = worst_rho.max((rho - reference_spearman(&x, &y)).abs());
    }
    let p = spearman_p_value(0.51, 100);
    let p_ok = p > 5.2e-9 && p < 5.2e-7;

    let mut worst_p = 0.0_f64;
    for n in 3..=8 {
        for _ in 0..5 {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64).collect();
            if let Ok(dp) = permutation_p_value(&x, &y) {
                worst_p = worst_p.max((dp - enumerated_permutation_p(&x, &y)).abs());
            }
        }
    }
    verdict(
        worst_rho <= 1e-9 && p_ok && worst_p <= 1e-9,
        format!("rho max |diff| {worst_rho:e}; p(n=100, rho=0.51) = {p:.3e}; permutation max |diff| {worst_p:e}"),
    )
}

fn ac7_circles() -> Outcome {
    let mut accs = Vec::new();
    for seed in 0..10 {
        let data = generate_circles(200, 0.1, 0.5, seed).unwrap();
        let (train, test) = split(&data, &SplitSpec::new(0.75, seed).stratified(true)).unwrap();
        assert_eq!((train.len(), test.len()), (150, 50));
        let tree = DecisionTree::fit(&train, &TrainConfig::new(Impurity::Gini, 4)).unwrap();
        accs.push(tree.accuracy_empirical(&test).unwrap());
    }
    let min = accs.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        min >= 0.75,
        format!("test accuracy over 10 seeds: min {min:.2}, all {accs:?}"),
    )
}

fn ac8_boosting() -> Outcome {
    let data = generate_circles(200, 0.1, 0.5, 0).unwrap();
    let (train, _) = split(&data, &SplitSpec::new(0.75, 0).stratified(true)).unwrap();
    let model = BoostedEnsemble::fit(&train, &BoostConfig::new(25, 10)).unwrap();
    let loss = &model.train_log_loss;
    let worst_rise = loss.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    let single = BoostedEnsemble::fit(&train, &BoostConfig::new(1, 10)).unwrap();
    let fi_equal = single.feature_importance() == single.stages[0].feature_importance();
    verdict(
        loss.len() == 26 && worst_rise <= 1e-9 && fi_equal,
        format!(
            "log-loss {:.4} -> {:.4}, largest step {worst_rise:e}; single-stage importance identical: {fi_equal}",
            loss[0],
            loss[loss.len() - 1]
        ),
    )
}

fn ac9_collision() -> Outcome {
    let Ok(path) = std::env::var("REPRTREE_COLLISION_CSV") else {
        return Outcome {
            status: Status::Skip,
            detail: "REPRTREE_COLLISION_CSV not set".into(),
        };
    };
    let label = std::env::var("REPRTREE_COLLISION_LABEL").unwrap_or_else(|_| "-1".into());
    let data = DataSource::Csv {
        path: path.into(),
        label_column: label,
        has_header: true,
    };
    let run = |model| run_experiment(&ExperimentConfig::new(data.clone(), model)).unwrap();
    let tree = run(ModelSpec::Tree(TrainConfig::new(Impurity::Gini, 10)));
    let boosted = run(ModelSpec::Boosted(BoostConfig::new(25, 10)));
    let (tc, bc) = (tree.correlation, boosted.correlation);
    let tree_corr = tc.is_some_and(|c| c.rho > 0.3 && c.p_value < 0.01);
    let boosted_corr = bc.is_some_and(|c| c.rho > 0.4);
    let tree_acc = (tree.reference.test_accuracy - 0.874).abs() <= 0.04;
    let boosted_acc = (boosted.reference.test_accuracy - 0.912).abs() <= 0.04;
    verdict(
        tree_corr && boosted_corr && tree_acc && boosted_acc,
        format!(
            "tree rho {:?} p {:?} acc {:.3}; boosted rho {:?} acc {:.3}",
            tc.map(|c| c.rho),
            tc.map(|c| c.p_value),
            tree.reference.test_accuracy,
            bc.map(|c| c.rho),
            boosted.reference.test_accuracy
        ),
    )
}

fn ac10_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_reprtree"))
            .args([
                "run",
                "--subsets",
                "20",
                "--subset-fraction",
                "0.2",
                "--seed",
                "42",
                "--threads",
                threads,
            ])
            .arg("--out-dir")
            .arg(&out)
            .output()
            .unwrap()
            .status;
        assert!(status.success());
        (
            std::fs::read(out.join("report.json")).unwrap(),
            std::fs::read(out.join("subsets.csv")).unwrap(),
        )
    };
    let a = run("a", "1");
    let b = run("b", "4");
    verdict(
        a == b,
        format!(
            "report.json {} bytes, identical: {}; subsets.csv identical: {}",
            a.0.len(),
            a.0 == b.0,
            a.1 == b.1
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("AC1 accuracy-preservation campaign", ac1_theorem_campaign),
        ("AC2 epsilon oracle equivalence", ac2_epsilon_oracle),
        ("AC3 accuracy identity", ac3_accuracy_identity),
        ("AC4 impurity unit values", ac4_impurity_values),
        ("AC5 rank-distance oracle", ac5_rank_distance),
        ("AC6 spearman numerics", ac6_spearman),
        ("AC7 circles reproduction", ac7_circles),
        ("AC8 boosting sanity", ac8_boosting),
        ("AC9 collision reproduction", ac9_collision),
        ("AC10 report determinism", ac10_determinism),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| Outcome {
            status: Status::Fail,
            detail: format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .map(String::as_str)
                    .or(e.downcast_ref::<&str>().copied())
                    .unwrap_or("?")
            ),
        });
        let tag = match outcome.status {
            Status::Pass => "PASS",
            Status::Fail => {
                failed += 1;
                "FAIL"
            }
            Status::Skip => "SKIP",
        };
        println!("[{tag}] {name}: {}", outcome.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
