//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use svdd_clean::autoencoder::{pretrain, AutoencoderModel, PretrainConfig};
use svdd_clean::classifiers::{weighted_accuracy, ClassifierKind};
use svdd_clean::deep_svdd::{normalize_scores, train_one_class, DeepSvddModel, ScoreSet, SvddConfig};
use svdd_clean::numeric::{DenseNet, SeededRng};
use svdd_clean::oracle::{min_enclosing_ball, soft_svdd};
use svdd_clean::pipeline::{coverage_report, filter_by_threshold};
use svdd_clean::synth::{OutlierMode, SynthSpec};
use svdd_clean::workflow::evaluate;

use common::{max_gradient_error, roc_auc, run_synth, synth_config};

type Outcome = Result<String, String>;

fn within(limit: Duration, start: Instant, detail: String) -> Outcome {
    let took = start.elapsed();
    if took <= limit {
        Ok(format!("{detail} in {:.2}s", took.as_secs_f64()))
    } else {
        Err(format!("{detail} but took {:.2}s (limit {}s)", took.as_secs_f64(), limit.as_secs()))
    }
}

fn gradient_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = SeededRng::new(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let layers = 1 + rng.below(3);
        let dims: Vec<usize> = (0..=layers).map(|_| 1 + rng.below(8)).collect();
        let net = DenseNet::init(&dims, rng.below(2) == 1, &mut rng).unwrap();
        let x: Vec<f64> = (0..dims[0]).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let g: Vec<f64> = (0..dims[layers]).map(|_| rng.uniform(-1.0, 1.0)).collect();
        worst = worst.max(max_gradient_error(&net, &x, &g, 1e-5));
    }
    if worst >= 1e-4 {
        return Err(format!("max relative error {worst:.3e} >= 1e-4"));
    }
    within(Duration::from_secs(5), start, format!("100 nets, max relative error {worst:.2e}"))
}

fn oracle_agreement() -> Outcome {
    let start = Instant::now();
    let h = 3f64.sqrt() / 2.0;
    let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, h]];
    let r = min_enclosing_ball(&tri).unwrap().radius;
    let expected = 1.0 / 3f64.sqrt();
    if (r - expected).abs() > 1e-6 {
        return Err(format!("triangle radius {r} != {expected}"));
    }
    let mut rng = SeededRng::new(17);
    let pts: Vec<Vec<f64>> = (0..50)
        .map(|_| vec![2.0 + 0.5 * rng.normal(), -1.0 + 0.5 * rng.normal(), 0.5 * rng.normal()])
        .collect();
    let ball = min_enclosing_ball(&pts).unwrap();
    let soft = soft_svdd(&pts, 1e-3, 5000, &mut rng).unwrap();
    let gap = (soft.ball.radius - ball.radius).abs();
    if gap > 1e-3 {
        return Err(format!("soft radius {} vs ball radius {} (gap {gap:.2e})", soft.ball.radius, ball.radius));
    }
    within(
        Duration::from_secs(10),
        start,
        format!("triangle radius {r:.9}, soft/hard radius gap {gap:.2e}"),
    )
}

fn score_sets() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(0.0f64..1e3, 1..60),
        (0.0f64..1e3, 1usize..20).prop_map(|(v, n)| vec![v; n]),
        prop::collection::vec(prop::sample::select(vec![0.0, 1.0, 2.5, 7.0]), 1..30),
    ]
}

fn normalization_contract() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        ..Config::default()
    });
    runner
        .run(&score_sets(), |raw| {
            let n = normalize_scores(&raw).unwrap();
            let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
            let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if min == max {
                prop_assert!(n.iter().all(|&v| v == 0.0));
                return Ok(());
            }
            for i in 0..raw.len() {
                prop_assert!((0.0..=1.0).contains(&n[i]));
                if raw[i] == min {
                    prop_assert_eq!(n[i], 0.0);
                }
                if raw[i] == max {
                    prop_assert_eq!(n[i], 1.0);
                }
                for j in 0..raw.len() {
                    if raw[i] < raw[j] {
                        prop_assert!(n[i] <= n[j]);
                    }
                    if raw[i] == raw[j] {
                        prop_assert_eq!(n[i], n[j]);
                    }
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("1000 random score sets".into())
}

fn threshold_monotonicity() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        ..Config::default()
    });
    let strategy = (
        prop::collection::vec(score_sets(), 1..4),
        0.0f64..=1.0,
        0.0f64..=1.0,
    );
    runner
        .run(&strategy, |(classes, a, b)| {
            let (t1, t2) = if a <= b { (a, b) } else { (b, a) };
            let sets: Vec<(u32, ScoreSet)> = classes
                .iter()
                .enumerate()
                .map(|(k, raw)| {
                    let ids = (0..raw.len()).map(|i| format!("{k}-{i}")).collect();
                    (k as u32, ScoreSet::new(ids, raw.clone()).unwrap())
                })
                .collect();
            let low = filter_by_threshold(&sets, t1).unwrap();
            let high = filter_by_threshold(&sets, t2).unwrap();
            let kept_high: BTreeSet<&str> = high.kept_ids().collect();
            prop_assert!(low.kept_ids().all(|id| kept_high.contains(id)));
            let full = filter_by_threshold(&sets, 1.0).unwrap();
            let overall = coverage_report(&full).overall.coverage;
            prop_assert_eq!(overall.as_str(), "100.000%");
            prop_assert_eq!(full.kept_total, full.total);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("1000 random (scores, τ1 <= τ2) cases; τ=1.0 gives 100.000%".into())
}

fn outlier_recovery() -> Outcome {
    let start = Instant::now();
    let mut aucs = Vec::new();
    for seed in 0..5 {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec {
            n_classes: 2,
            n_per_class: 600,
            dim: 32,
            outlier_fraction: 0.05,
            outlier_mode: OutlierMode::FarPoint,
            seed,
            ..SynthSpec::default()
        };
        let (data, outcome) = run_synth(&spec, dir.path());
        let truth: HashMap<&str, bool> = data.records.iter().map(|r| (r.record.id.as_str(), r.is_injected)).collect();
        let (mut scores, mut flags) = (Vec::new(), Vec::new());
        for (_, set) in &outcome.test_scores {
            for (id, s) in set.ids.iter().zip(&set.normalized) {
                scores.push(*s);
                flags.push(truth[id.as_str()]);
            }
        }
        aucs.push(roc_auc(&scores, &flags));
    }
    let good = aucs.iter().filter(|&&a| a >= 0.90).count();
    let detail = format!(
        "test ROC-AUC per seed [{}], {good}/5 >= 0.90",
        aucs.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>().join(", ")
    );
    if good < 4 {
        return Err(detail);
    }
    within(Duration::from_secs(120), start, detail)
}

fn downstream_improvement() -> Outcome {
    let start = Instant::now();
    let kinds = [ClassifierKind::Knn, ClassifierKind::LogisticRegression];
    let mut filtered = [0.0; 2];
    let mut baseline = [0.0; 2];
    for seed in 0..5 {
        let dir = tempfile::tempdir().unwrap();
        let spec = SynthSpec {
            n_classes: 2,
            n_per_class: 600,
            outlier_fraction: 0.10,
            outlier_mode: OutlierMode::LabelFlip,
            seed,
            ..SynthSpec::default()
        };
        let (_, mut config) = synth_config(&spec, dir.path());
        config.thresholds = vec![0.6, 1.0];
        let outcome = svdd_clean::workflow::clean(&config).map_err(|e| e.to_string())?;
        let table = evaluate(outcome.run.root(), &kinds, &config.classifier_params, seed).map_err(|e| e.to_string())?;
        for row in &table.rows {
            let k = kinds.iter().position(|&k| k == row.classifier).unwrap();
            if row.threshold == 0.6 {
                filtered[k] += row.result.accuracy / 5.0;
            } else {
                baseline[k] += row.result.accuracy / 5.0;
            }
        }
    }
    let gains: Vec<f64> = (0..2).map(|k| 100.0 * (filtered[k] - baseline[k])).collect();
    let detail = format!(
        "mean accuracy τ=0.6 vs τ=1.0: KNN {:.3}% vs {:.3}% ({:+.3} pt), LogReg {:.3}% vs {:.3}% ({:+.3} pt)",
        100.0 * filtered[0],
        100.0 * baseline[0],
        gains[0],
        100.0 * filtered[1],
        100.0 * baseline[1],
        gains[1]
    );
    if gains.iter().any(|&g| g < 1.0) {
        return Err(detail);
    }
    within(Duration::from_secs(300), start, detail)
}

fn weighted_accuracy_arithmetic() -> Outcome {
    let w = weighted_accuracy(0.94805, 0.89313, 9676, 324).map_err(|e| e.to_string())?;
    if (w - 0.94627).abs() <= 0.0005 {
        Ok(format!("weighted = {w:.5}"))
    } else {
        Err(format!("weighted = {w:.5}, expected 0.94627 ± 0.0005"))
    }
}

fn run_cli(args: &[String]) -> Result<(), String> {
    let code = svdd_clean::cli::run(std::iter::once("svdd-clean".to_string()).chain(args.iter().cloned()));
    if code == 0 {
        Ok(())
    } else {
        Err(format!("svdd-clean {} exited {code}", args.join(" ")))
    }
}

fn strip_timestamp(bytes: &[u8]) -> Vec<u8> {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("created_at");
    serde_json::to_vec(&v).unwrap()
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec {
        n_per_class: 150,
        dim: 16,
        seed: 3,
        ..SynthSpec::default()
    };
    svdd_clean::synth::generate(&spec).unwrap().write(dir.path()).unwrap();
    let data = dir.path().join("dataset.jsonl").display().to_string();
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = out.display().to_string();
        run_cli(&[
            "clean", "--data", &data, "--embedder", "hashing", "--dim", "64", "--hidden-dims", "16,8", "--epochs-ae",
            "10", "--epochs-svdd", "10", "--seed", "11", "--allow-small-classes", "--out", &o,
        ]
        .map(String::from))?;
        run_cli(&["eval", "--run", &o].map(String::from))?;
        runs.push(out);
    }
    let mut files = vec![
        "manifest.json",
        "embeddings.jsonl",
        "scores_train.jsonl",
        "scores_test.jsonl",
        "eval.json",
        "eval_accuracy.csv",
        "eval_inlier_outlier.csv",
        "models/class_0.json",
        "models/class_1.json",
    ]
    .into_iter()
    .map(String::from)
    .collect::<Vec<_>>();
    let reports: Vec<String> = ["0.200", "0.400", "0.600", "0.800", "1.000"]
        .iter()
        .map(|t| format!("report_{t}.json"))
        .collect();
    files.extend(reports.iter().cloned());
    for f in &files {
        let a = std::fs::read(runs[0].join(f)).map_err(|e| format!("{f}: {e}"))?;
        let b = std::fs::read(runs[1].join(f)).map_err(|e| format!("{f}: {e}"))?;
        let (a, b) = if reports.contains(f) {
            (strip_timestamp(&a), strip_timestamp(&b))
        } else {
            (a, b)
        };
        if a != b {
            return Err(format!("{f} differs between identical runs"));
        }
    }
    Ok(format!("{} artifacts byte-identical across two clean + eval runs", files.len()))
}

fn rank8_data(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SeededRng::new(seed);
    let basis: Vec<Vec<f64>> = (0..384)
        .map(|_| (0..8).map(|_| rng.normal() / 8f64.sqrt()).collect())
        .collect();
    (0..n)
        .map(|_| {
            let z: Vec<f64> = (0..8).map(|_| rng.normal()).collect();
            basis.iter().map(|row| row.iter().zip(&z).map(|(a, b)| a * b).sum()).collect()
        })
        .collect()
}

fn autoencoder_pretraining() -> Outcome {
    let start = Instant::now();
    let dims = [384, 128, 32];
    let mut losses = Vec::new();
    let mut wins = 0;
    let mut pairs = Vec::new();
    for seed in 0..5u64 {
        let data = rank8_data(256, 100 + seed);
        let mut rng = SeededRng::new(seed);
        let ae = AutoencoderModel::new(&dims, &mut rng).unwrap();
        let random_encoder = DenseNet::init(&dims, false, &mut rng).unwrap();
        let cfg = PretrainConfig {
            epochs: 200,
            ..PretrainConfig::default()
        };
        let (ae, _) = pretrain(ae, &data, &cfg, &mut rng).unwrap();
        losses.push(ae.reconstruction_loss(&data).unwrap());

        let final_objective = |encoder: DenseNet, rng: &mut SeededRng| {
            let mut m = DeepSvddModel::new(encoder, 1e-6, 0.1).unwrap();
            m.initialize_center(&data).unwrap();
            let (_, trace) = train_one_class(m, &data, &SvddConfig::default(), rng).unwrap();
            *trace.last().unwrap()
        };
        let pre = final_objective(ae.into_encoder(), &mut rng.derive(1));
        let rand = final_objective(random_encoder, &mut rng.derive(1));
        if pre <= rand {
            wins += 1;
        }
        pairs.push(format!("{pre:.4}/{rand:.4}"));
    }
    let worst = losses.iter().copied().fold(0.0, f64::max);
    let detail = format!(
        "max final reconstruction loss {worst:.4}; pretrained/random objective [{}], {wins}/5 pretrained <= random",
        pairs.join(", ")
    );
    if worst >= 0.05 || wins < 4 {
        return Err(detail);
    }
    Ok(format!("{detail} in {:.1}s", start.elapsed().as_secs_f64()))
}

fn main() {
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 gradient correctness", gradient_correctness),
        ("2 oracle agreement", oracle_agreement),
        ("3 normalization contract", normalization_contract),
        ("4 threshold monotonicity", threshold_monotonicity),
        ("5 injected-outlier recovery", outlier_recovery),
        ("6 downstream improvement", downstream_improvement),
        ("7 weighted-accuracy arithmetic", weighted_accuracy_arithmetic),
        ("8 determinism", determinism),
        ("9 autoencoder pretraining", autoencoder_pretraining),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        if filter.as_ref().is_some_and(|f| !name.contains(f.as_str())) {
            continue;
        }
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
