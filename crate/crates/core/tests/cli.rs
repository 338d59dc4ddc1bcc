use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_svdd-clean"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn synth(dir: &Path, per_class: usize) {
    let o = run(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--n-per-class",
        &per_class.to_string(),
        "--dim",
        "8",
        "--seed",
        "5",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
}

/// Arguments for a quick `clean` over the synthetic set in `dir`.
fn clean_args(dir: &Path, out: &Path) -> Vec<String> {
    [
        "clean",
        "--data",
        dir.join("dataset.jsonl").to_str().unwrap(),
        "--embedder",
        "precomputed",
        "--embeddings",
        dir.join("embeddings.jsonl").to_str().unwrap(),
        "--dim",
        "8",
        "--hidden-dims",
        "8,4",
        "--epochs-ae",
        "5",
        "--epochs-svdd",
        "5",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

fn clean(dir: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = clean_args(dir, out);
    args.extend(extra.iter().map(|s| s.to_string()));
    bin().args(&args).output().unwrap()
}

fn reports(run: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(run)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("report_"))
        .collect();
    names.sort();
    names
}

fn json(path: PathBuf) -> Value {
    serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap()
}

#[test]
fn single_threshold_writes_one_report() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 150);
    let out = dir.path().join("run");
    let o = clean(dir.path(), &out, &["--allow-small-classes", "--threshold", "0.6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(reports(&out), vec!["report_0.600.json"]);
    let r = json(out.join("report_0.600.json"));
    assert_eq!(r["format_version"], 1);
    assert_eq!(r["threshold"], 0.6);
    assert!(stdout(&o).contains("coverage"), "{}", stdout(&o));
}

#[test]
fn default_sweep_then_eval_and_refilter() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 150);
    let out = dir.path().join("run");
    let o = clean(dir.path(), &out, &["--allow-small-classes"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        reports(&out),
        ["0.200", "0.400", "0.600", "0.800", "1.000"].map(|t| format!("report_{t}.json"))
    );
    for f in ["config.txt", "manifest.json", "embeddings.jsonl", "scores_train.jsonl", "scores_test.jsonl"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(out.join("models/class_0.json").exists() && out.join("models/class_1.json").exists());

    let run_dir = out.to_str().unwrap();
    let o = run(&["eval", "--run", run_dir]);
    assert!(o.status.success(), "{}", stderr(&o));
    let eval = json(out.join("eval.json"));
    let rows = eval["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    let manifest = json(out.join("manifest.json"));
    let n_train = manifest["split"]["train"].as_array().unwrap().len();
    for row in rows.iter().filter(|r| r["threshold"] == 1.0) {
        assert_eq!(row["n_train"].as_u64().unwrap() as usize, n_train);
        assert_eq!(row["data_coverage"], 100.0);
    }
    let acc = std::fs::read(out.join("eval_accuracy.csv")).unwrap();
    let io = std::fs::read(out.join("eval_inlier_outlier.csv")).unwrap();
    assert_eq!(String::from_utf8_lossy(&acc).lines().count(), 6);
    let o = run(&["eval", "--run", run_dir]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(out.join("eval_accuracy.csv")).unwrap(), acc);
    assert_eq!(std::fs::read(out.join("eval_inlier_outlier.csv")).unwrap(), io);

    let models_before = std::fs::read(out.join("models/class_0.json")).unwrap();
    let o = run(&["refilter", "--run", run_dir, "--threshold", "0.5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("report_0.500.json").exists());
    assert_eq!(std::fs::read(out.join("models/class_0.json")).unwrap(), models_before);
    let a = json(out.join("report_0.600.json"));
    let b = json(out.join("report_0.500.json"));
    assert!(b["kept_total"].as_u64() <= a["kept_total"].as_u64());
}

#[test]
fn small_class_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 120);
    let o = clean(dir.path(), &dir.path().join("run"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("500"), "{}", stderr(&o));
}

#[test]
fn config_file_and_set_precedence() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 150);
    let cfg = dir.path().join("c.txt");
    std::fs::write(&cfg, "# quick run\nthresholds = 0.3, 0.7\nallow_small_classes = true\n").unwrap();
    let out = dir.path().join("run");
    let o = clean(dir.path(), &out, &["--config", cfg.to_str().unwrap(), "--set", "thresholds=0.3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(reports(&out), vec!["report_0.300.json"]);
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), 150);
    let out = dir.path().join("run");
    for extra in [["--embedder", "word2vec"], ["--nu", "1.5"], ["--set", "nonsense=1"]] {
        let o = clean(dir.path(), &out, &extra);
        assert_eq!(o.status.code(), Some(2), "{extra:?}: {}", stderr(&o));
    }
    let o = run(&["synth", "--out", dir.path().to_str().unwrap(), "--rho", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn malformed_dataset_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    std::fs::write(&data, "{\"id\":\"a\",\"text\":\"x\",\"label\":0}\n{not json\n").unwrap();
    let o = run(&[
        "clean",
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains('2'), "{}", stderr(&o));
}

#[test]
fn eval_without_a_run_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["eval", "--run", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn synth_writes_dataset_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "synth", "--out", dir.path().to_str().unwrap(), "--n-per-class", "40", "--mode", "label_flip", "--rho", "0.1",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let count = |f: &str| std::fs::read_to_string(dir.path().join(f)).unwrap().lines().count();
    assert_eq!(count("dataset.jsonl"), 80);
    assert_eq!(count("truth.jsonl"), 80);
    assert_eq!(count("embeddings.jsonl"), 80);
}

#[test]
fn oracle_two_points() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.jsonl");
    std::fs::write(&pts, "[0, 0]\n[2, 0]\n").unwrap();
    let o = run(&["oracle", "--points", pts.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("radius 1.000000000"), "{out}");
    assert!(out.contains("center [1.000000000, 0.000000000]"), "{out}");
}

#[test]
fn oracle_soft_margin_flags_the_outlier() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("p.jsonl");
    let mut text = String::new();
    for i in 0..50 {
        let a = i as f64 * 0.7;
        let r = 0.2 + 0.6 * ((i * 7) % 11) as f64 / 11.0;
        text.push_str(&format!("{{\"id\": \"p{i}\", \"point\": [{}, {}]}}\n", r * a.cos(), r * a.sin()));
    }
    text.push_str("{\"id\": \"far\", \"point\": [10, 10]}\n");
    std::fs::write(&pts, text).unwrap();
    for nu in ["0.01", "0.05"] {
        let o = run(&["oracle", "--points", pts.to_str().unwrap(), "--nu", nu]);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("most_outlying far"), "{}", stdout(&o));
    }
}
