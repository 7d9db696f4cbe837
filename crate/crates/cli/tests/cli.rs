use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cgens_core::dataset;
use cgens_core::model::{self, TrainedModel};
use cgens_core::toy;

fn cgens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgens"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = cgens(args);
    assert!(
        out.status.success(),
        "cgens {args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn circle_file(dir: &Path) -> PathBuf {
    let (tr, _) = toy::circle(150, 40, 5).unwrap();
    let path = dir.join("circle.svm");
    dataset::save_libsvm(&path, &tr).unwrap();
    path
}

#[test]
fn eval_matches_the_final_trace_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = circle_file(dir.path());
    for method in ["cgens", "adaboost", "cgens-sls"] {
        let model = dir.path().join(format!("{method}.json"));
        let trace = dir.path().join(format!("{method}.csv"));
        ok(&[
            "train",
            "--data",
            s(&data),
            "--method",
            method,
            "--jmax",
            "30",
            "--out",
            s(&model),
            "--trace",
            s(&trace),
        ]);
        let printed: f64 = ok(&["eval", "--model", s(&model), "--data", s(&data)])
            .trim()
            .parse()
            .unwrap();
        let errors = model::read_trace_train_errors(&trace).unwrap();
        assert_eq!(errors.len(), 30, "{method}");
        assert!((printed - errors[29]).abs() <= 1e-12, "{method}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["train", "--bogus"],
        vec!["frobnicate"],
        vec![],
        vec!["train", "--data", "x", "--out", "y", "--C", "-1"],
        vec!["train", "--data", "x", "--out", "y", "--family", "tree"],
        vec![
            "bench",
            "--data",
            "x",
            "--out",
            "y",
            "--train-fraction",
            "1.5",
        ],
    ] {
        let out = cgens(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    let out = cgens(&["train", "--bogus"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage: cgens train"));
    assert_eq!(cgens(&["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_failures_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.svm");
    let out = cgens(&["train", "--data", s(&missing), "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    // A three-class file cannot train a binary method.
    let (tr, _) = toy::blobs(3, 60, 6, 3.0, 1).unwrap();
    let data = dir.path().join("three.svm");
    dataset::save_libsvm(&data, &tr).unwrap();
    let model = dir.path().join("m.json");
    let out = cgens(&["train", "--data", s(&data), "--out", s(&model)]);
    assert_eq!(out.status.code(), Some(1));

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{\"version\": 99}").unwrap();
    let out = cgens(&["eval", "--model", s(&junk), "--data", s(&data)]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn predictions_are_in_the_original_label_space() {
    let dir = tempfile::tempdir().unwrap();
    let (tr, te) = toy::blobs(3, 90, 30, 4.0, 2).unwrap();
    let train = dir.path().join("train.csv");
    let test = dir.path().join("test.csv");
    dataset::save_csv(&train, &tr, true).unwrap();
    dataset::save_csv(&test, &te, true).unwrap();
    let model = dir.path().join("m.json");
    let preds = dir.path().join("p.csv");
    let common = ["--format", "csv", "--header"];
    let mut args = vec![
        "train",
        "--data",
        s(&train),
        "--method",
        "cgens-sls",
        "--jmax",
        "20",
    ];
    args.extend(common);
    args.extend(["--out", s(&model)]);
    ok(&args);
    let mut args = vec!["predict", "--model", s(&model), "--data", s(&test)];
    args.extend(common);
    args.extend(["--out", s(&preds)]);
    ok(&args);

    let text = std::fs::read_to_string(&preds).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("score_1,score_2,score_3,label"));
    let labels: Vec<f64> = lines
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(labels.len(), te.n_samples());
    let loaded = TrainedModel::load(&model).unwrap();
    assert_eq!(labels, loaded.predict_raw(&te).unwrap());
    assert!(labels.iter().all(|v| [1.0, 2.0, 3.0].contains(v)));
}

#[test]
fn binary_predictions_carry_the_margin() {
    let dir = tempfile::tempdir().unwrap();
    let data = circle_file(dir.path());
    let model = dir.path().join("m.json");
    let preds = dir.path().join("p.csv");
    ok(&[
        "train",
        "--data",
        s(&data),
        "--jmax",
        "10",
        "--out",
        s(&model),
    ]);
    ok(&[
        "predict",
        "--model",
        s(&model),
        "--data",
        s(&data),
        "--out",
        s(&preds),
    ]);
    let text = std::fs::read_to_string(&preds).unwrap();
    assert!(text.starts_with("margin,label\n"));
    for line in text.lines().skip(1) {
        let (margin, label) = line.split_once(',').unwrap();
        let margin: f64 = margin.parse().unwrap();
        // Raw label +1 is the second class, predicted when the margin is negative.
        let want = if margin >= 0.0 { "-1" } else { "1" };
        assert_eq!(label, want);
    }
}

#[test]
fn cv_and_bench_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let data = circle_file(dir.path());
    let table = dir.path().join("cv.csv");
    let stdout = ok(&[
        "cv",
        "--data",
        s(&data),
        "--c-values",
        "1,4",
        "--jmax-values",
        "5,10",
        "--folds",
        "3",
        "--out",
        s(&table),
    ]);
    assert!(stdout.starts_with("best C="));
    let text = std::fs::read_to_string(&table).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text.lines().filter(|l| l.ends_with(",1")).count(), 1);

    let report = dir.path().join("bench.csv");
    let stdout = ok(&[
        "bench",
        "--data",
        s(&data),
        "--methods",
        "cgens,adaboost",
        "--jmax",
        "10",
        "--repeats",
        "2",
        "--out",
        s(&report),
    ]);
    assert!(stdout.contains("cgens") && stdout.contains("adaboost"));
    let text = std::fs::read_to_string(&report).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("cgens,") && rows[2].starts_with("adaboost,"));
}

#[test]
fn feature_report_counts_every_stump() {
    let dir = tempfile::tempdir().unwrap();
    let data = circle_file(dir.path());
    let models = dir.path().join("models");
    std::fs::create_dir(&models).unwrap();
    for (method, seed) in [("cgens", "1"), ("adaboost", "2")] {
        let out = models.join(format!("{method}.json"));
        ok(&[
            "train",
            "--data",
            s(&data),
            "--method",
            method,
            "--jmax",
            "12",
            "--seed",
            seed,
            "--out",
            s(&out),
        ]);
    }
    let freq = dir.path().join("freq.csv");
    let pattern = format!("{}/*.json", s(&models));
    ok(&["report-features", "--models", &pattern, "--out", s(&freq)]);
    let text = std::fs::read_to_string(&freq).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("feature,count,mean_per_model"));
    let total: usize = lines
        .map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 24);

    let out = cgens(&[
        "report-features",
        "--models",
        "/nonexistent/*.json",
        "--out",
        s(&freq),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn demo_writes_plot_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    ok(&[
        "demo",
        "toy2d",
        "--n",
        "120",
        "--seed",
        "3",
        "--jmax",
        "15",
        "--grid",
        "11",
        "--out-dir",
        s(&out),
    ]);
    let grid = std::fs::read_to_string(out.join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 1 + 121);
    let conv = std::fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(conv.lines().count(), 1 + 15);
    let errors = model::read_trace_train_errors(out.join("cgens_trace.csv")).unwrap();
    let last = conv.lines().last().unwrap();
    let cg_train: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(cg_train, *errors.last().unwrap());
    TrainedModel::load(out.join("adaboost_model.json")).unwrap();
}
