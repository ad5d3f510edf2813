use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fwboost(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fwboost"))
        .args(args)
        .env("RUST_BACKTRACE", "0")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> serde_json::Value {
    let out = fwboost(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null)
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, name: &str, m: usize) -> String {
    let file = dir.join(format!("{name}.csv"));
    ok(&[
        "synth",
        "--name",
        name,
        "--param",
        &format!("m={m}"),
        "--seed",
        "1",
        "--out",
        path(&file),
    ]);
    path(&file).to_string()
}

#[test]
fn train_and_evaluate_every_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let reg = synth(dir.path(), "step-regression", 40);
    let cls = synth(dir.path(), "two-gaussian", 40);
    for algo in [
        "fwboost-c",
        "fwboost-r",
        "awaystep",
        "adaboost-fw",
        "gb",
        "gb-shrink",
        "gb-sub",
        "gb-early",
    ] {
        let data = if algo == "adaboost-fw" { &cls } else { &reg };
        let model = dir.path().join(format!("{algo}.json"));
        let records = dir.path().join(format!("{algo}.jsonl"));
        let summary = ok(&[
            "train",
            "--data",
            data,
            "--algo",
            algo,
            "--iters",
            "5",
            "--model",
            path(&model),
            "--records",
            path(&records),
        ]);
        assert_eq!(summary["algorithm"], algo);
        let lines = fs::read_to_string(&records).unwrap().lines().count();
        assert!((1..=5).contains(&lines), "{algo}: {lines}");
        let eval = ok(&["evaluate", "--model", path(&model), "--data", data]);
        assert!(eval["error"].as_f64().unwrap().is_finite(), "{algo}");
    }
}

#[test]
fn step_and_gap_flags() {
    let dir = tempfile::tempdir().unwrap();
    let reg = synth(dir.path(), "step-regression", 30);
    for step in ["schedule", "linesearch", "line-search"] {
        ok(&[
            "train",
            "--data",
            &reg,
            "--algo",
            "fwboost-r",
            "-C",
            "2",
            "--step",
            step,
            "-T",
            "5",
            "--gap-tol",
            "0",
        ]);
    }
    assert!(!fwboost(&["train", "--data", &reg, "--step", "bogus"])
        .status
        .success());
}

#[test]
fn tune_reports_a_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let reg = synth(dir.path(), "step-regression", 40);
    let out = ok(&[
        "tune",
        "--data",
        &reg,
        "--algo",
        "fwboost-r",
        "--grid-c",
        "0.5,2",
        "-T",
        "5",
        "--folds",
        "2",
    ]);
    let best = out["best"]["capacity"].as_f64().unwrap();
    assert!(best == 0.5 || best == 2.0);
    assert_eq!(out["grid"].as_array().unwrap().len(), 2);
}

#[test]
fn experiment_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("exp");
    ok(&[
        "experiment",
        "--synth",
        "two-gaussian",
        "--param",
        "m=30",
        "--algo",
        "adaboost-fw",
        "--algo",
        "gb-early",
        "--repeats",
        "1",
        "--folds",
        "2",
        "-T",
        "5",
        "--out",
        path(&out),
    ]);
    for file in ["curves.csv", "records.jsonl", "summary.json"] {
        assert!(out.join(file).exists(), "{file}");
    }
    let long = dir.path().join("long.csv");
    ok(&[
        "plot",
        "--curves",
        path(&out.join("curves.csv")),
        "--out",
        path(&long),
    ]);
    assert!(fs::read_to_string(&long)
        .unwrap()
        .starts_with("algorithm,t,metric,mean,std"));
}

#[test]
fn analyze_subcommands() {
    let rate = ok(&[
        "analyze",
        "rate",
        "--loss",
        "squared",
        "-C",
        "1",
        "--initial-risk",
        "1",
        "-T",
        "3",
    ]);
    assert_eq!(rate["bound"][1], 0.5);
    let bound = ok(&[
        "analyze",
        "generalization",
        "--empirical-risk",
        "0.1",
        "--lipschitz",
        "0",
        "--loss-bound",
        "0",
        "--rademacher",
        "0",
        "--m",
        "10",
    ]);
    assert!(bound.to_string().contains("0.1"));
}

#[test]
fn failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.csv");
    let out = fwboost(&["train", "--data", path(&missing)]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.csv"));
    assert!(!fwboost(&["train"]).status.success());
    assert!(!fwboost(&[
        "synth",
        "--name",
        "nope",
        "--out",
        path(&dir.path().join("x.csv"))
    ])
    .status
    .success());
}
