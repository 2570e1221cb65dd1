use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsekge")).args(args).output().expect("spawn sparsekge")
}

fn ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SMALL: &[&str] = &["--synthetic", "120:10:400", "--model", "transe", "--dim", "8", "--threads", "1"];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    head.iter().chain(SMALL).chain(tail).copied().collect()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["train", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(run(&["train", "--dataset", "/definitely/not/here"]).status.code(), Some(2));
    assert_eq!(run(&["train", "--synthetic", "120:10:400", "--epochs", "many"]).status.code(), Some(2));
    assert_eq!(run(&["synth"]).status.code(), Some(2));
}

#[test]
fn zero_epochs_still_writes_a_usable_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let summary = ok(&with(&["train"], &["--epochs", "0", "--out", p(&out)]));
    assert!(summary["final_loss"].is_null());
    assert!(out.join("checkpoint.bin").is_file());
    assert_eq!(std::fs::read_to_string(out.join("train_log.jsonl")).unwrap(), "");
    let report = ok(&with(&["eval"], &["--out", p(&out)]));
    assert!(report["mrr"].as_f64().unwrap() > 0.0);
}

#[test]
fn eval_rejects_a_checkpoint_of_another_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&with(&["train"], &["--epochs", "1", "--out", p(&out)]));
    let args = ["eval", "--synthetic", "120:10:400", "--model", "distmult", "--out", p(&out)];
    assert_eq!(run(&args).status.code(), Some(1));
    let args = ["eval", "--synthetic", "150:10:400", "--out", p(&out)];
    assert_eq!(run(&args).status.code(), Some(1));
}

#[test]
fn filtered_hits_are_never_below_raw() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&with(&["train"], &["--epochs", "20", "--lr", "0.05", "--batch-size", "16", "--out", p(&out)]));
    let raw = ok(&with(&["eval"], &["--protocol", "raw", "--out", p(&out)]));
    let filtered = ok(&with(&["eval"], &["--protocol", "filtered", "--out", p(&out)]));
    for k in ["1", "3", "10"] {
        assert!(filtered["hits_at"][k].as_f64() >= raw["hits_at"][k].as_f64(), "hits@{k}");
    }
    assert!(filtered["mrr"].as_f64() >= raw["mrr"].as_f64());
}

#[test]
fn synthetic_data_round_trips_through_tsv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let report = ok(&["synth", "--synthetic", "120:10:400", "--out", p(&data)]);
    for f in ["train.txt", "valid.txt", "test.txt", "entities.dict", "relations.dict"] {
        assert!(data.join(f).is_file(), "{f}");
    }
    let out = dir.path().join("run");
    let summary = ok(&["train", "--dataset", p(&data), "--dim", "4", "--epochs", "1", "--out", p(&out)]);
    assert_eq!(summary["dataset"], report);
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# small run\nepochs = 5\nlr = 0.02\nmodel = transh\n").unwrap();
    let summary = ok(&with(&["train", "--config", p(&cfg)], &["--epochs", "2", "--out", p(&out)]));
    assert_eq!(summary["epochs"], 2);
    assert_eq!(summary["lr"], 0.02);
    assert_eq!(summary["model"], "transe");
    let lines = std::fs::read_to_string(out.join("train_log.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 2);
    std::fs::write(&cfg, "learning_rate = 0.1\n").unwrap();
    assert_eq!(run(&with(&["train", "--config", p(&cfg)], &["--out", p(&out)])).status.code(), Some(2));
}

#[test]
fn bench_writes_both_engines_to_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bench");
    let summary = ok(&with(&["bench"], &["--epochs", "2", "--out", p(&out)]));
    let (ls, ld) = (summary["sparse_final_loss"].as_f64().unwrap(), summary["dense_final_loss"].as_f64().unwrap());
    assert!((ls - ld).abs() <= 1e-8, "{ls} vs {ld}");
    let csv = std::fs::read_to_string(out.join("bench.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("impl,phase,seconds,speedup"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().any(|r| r.starts_with("sparse,fwd_bwd,")));
    assert!(rows.iter().any(|r| r.starts_with("dense,total,")));
}
