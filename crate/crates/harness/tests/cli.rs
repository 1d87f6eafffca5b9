use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use confound_harness::report::ExperimentReport;
use confound_harness::RealResult;
use serde_json::Value;

fn confound(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confound")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = confound(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_pair_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c2.txt");
    ok(&["generate", "--spec", "c2", "--noise", "uniform", "--n-samples", "60", "--seed", "4", "--out", path(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    assert_eq!(rows.len(), 60);
    assert!(rows.iter().all(|r| r.split_whitespace().count() == 2));
    let meta: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("c2.txt.json")).unwrap()).unwrap();
    assert_eq!(meta["truth"]["tag"], "CommonCause");
    assert_eq!(meta["seed"], 4);

    // same seed, same bytes
    let again = dir.path().join("again.txt");
    ok(&["generate", "--spec", "CommonAdd2", "--noise", "uniform", "--n-samples", "60", "--seed", "4", "--out", path(&again)]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn discover_reads_generated_file() {
    let dir = tempfile::tempdir().unwrap();
    let pair = dir.path().join("d1.txt");
    let json = dir.path().join("r.json");
    ok(&["generate", "--spec", "d1", "--n-samples", "120", "--seed", "1", "--out", path(&pair)]);
    ok(&["discover", "--input", path(&pair), "--algorithm", "modigci", "--seed", "2", "--out", path(&json)]);
    let r: RealResult = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(r.rows, 120);
    assert_eq!(r.deltas.len(), 25);
    let m = r.mean.unwrap();
    assert!((0.0..=1.0).contains(&m));
}

#[test]
fn discover_reads_named_csv_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let body: String = (0..50).map(|i| {
        let x = i as f64 / 10.0;
        format!("{},{x},{}\n", i % 3, x.sin() + 0.1 * (i as f64 * 1.7).cos())
    }).collect();
    fs::write(&csv, format!("id,x,y\n{body}")).unwrap();
    let out = ok(&["discover", "--input", path(&csv), "--csv", "--col-a", "x", "--col-b", "y", "--algorithm", "igci"]);
    let r: RealResult = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.rows, 50);

    let bad = confound(&["discover", "--input", path(&csv), "--csv", "--col-a", "x", "--col-b", "missing"]);
    assert!(!bad.status.success());
}

#[test]
fn experiment_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("e.json");
    ok(&[
        "experiment", "--spec", "d1", "--noise", "exp", "--algorithm", "modKCDC,IGCI", "--n-datasets", "3", "--n-samples", "80",
        "--seed", "9", "--out", path(&json),
    ]);
    let report: ExperimentReport = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.summaries.len(), 2);
    for s in &report.summaries {
        assert_eq!(s.records.len(), 3);
        assert_eq!(s.correct, s.records.iter().filter(|r| r.correct).count());
        let acc = s.accuracy.unwrap();
        assert!((0.0..=1.0).contains(&acc));
    }
    let again = serde_json::to_string(&report).unwrap();
    let back: ExperimentReport = serde_json::from_str(&again).unwrap();
    assert_eq!(back, report);
}

#[test]
fn config_file_is_strict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let pair = dir.path().join("p.txt");
    ok(&["generate", "--spec", "d2", "--n-samples", "60", "--out", path(&pair)]);

    fs::write(&cfg, r#"{ "n_bootstraps": 5, "igci": { "igci_reference": "uniform_rescale" } }"#).unwrap();
    let out = ok(&["discover", "--input", path(&pair), "--algorithm", "modIGCI", "--config", path(&cfg)]);
    let r: RealResult = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r.deltas.len(), 5);

    fs::write(&cfg, r#"{ "n_bootstrap": 5 }"#).unwrap();
    let bad = confound(&["discover", "--input", path(&pair), "--config", path(&cfg)]);
    assert!(!bad.status.success());
}

#[test]
fn sensitivity_writes_csv() {
    let out = ok(&["sensitivity", "--lambdas", "0,1", "--n-datasets", "2", "--n-samples", "60", "--algorithm", "igci"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lambda,algorithm,directed_accuracy,common_accuracy");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,IGCI,"));
}

#[test]
fn rejects_unknown_family_and_noise() {
    assert!(!confound(&["generate", "--spec", "d9", "--out", "/dev/null"]).status.success());
    assert!(!confound(&["generate", "--spec", "d1", "--noise", "cauchy", "--out", "/dev/null"]).status.success());
}
