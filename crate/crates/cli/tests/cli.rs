use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn kwc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kwc")).current_dir(dir).args(args).output().expect("spawn kwc")
}

fn stdout_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stdout);
    serde_json::from_str(text.lines().last().unwrap_or("null")).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn stationary_run_has_flat_energy() {
    let tmp = tempfile::tempdir().unwrap();
    // α'(1) ε balances the interfacial force on a constant state.
    let cfg = r#"{
        "parameters": {"T": 0.05, "epsilon": 0.1},
        "initial": {"eta": {"kind": "constant", "value": 1.0}, "theta": {"kind": "constant", "value": 0.4}},
        "forcing": {"u": "0.1 / sqrt(1.01)", "v": "0"}
    }"#;
    fs::write(tmp.path().join("c.json"), cfg).unwrap();
    let out = kwc(tmp.path(), &["run", "--config", "c.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let ts = fs::read_to_string(tmp.path().join("o/timeseries.csv")).unwrap();
    let e = column(&ts, "E_total");
    assert_eq!(e.len(), 1001);
    assert!(e.iter().all(|v| (v - e[0]).abs() < 1e-13), "{e:?}");
    let last = fs::read_to_string(tmp.path().join("o/snapshots/eta_001000.csv")).unwrap();
    assert!(last.starts_with("# grid dim=1 cells=64 extents=1"));
}

#[test]
fn manifest_reproduces_run_bit_for_bit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{
        "grid": {"dim": 2, "cells": [12]},
        "parameters": {"T": 0.02, "mu": 0.1, "nu": 0.05},
        "stepper": "pseudo_parabolic",
        "forcing": {"u": "sin(pi*x)*exp(-t)", "v": "0.5*cos(pi*y)"},
        "output": {"snapshot_stride": 5}
    }"#;
    fs::write(tmp.path().join("c.json"), cfg).unwrap();
    assert_eq!(kwc(tmp.path(), &["run", "--config", "c.json", "--out", "a", "--seed", "7"]).status.code(), Some(0));
    let again = kwc(tmp.path(), &["run", "--config", "a/manifest.json", "--out", "b"]);
    assert_eq!(again.status.code(), Some(0), "{}", String::from_utf8_lossy(&again.stderr));
    let read = |p: &str| fs::read(tmp.path().join(p)).unwrap();
    assert_eq!(read("a/timeseries.csv"), read("b/timeseries.csv"));
    assert_eq!(read("a/snapshots/theta_000020.csv"), read("b/snapshots/theta_000020.csv"));

    let manifest: Value = serde_json::from_slice(&read("a/manifest.json")).unwrap();
    assert_eq!(manifest["config"]["seed"], 7);
    assert_eq!(manifest["config"]["initial"]["eta"]["seed"], 7);
    assert_eq!(manifest["config"]["parameters"]["dt"], 2e-5);
    assert_eq!(manifest["solves"]["per_step"].as_array().unwrap().len(), 1000);
    assert!(manifest["model_bounds"]["delta_alpha"].as_f64().unwrap() > 0.0);
    assert_eq!(manifest["passed"], true);

    let other = kwc(tmp.path(), &["run", "--config", "a/manifest.json", "--out", "c", "--seed", "8"]);
    assert_eq!(other.status.code(), Some(0));
    assert_ne!(read("a/timeseries.csv"), read("c/timeseries.csv"));
}

#[test]
fn snapshot_files_seed_a_new_run() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.json"), r#"{"parameters": {"T": 0.01}, "output": {"snapshot_stride": 1000}}"#).unwrap();
    assert_eq!(kwc(tmp.path(), &["run", "--config", "c.json", "--out", "a"]).status.code(), Some(0));
    fs::create_dir_all(tmp.path().join("next")).unwrap();
    let cfg = r#"{
        "parameters": {"T": 0.01},
        "initial": {
            "eta": {"kind": "file", "path": "../a/snapshots/eta_001000.csv"},
            "theta": {"kind": "file", "path": "../a/snapshots/theta_001000.csv"},
            "prepare_theta": false
        }
    }"#;
    fs::write(tmp.path().join("next/c.json"), cfg).unwrap();
    let out = kwc(tmp.path(), &["run", "--config", "next/c.json", "--out", "b"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let first = column(&fs::read_to_string(tmp.path().join("a/timeseries.csv")).unwrap(), "E_total");
    let second = column(&fs::read_to_string(tmp.path().join("b/timeseries.csv")).unwrap(), "E_total");
    assert_eq!(first.last(), second.first());
}

#[test]
fn validate_rejects_vanishing_mobility() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(kwc(tmp.path(), &["validate"]).status.code(), Some(0));
    fs::write(tmp.path().join("bad.json"), r#"{"model": {"alpha0_offset": 0, "alpha0_bump": 0}}"#).unwrap();
    let out = kwc(tmp.path(), &["validate", "--config", "bad.json", "--out", "v"]);
    assert_ne!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&fs::read(tmp.path().join("v/validation.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    let summary = stdout_json(&out);
    let failing: Vec<&str> = summary["assertions"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|a| a["passed"] == false)
        .map(|a| a["name"].as_str().unwrap())
        .collect();
    assert_eq!(failing, vec!["A3: inf alpha0 > 0"]);
}

#[test]
fn failed_run_writes_failure_report() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("bad.json"),
        r#"{"parameters": {"T": 0.01}, "model": {"alpha0_offset": 0, "alpha0_bump": 0}}"#,
    )
    .unwrap();
    let out = kwc(tmp.path(), &["run", "--config", "bad.json", "--out", "o"]);
    assert_eq!(out.status.code(), Some(1));
    let failure: Value = serde_json::from_slice(&fs::read(tmp.path().join("o/failure.json")).unwrap()).unwrap();
    assert_eq!(failure["status"], "failed");
    assert!(!failure["errors"].as_array().unwrap().is_empty());
    let manifest: Value = serde_json::from_slice(&fs::read(tmp.path().join("o/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["passed"], false);
}

#[test]
fn config_errors_exit_with_usage_code() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("typo.json"), r#"{"parameters": {"kapa": 0.1, "kappa": -1}}"#).unwrap();
    let out = kwc(tmp.path(), &["run", "--config", "typo.json"]);
    assert_eq!(out.status.code(), Some(2));
    let report = stdout_json(&out);
    assert_eq!(report["status"], "invalid_config");
    let text = report["violations"].to_string();
    assert!(text.contains("did you mean `kappa`?"), "{text}");
    assert!(!tmp.path().join("out").exists());

    assert_eq!(kwc(tmp.path(), &["run", "--threads", "0"]).status.code(), Some(2));
    assert_eq!(kwc(tmp.path(), &["experiment", "nope"]).status.code(), Some(2));
    assert_eq!(kwc(tmp.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn experiment_writes_report_and_reproduces_from_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = kwc(tmp.path(), &["experiment", "energy_dissipation", "--out", "x", "--threads", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = tmp.path().join("x/energy_dissipation");
    let report: Value = serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap();
    assert!(report["assertions"].as_array().unwrap().iter().all(|a| a["passed"] == true));
    assert!(dir.join("timeseries_parabolic.csv").is_file());

    let again = kwc(tmp.path(), &["experiment", "energy_dissipation", "--config", "x/energy_dissipation/manifest.json", "--out", "y"]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(
        fs::read(dir.join("report.json")).unwrap(),
        fs::read(tmp.path().join("y/energy_dissipation/report.json")).unwrap()
    );
}
