use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superindex")).args(args).output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const FLAT_3_1: &str = r#"{
  "superconnection": {
    "signature": {"m": 1, "D": 2, "odd_params": []},
    "bundle": {"p": 3, "q": 1}
  }
}"#;

/// `𝔸 = [[0, 1], [2, 0]]` over a point: odd but not self-adjoint.
const NOT_SELF_ADJOINT: &str = r#"{
  "superconnection": {
    "signature": {"m": 0, "D": 1, "odd_params": []},
    "bundle": {"p": 1, "q": 1},
    "components": {
      "0": [[{"terms": []}, {"terms": [{"exps": [], "re": 1.0}]}],
            [{"terms": [{"exps": [], "re": 2.0}]}, {"terms": []}]]
    }
  }
}"#;

#[test]
fn valid_flat_spec_passes() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "flat.json", FLAT_3_1);
    let out = run(&["validate", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["kind"], "superconnection");
    assert_eq!(r["passed"], true);
    assert!(r["tol_requested"].is_number() && r["tol_achieved"].is_number());
}

#[test]
fn non_self_adjoint_fails_validation() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "bad.json", NOT_SELF_ADJOINT);
    let out = run(&["validate", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["passed"], false);
}

#[test]
fn malformed_json_is_a_parse_failure() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "broken.json", "{\"superconnection\": ");
    assert_eq!(run(&["validate", "--spec", &spec]).status.code(), Some(1));
    assert_eq!(run(&["validate", "--spec", "/nonexistent/spec.json"]).status.code(), Some(1));
}

#[test]
fn chern_of_flat_bundle_is_its_superrank() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "flat.json", FLAT_3_1);
    let out = run(&["chern", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let terms = r["components"]["0"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["re"], 2.0);
}

#[test]
fn witten_index_of_the_oscillator() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "susy.json", r#"{"example": {"name": "susy_oscillator", "n": 16}}"#);
    let out = run(&["witten", "--spec", &spec]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["index"], 1);
    assert_eq!(r["rank"], serde_json::json!([16, 15]));
    assert!(r["tol_achieved"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn index_on_spectral_flow_has_two_charts() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "sf.json", r#"{"example": {"name": "spectral_flow", "resolution": 32}}"#);
    let out_path = dir.path().join("cocycle.json");
    let out = run(&["index", "--spec", &spec, "--out", out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["charts"].as_array().unwrap().len(), 2);
    assert_eq!(r["lambdas"], serde_json::json!([0.25, 0.5625]));
    assert_eq!(r["schema_version"], 1);
}

#[test]
fn uncovered_levels_fail_validation() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "cs.json", r#"{"example": {"name": "constant_spectrum", "resolution": 9}}"#);
    assert_eq!(run(&["index", "--spec", &spec, "--lambda", "1.0"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--spec", &spec, "--lambda", "1.0"]).status.code(), Some(2));
    assert_eq!(run(&["validate", "--spec", &spec, "--lambda", "0.5,2"]).status.code(), Some(0));
}

#[test]
fn expanded_example_round_trips_through_the_cli() {
    let dir = TempDir::new().unwrap();
    let out = run(&["example", "random", "--seed", "7", "--expand"]);
    assert_eq!(out.status.code(), Some(0));
    let spec = write(&dir, "random.json", std::str::from_utf8(&out.stdout).unwrap());
    let sg = run(&["semigroup", "--spec", &spec, "--format", "csv"]);
    assert_eq!(sg.status.code(), Some(0));
    let csv = String::from_utf8(sg.stdout).unwrap();
    assert!(csv.starts_with("path,value\n"));
    assert!(csv.lines().any(|l| l == "passed,true"));
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "sf.json", r#"{"example": {"name": "spectral_flow", "resolution": 16}}"#);
    let a = run(&["eta", "--spec", &spec, "--threads", "2"]);
    let b = run(&["eta", "--spec", &spec]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
