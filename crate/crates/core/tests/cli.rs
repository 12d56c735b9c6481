use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn normconst(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_normconst")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_seq_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pts.csv");
    let (code, stdout, _) = normconst(&["gen-seq", "--kind", "halton", "--m", "64", "--p", "2"]);
    assert_eq!(code, 0);
    let (code, _, _) = normconst(&["gen-seq", "--kind", "halton", "--m", "64", "--p", "2", "--out", path(&file)]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_to_string(&file).unwrap(), stdout);
    assert!(stdout.starts_with("x1,x2\n0,0\n0.5,"));
}

#[test]
fn discrepancy_from_file_equals_generated() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pts.csv");
    normconst(&["gen-seq", "--kind", "uniform", "--m", "30", "--p", "2", "--seed", "4", "--out", path(&file)]);
    let (code, a, _) = normconst(&["discrepancy", "--input", path(&file)]);
    assert_eq!(code, 0);
    let (_, b, _) = normconst(&["discrepancy", "--kind", "uniform", "--m", "30", "--p", "2", "--seed", "4"]);
    assert_eq!(json(&a)["value"], json(&b)["value"]);
}

#[test]
fn discrepancy_over_budget_is_a_validation_error() {
    let (code, _, err) = normconst(&["discrepancy", "--kind", "halton", "--m", "200", "--p", "4", "--budget", "1000"]);
    assert_eq!(code, 1);
    assert!(!err.is_empty());
}

#[test]
fn malformed_point_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.csv");
    std::fs::write(&file, "x1,x2\n0.1,0.2\n0.3\n").unwrap();
    let (code, _, _) = normconst(&["discrepancy", "--input", path(&file)]);
    assert_eq!(code, 1);
    std::fs::write(&file, "x1\n1.5\n").unwrap();
    let (code, _, _) = normconst(&["discrepancy", "--input", path(&file)]);
    assert_eq!(code, 1);
}

#[test]
fn integrate_reports_relative_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    std::fs::write(&model, r#"{"model": "gaussian", "n": 8, "p": 1, "seed": 2}"#).unwrap();
    let (code, out, _) = normconst(&["integrate", "--model", path(&model), "--m", "1600", "--t-spec", "log"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert!(v["rel_error"].as_f64().unwrap().abs() < 0.5);

    std::fs::write(&model, r#"{"model": "poisson", "n": 8, "p": 1}"#).unwrap();
    let (code, _, _) = normconst(&["integrate", "--model", path(&model), "--m", "16"]);
    assert_eq!(code, 1);
}

#[test]
fn mmle_output_fields() {
    let (code, out, _) = normconst(&["mmle", "--lmm", "k=4,ni=5,seed=3", "--m", "512"]);
    assert_eq!(code, 0);
    let v = json(&out);
    for key in ["theta_tilde", "oracle_mmle", "gap", "per_group_logs", "per_m_trace"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    assert_eq!(v["per_group_logs"].as_array().unwrap().len(), 4);
    assert!(v["gap"].as_f64().unwrap() < 1e-2);
}

#[test]
fn reproduce_tables_csv_and_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.csv");
    let args = ["reproduce-tables", "--replicates", "40", "--p-list", "1", "--n-list", "8,16", "--m-list", "400,800"];
    let (code, _, _) = normconst(&[&args[..], &["--out", path(&out)]].concat());
    assert_eq!(code, 0);
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "p,n,m,mean_mc,q025_mc,q975_mc,mean_qmc");
    assert_eq!(csv.lines().count(), 5);

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"replicates": 40, "p_list": [1], "n_list": [8, 16], "m_list": [400, 800]}"#).unwrap();
    let (code, from_file, _) = normconst(&["reproduce-tables", "--config", path(&cfg)]);
    assert_eq!(code, 0);
    assert_eq!(from_file, csv);

    std::fs::write(&cfg, r#"{"replicates": 40, "bogus": 1}"#).unwrap();
    let (code, _, _) = normconst(&["reproduce-tables", "--config", path(&cfg)]);
    assert_eq!(code, 1);
}

#[test]
fn bounds_json_is_log_space_consistent() {
    let (code, out, _) =
        normconst(&["bounds", "--kind", "hk-variation", "--n", "50", "--p", "3", "--gamma-prime", "0.4"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let value = v["value"].as_f64().unwrap();
    let log_value = v["log_value"].as_f64().unwrap();
    assert!((value.ln() - log_value).abs() < 1e-12);

    let (code, _, _) = normconst(&["bounds", "--kind", "mc-rate", "--n", "50", "--p", "3"]);
    assert_eq!(code, 1);
}
