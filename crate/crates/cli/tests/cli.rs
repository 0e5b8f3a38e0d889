use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bri(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bri")).args(args).current_dir(dir).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

const TWO_CYCLES: &str = "S 4\nX 4\nN 2\nM 0 1\ndS 2\ndX 2\n1 1 0 0\n0 1 1 0\n0 0 1 1\n1 0 0 1\n";
const U: &str = "a,b\n0.8,0.2\n0.35,0.65\n0.6,0.4\n0.1,0.9\n";
const T: &str = "0,1,2,3\n0.91,0.03,0.03,0.03\n0.03,0.91,0.03,0.03\n0.03,0.03,0.91,0.03\n0.03,0.03,0.03,0.91\n";

fn scheme_dir() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("cycles.txt"), TWO_CYCLES).unwrap();
    fs::write(dir.path().join("u.csv"), U).unwrap();
    fs::write(dir.path().join("t.csv"), T).unwrap();
    fs::write(
        dir.path().join("scheme.json"),
        r#"{"bri": "cycles.txt", "eavesdropper": "u.csv", "main": "t.csv", "seed_reuse_blocks": 2}"#,
    )
    .unwrap();
    dir
}

#[test]
fn coset_reports_fifteen_messages() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&bri(&["coset", "-l", "8", "-b", "4"], dir.path()));
    let r = &v["result"];
    assert_eq!(r["message_count"], 15);
    assert_eq!(r["message_count_formula"], 15);
    assert_eq!(r["certificate"]["valid"], true);
    let msgs = r["messages"].as_array().unwrap();
    assert_eq!(msgs.len(), 15);
    assert!(msgs.iter().all(|m| m["lambda2"].as_f64().unwrap() <= 0.0625 + 1e-9));
    assert_eq!(v["meta"]["seed"], 0);
}

#[test]
fn decompose_writes_certified_graphs() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&bri(&["decompose", "--ds", "3", "--dx", "3", "--k", "2", "--dir", "out", "--seed", "7"], dir.path()));
    let r = &v["result"];
    assert_eq!(r["graphs"].as_array().unwrap().len(), 4);
    assert_eq!(r["all_ramanujan"], true);
    assert_eq!(r["union_complete"], true);
    assert_eq!(v["meta"]["seed"], 7);
    for g in r["graphs"].as_array().unwrap() {
        assert!(g["max_nontrivial"].as_f64().unwrap() <= 8f64.sqrt() + 1e-9);
        assert!(dir.path().join("out").join(g["file"].as_str().unwrap()).exists());
    }
    let cert = json(&bri(&["certify", "out/bri.txt"], dir.path()));
    assert_eq!(cert["result"]["valid"], true);
}

#[test]
fn leakage_report_orders_leakages() {
    let dir = scheme_dir();
    let v = json(&bri(&["leakage", "scheme.json"], dir.path()));
    let r = &v["result"];
    assert_eq!(r["ordering_holds"], true);
    assert!(r["failures"].as_array().unwrap().is_empty());
    let (l_str, l_sem) = (r["l_str"].as_f64().unwrap(), r["l_sem"].as_f64().unwrap());
    assert!(l_str <= l_sem + 1e-9 && l_sem <= r["max_bound"].as_f64().unwrap());
    let reuse = &r["seed_reuse"];
    assert_eq!(reuse["leakage_holds"], true);
    assert_eq!(reuse["error_holds"], true);
    assert!((reuse["bounds"]["rate_factor"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = scheme_dir();
    for args in [&["leakage", "scheme.json"][..], &["selftest", "--format", "csv"][..], &["decompose", "--ds", "3", "--dx", "4", "--k", "1"][..]] {
        let a = bri(args, dir.path());
        let b = bri(args, dir.path());
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn csv_output_carries_meta_and_rows() {
    let dir = scheme_dir();
    let out = bri(&["leakage", "scheme.json", "--format", "csv", "--out", "report.csv"], dir.path());
    assert!(out.status.success());
    let text = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# meta {"));
    assert!(lines.next().unwrap().starts_with("m,label,divergence"));
    assert_eq!(lines.count(), 2);
}

#[test]
fn selftest_is_green() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&bri(&["selftest"], dir.path()));
    assert_eq!(v["result"]["passed"], true);
}

#[test]
fn trend_decreases_at_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let v = json(&bri(&["trend"], dir.path()));
    assert_eq!(v["result"]["hypothesis_met"], true);
    assert_eq!(v["result"]["strictly_decreasing"], true);
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = scheme_dir();
    let code = |args: &[&str]| bri(args, dir.path()).status.code().unwrap();
    assert_eq!(code(&["nonsense"]), 2);
    assert_eq!(code(&["coset", "-l", "8", "-b", "3"]), 2);
    assert_eq!(code(&["leakage", "scheme.json", "--eps", "0.9"]), 2);
    assert_eq!(code(&["certify", "missing.txt"]), 3);
    fs::write(dir.path().join("broken.txt"), "S 4\nX four\n").unwrap();
    assert_eq!(code(&["certify", "broken.txt"]), 4);
    fs::write(dir.path().join("bad.json"), r#"{"bri": "cycles.txt"}"#).unwrap();
    assert_eq!(code(&["leakage", "bad.json"]), 4);
    assert_eq!(code(&["leakage", "scheme.json", "--budget", "10"]), 5);
}

#[test]
fn failed_checks_still_exit_zero() {
    // Not biregular: message 0 appears three times in row 0.
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("odd.txt"), "S 2\nX 4\nN 2\nM 0 1\ndS 2\ndX 1\n0 0 0 1\n1 1 0 1\n").unwrap();
    let v = json(&bri(&["certify", "odd.txt"], dir.path()));
    assert_eq!(v["result"]["valid"], false);
    assert_eq!(v["result"]["messages"][0]["s_witness"], serde_json::json!([0, 3]));
}
