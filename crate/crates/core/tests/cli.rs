//! The `flatline` binary: exit codes, stdout reports, worker independence.

use std::path::PathBuf;
use std::process::{Command, Output};

fn flatline(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatline")).args(args).output().expect("binary runs")
}

#[test]
fn verify_passes_and_reports_json() {
    let out = flatline(&["verify", "weil", "degree", "--instances", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema"], "flatline/1");
    assert_eq!(report["all_pass"], true);
    assert_eq!(report["records"].as_array().unwrap().len(), 8);
}

#[test]
fn unknown_check_is_a_usage_error() {
    let out = flatline(&["verify", "nosuch"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nosuch"));
}

#[test]
fn failing_tolerance_sets_exit_code_one() {
    let out = flatline(&["verify", "deligne_unitary", "--instances", "2", "--tol", "deligne_unitary=0"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stdout_is_independent_of_worker_count() {
    let args = ["sweep", "--check", "torsion_routes", "--grid", "3", "--seed", "5"];
    let one = flatline(&[&args[..], &["--workers", "1"]].concat());
    let three = flatline(&[&args[..], &["--workers", "3"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, three.stdout);
    assert!(String::from_utf8_lossy(&one.stdout).starts_with("node_re,node_im,check"));
}

#[test]
fn degree_reads_json_input() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("degree_input.json");
    std::fs::write(&path, r#"{"field":"rationals","ideal_l":[],"ideal_lc":[],"logs":[[0.7,0.4]]}"#).unwrap();
    let out = flatline(&["degree", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["modulus"], "pii");
    assert!((v["deg_sharp"][0].as_f64().unwrap() + 0.7).abs() < 1e-15);
    assert!((v["deg_sharp"][1].as_f64().unwrap() + 0.4).abs() < 1e-15);
}

#[test]
fn torsion_routes_agree_from_the_command_line() {
    let out = flatline(&["torsion", "--chi", "0.5,0.3,1.2,-0.4"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["relative_difference"].as_f64().unwrap() < 1e-10);
}
