use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn sfpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sfpd")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn arg(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SINGLE_EDGE: &str = "n 2\ne 0 1 1\np 0 1\n";

#[test]
fn solve_fig5_with_bpd_costs_five() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("fig5_k3.sf");
    let gen = sfpd(&["gen", "fig5", "--k", "3", "--eps", "1/100", "--output", arg(&file)]);
    assert!(gen.status.success(), "{}", stderr(&gen));
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.starts_with("n 6\n"));
    let out = sfpd(&["solve", "--algo", "bpd", arg(&file)]);
    assert!(out.status.success());
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["total_cost"], "5/1");
    assert_eq!(json["k"], 3);
    assert!(json.get("trace").is_none());
}

#[test]
fn solve_single_edge_with_akr() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "single.sf", SINGLE_EDGE);
    let out = sfpd(&["solve", "--algo", "akr", arg(&file)]);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["total_cost"], "1/1");
    assert_eq!(json["bound_slack"], "0/1");
}

#[test]
fn trace_flag_includes_events() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "single.sf", SINGLE_EDGE);
    let out = sfpd(&["solve", "--trace", arg(&file)]);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(!json["trace"].as_array().unwrap().is_empty());
}

#[test]
fn disconnected_instance_exits_two_naming_the_pair() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "split.sf", "n 4\ne 0 1 1\ne 2 3 1\np 0 1\np 0 3\n");
    let out = sfpd(&["solve", "--algo", "bpd", arg(&file)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("pair 1 (0, 3)"), "{}", stderr(&out));
}

#[test]
fn malformed_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "bad.sf", "n 2\ne 0 1 -1\np 0 1\n");
    assert_eq!(sfpd(&["solve", arg(&file)]).status.code(), Some(1));
    assert_eq!(sfpd(&["solve", "/nonexistent/instance.sf"]).status.code(), Some(1));
    assert_eq!(sfpd(&["gen", "fig5", "--k", "3", "--eps", "x"]).status.code(), Some(1));
}

#[test]
fn random_generation_is_reproducible() {
    let a = sfpd(&["gen", "random", "--n", "8", "--k", "2", "--seed", "0"]);
    let b = sfpd(&["gen", "random", "--n", "8", "--k", "2", "--seed", "0"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = sfpd(&["gen", "random", "--n", "8", "--k", "2", "--seed", "1"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn fig4_generation_self_validates() {
    let out = sfpd(&["gen", "fig4", "--k", "5", "--eps", "1/100"]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn fig1_generation_reports_validation_outcome() {
    let out = sfpd(&["gen", "fig1", "--eps", "1/100"]);
    match out.status.code() {
        Some(0) => assert!(stdout(&out).starts_with("n ")),
        Some(3) => assert!(stderr(&out).contains("reconstruction"), "{}", stderr(&out)),
        other => panic!("unexpected exit {other:?}: {}", stderr(&out)),
    }
}

#[test]
fn compare_single_edge_has_unit_ratios() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "single.sf", SINGLE_EDGE);
    let out = sfpd(&["compare", "--json", arg(&file)]);
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["opt"], "1/1");
    for row in json["rows"].as_array().unwrap() {
        assert_eq!(row["ratio"], "1/1");
        assert_eq!(row["bound_ok"], true);
    }
}

#[test]
fn compare_fig4_table() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("fig4.sf");
    sfpd(&["gen", "fig4", "--k", "3", "--output", arg(&file)]);
    let table = stdout(&sfpd(&["compare", arg(&file)]));
    assert!(table.contains("495/299"), "{table}");
    assert!(table.contains("300/299"), "{table}");
}

#[test]
fn oracle_budget_from_environment_downgrades_compare() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "single.sf", SINGLE_EDGE);
    let out = Command::new(env!("CARGO_BIN_EXE_sfpd"))
        .args(["compare", "--json", arg(&file)])
        .env("SFPD_ORACLE_BUDGET", "0")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stderr(&out).contains("warning"));
    let json: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["opt"], Value::Null);
}

#[test]
fn empty_batch_is_header_only() {
    let out = sfpd(&["batch", "--seeds", "0..0"]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.starts_with("# sfpd-batch v1\nfamily,seed,"));
}

#[test]
fn batch_with_figures_reports_fig5_ratios() {
    let out = sfpd(&["batch", "--seeds", "0..5", "--figures", "--mixed-phase-fallback"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = stdout(&out);
    assert!(csv.contains("fig5,k5,10,13,5,126/25,9/1,9/1,25/14,25/14"), "{csv}");
    assert!(stderr(&out).contains("max bpd ratio on fig5: 25/14"));
}

#[test]
fn strict_batch_counts_mixed_phase_paths_as_violations() {
    let out = sfpd(&["batch", "--seeds", "3..4"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("mixes arcs from both augmentation phases"), "{}", stderr(&out));
}

#[test]
fn verify_accepts_a_stored_result_and_rejects_tampering() {
    let dir = TempDir::new().unwrap();
    let inst = dir.path().join("fig4.sf");
    sfpd(&["gen", "fig4", "--k", "3", "--output", arg(&inst)]);
    let result = dir.path().join("result.json");
    let solved = sfpd(&["solve", "--algo", "bpd", arg(&inst), "--output", arg(&result)]);
    assert!(solved.status.success());
    let ok = sfpd(&["verify", arg(&inst), arg(&result)]);
    assert!(ok.status.success(), "{}", stdout(&ok));

    let mut json: Value = serde_json::from_str(&std::fs::read_to_string(&result).unwrap()).unwrap();
    json["total_cost"] = "1/1".into();
    let tampered = write(&dir, "tampered.json", &json.to_string());
    let bad = sfpd(&["verify", arg(&inst), arg(&tampered)]);
    assert_eq!(bad.status.code(), Some(4));
    assert!(stdout(&bad).contains("violation cost"), "{}", stdout(&bad));
}
