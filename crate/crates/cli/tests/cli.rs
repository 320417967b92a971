use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_alloc-game")).args(args).output().unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn expect_ten_counters_in_one_box() {
    let v = json_ok(&["expect", "--strategy", "10,0,0", "--probs", "0.7,0.2,0.1"]);
    assert!((v["expectation"].as_f64().unwrap() - 30.0 / 7.0).abs() < 1e-9);
    let s = json_ok(&["expect", "--strategy", "10,0,0", "--probs", "0.7,0.2,0.1", "--engine", "series"]);
    assert!((s["expectation"].as_f64().unwrap() - 30.0 / 7.0).abs() < 1e-8);
}

#[test]
fn expect_engines_agree_on_two_boxes() {
    let a = json_ok(&["expect", "--strategy", "3,2", "--probs", "0.6,0.4", "--engine", "two-box", "--tol", "1e-12"]);
    let b = json_ok(&["expect", "--strategy", "3,2", "--probs", "0.6,0.4"]);
    assert!((a["expectation"].as_f64().unwrap() - b["expectation"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn monte_carlo_expectation_reports_std_error() {
    let v = json_ok(&["expect", "--strategy", "1,1,1", "--probs", "uniform:3", "--engine", "monte-carlo", "--trials", "50000"]);
    let (mean, se) = (v["expectation"].as_f64().unwrap(), v["std_error"].as_f64().unwrap());
    assert!((mean - 2.5).abs() < 4.0 * se, "{mean} ± {se}");
}

#[test]
fn solve_seven_counter_mixed_game() {
    let v = json_ok(&["solve", "--n", "7", "--k", "3", "--probs", "0.75,0.125,0.125", "--regime", "common"]);
    assert_eq!(v["pure"], false);
    let support = v["support"].as_array().unwrap();
    let want = [("<7,0,0>", 0.156), ("<6,1,0>", 0.189), ("<5,1,1>", 0.655)];
    assert_eq!(support.len(), 3);
    for (s, w) in want {
        let got = support.iter().find(|x| x["strategy"] == s).unwrap()["weight"].as_f64().unwrap();
        assert!((got - w).abs() <= 0.01, "{s}: {got}");
    }
}

#[test]
fn matrix_csv_feeds_solve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let p = path.to_str().unwrap();
    json_ok(&["matrix", "--n", "5", "--probs", "0.4,0.6", "--set", "all", "--out", p]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("strategy,\"<5,0>\",\"<4,1>\""), "{text}");
    let v = json_ok(&["solve", "--matrix", p]);
    assert_eq!(v["pure"], true);
    assert_eq!(v["support"][0]["strategy"], "<2,3>");
}

#[test]
fn payoff_breakdown_and_asymmetric_vectors() {
    let v = json_ok(&["payoff", "--row", "2,0", "--col", "1,1", "--probs", "1,0", "--col-probs", "0.5,0.5", "--regime", "separate"]);
    assert!((v["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
    let w = json_ok(&["payoff", "--row", "2,3", "--col", "1,4", "--probs", "0.4,0.6"]);
    assert!((w["value"].as_f64().unwrap() - 0.33).abs() < 0.005);
}

#[test]
fn pmf_mass_and_csv() {
    let v = json_ok(&["pmf", "--strategy", "2,1,0", "--probs", "0.6,0.3,0.1"]);
    assert!(v["mass"].as_f64().unwrap() >= 1.0 - 1e-10);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pmf.csv");
    json_ok(&["pmf", "--strategy", "1,1", "--probs", "0.5,0.5", "--max-r", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "r,probability\n0,0.5\n1,0.25\n2,0.125\n3,0.0625\n");
}

#[test]
fn cutoffs_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cut.csv");
    json_ok(&["cutoffs", "--n-max", "3", "--out", path.to_str().unwrap()]);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,a,b,p_cutoff"));
    assert_eq!(lines.next(), Some("1,1,0,0.5"));
    assert_eq!(text.lines().count(), 1 + 6);
}

#[test]
fn scan_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for (path, threads) in [(&a, "1"), (&b, "3")] {
        let out = Command::new(env!("CARGO_BIN_EXE_alloc-game"))
            .args(["scan", "--n", "4", "--mode", "minimax-common", "--resolution", "10", "--out", path.to_str().unwrap()])
            .env("ALLOC_GAME_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("p1,p2,p3,perturbed,result,support,weights,value,error\n"));
    assert_eq!(text.lines().count(), 1 + 66);
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "--row", "2,1,0", "--col", "1,1,1", "--probs", "0.6,0.3,0.1", "--regime", "separate", "--trials", "20000", "--seed", "9"];
    assert_eq!(json_ok(&args), json_ok(&args));
    let m = json_ok(&["simulate", "--row", "2,1", "--col", "1,2", "--probs", "0.6,0.4", "--margin", "--trials", "1000"]);
    assert_eq!(m["quantity"], "margin");
}

#[test]
fn reproduce_table1_passes() {
    let v = json_ok(&["reproduce", "table1", "--trials", "50000"]);
    assert_eq!(v["passed"], true);
    assert_eq!(v["data"]["strategies"][0], "<0,5>");
}

#[test]
fn reproduce_reports_reference_inconsistencies_without_failing() {
    let v = json_ok(&["reproduce", "table3"]);
    assert_eq!(v["passed"], true);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().any(|c| c["note"] == "reference-inconsistency" && c["kind"] == "info"));
}

#[test]
fn reproduce_table4_exits_one_on_printed_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t4.csv");
    let out = run(&["reproduce", "table4", "--trials", "20000", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for c in v["checks"].as_array().unwrap() {
        if c["passed"] == false {
            assert!(c["name"].as_str().unwrap().ends_with("integral vs reference"), "{c}");
        }
    }
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("check,kind,passed,expected,got,tol,note\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["expect", "--strategy", "1,x", "--probs", "0.5,0.5"]).status.code(), Some(2));
    assert_eq!(run(&["expect", "--strategy", "1,1", "--probs", "0.5,0.4"]).status.code(), Some(2));
    assert_eq!(run(&["reproduce", "table9"]).status.code(), Some(2));
    assert_eq!(run(&["expect", "--strategy", "1,1", "--probs", "0.5,0.5", "--tol", "0.5"]).status.code(), Some(2));
    assert_eq!(run(&["payoff", "--row", "1,1", "--col", "2,0", "--probs", "1,0"]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let threads = Command::new(env!("CARGO_BIN_EXE_alloc-game"))
        .args(["cutoffs"])
        .env("ALLOC_GAME_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}
