use alloc_game::reproduce::{reproduce, ReproduceOptions, Target};
use alloc_game::scan::{scan_ternary, write_ternary_csv, ScanMode};
use alloc_game::solver::{build_matrix, solve_zero_sum};
use alloc_game::strategy::enumerate_monotone;
use alloc_game::{GameConfig, PayoffMatrix, ProbVector, Regime, Strategy};

#[test]
fn matrix_csv_round_trip() {
    let probs: ProbVector = "0.6,0.3,0.1".parse().unwrap();
    let m = build_matrix(&enumerate_monotone(4, 3), &GameConfig::new(Regime::Separate, probs)).unwrap();
    let mut buf = Vec::new();
    m.write_csv(&mut buf).unwrap();
    let back = PayoffMatrix::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back, m);
    assert_eq!(solve_zero_sum(&back).unwrap(), solve_zero_sum(&m).unwrap());
}

#[test]
fn serde_forms() {
    let s: Strategy = "<2,1,0>".parse().unwrap();
    assert_eq!(s.to_string(), "<2,1,0>");
    let regime: Regime = serde_json::from_str("\"separate\"").unwrap();
    assert_eq!(regime, Regime::Separate);
    let p: ProbVector = serde_json::from_str("[0.5, 0.5]").unwrap();
    assert_eq!(p.probs(), &[0.5, 0.5]);
    assert!(serde_json::from_str::<ProbVector>("[0.5, 0.6]").is_err());
}

#[test]
fn scan_csv_is_deterministic() {
    let render = || {
        let pts = scan_ternary(3, ScanMode::MinimaxSeparate, 8).unwrap();
        let mut buf = Vec::new();
        write_ternary_csv(&pts, &mut buf).unwrap();
        buf
    };
    assert_eq!(render(), render());
}

#[test]
fn reproduce_report_serializes() {
    let rep = reproduce(Target::Mixed7, &ReproduceOptions::default()).unwrap();
    let v = serde_json::to_value(&rep).unwrap();
    assert_eq!(v["target"], "mixed7");
    assert_eq!(v["passed"], true);
    assert!(rep.summary_lines().iter().all(|l| l.starts_with("[PASS]") || l.starts_with("[INFO]")));
}
