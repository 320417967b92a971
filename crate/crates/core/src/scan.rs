//! Parameter sweeps: two-box cutoff staircases and maps over the ordered
//! three-box probability triangle.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::removal::cutoff_two_box;
use crate::solver::{best_expectation, build_matrix, solve_zero_sum, GameConfig, Regime};
use crate::strategy::{enumerate_monotone, ProbVector, Strategy};

/// Largest quota accepted by [`scan_cutoffs`].
pub const CUTOFF_N_MAX: u32 = 12;

/// Default number of steps along each side of the triangle.
pub const DEFAULT_RESOLUTION: u32 = 200;

/// Value substituted for a zero third-box probability on the triangle edge.
pub const EDGE_P3: f64 = 1e-9;

/// Secondary weight above which a minimax solution counts as mixed.
pub const MIXED_THRESHOLD: f64 = 1e-4;

/// Shortest decimal form of `x` rounded to 10 significant digits.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.9e}").parse().expect("formatted float parses");
    rounded.to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffRow {
    pub n: u32,
    pub a: u32,
    pub b: u32,
    /// Probability at which `<a,b>` and `<a-1,b+1>` tie in expectation.
    pub p_cutoff: f64,
}

/// Cutoffs between every adjacent pair of two-box allocations, `n = 1..=n_max`.
pub fn scan_cutoffs(n_max: u32) -> Result<Vec<CutoffRow>> {
    if n_max == 0 || n_max > CUTOFF_N_MAX {
        return Err(GameError::arg(format!(
            "n_max must lie in 1..={CUTOFF_N_MAX}, got {n_max}"
        )));
    }
    let jobs: Vec<(u32, u32)> = (1..=n_max).flat_map(|n| (1..=n).map(move |a| (n, a))).collect();
    jobs.par_iter()
        .map(|&(n, a)| {
            Ok(CutoffRow {
                n,
                a,
                b: n - a,
                p_cutoff: cutoff_two_box(a, n - a)?,
            })
        })
        .collect()
}

pub fn write_cutoffs_csv<W: Write>(rows: &[CutoffRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "a", "b", "p_cutoff"])?;
    for r in rows {
        out.write_record([r.n.to_string(), r.a.to_string(), r.b.to_string(), fmt_sig(r.p_cutoff)])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanMode {
    Expectation,
    MinimaxSeparate,
    MinimaxCommon,
}

impl fmt::Display for ScanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanMode::Expectation => "expectation",
            ScanMode::MinimaxSeparate => "minimax-separate",
            ScanMode::MinimaxCommon => "minimax-common",
        })
    }
}

impl FromStr for ScanMode {
    type Err = GameError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expectation" => Ok(ScanMode::Expectation),
            "minimax-separate" => Ok(ScanMode::MinimaxSeparate),
            "minimax-common" => Ok(ScanMode::MinimaxCommon),
            other => Err(GameError::arg(format!(
                "unknown scan mode {other:?}; expected expectation, minimax-separate or minimax-common"
            ))),
        }
    }
}

/// One grid point of a triangle scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub p: [f64; 3],
    /// Zero probabilities were lifted to [`EDGE_P3`].
    pub perturbed: bool,
    /// Winning strategy, `MIXED`, or empty on error.
    pub result: String,
    /// Strategies with positive weight and their weights (one entry, weight
    /// 1, for a pure or expectation result).
    pub support: Vec<(Strategy, f64)>,
    /// Expected excess throws of the winner, or the game value.
    pub value: Option<f64>,
    pub error: Option<String>,
}

/// Barycentric grid over the triangle with corners `(1,0,0)`, `(1/2,1/2,0)`
/// and `(1/3,1/3,1/3)`, i.e. all ordered vectors `p1 >= p2 >= p3`. Points
/// run with the weight on the uniform corner outermost, then on the
/// `(1/2,1/2,0)` corner.
pub fn ternary_grid(resolution: u32) -> Vec<([f64; 3], bool)> {
    let r = resolution as f64;
    let mut pts = Vec::new();
    for l in 0..=resolution {
        for j in 0..=resolution - l {
            let i = resolution - j - l;
            let (wi, wj, wl) = (i as f64 / r, j as f64 / r, l as f64 / r);
            let mut p = [
                wi + wj / 2.0 + wl / 3.0,
                wj / 2.0 + wl / 3.0,
                wl / 3.0,
            ];
            let lifted: Vec<usize> = (0..3).filter(|&k| p[k] <= 0.0).collect();
            if !lifted.is_empty() {
                // take the added mass proportionally from the other boxes so
                // their order survives
                let rest: f64 = p.iter().sum();
                let scale = 1.0 - EDGE_P3 * lifted.len() as f64 / rest;
                for x in p.iter_mut() {
                    *x = if *x <= 0.0 { EDGE_P3 } else { *x * scale };
                }
            }
            pts.push((p, !lifted.is_empty()));
        }
    }
    pts
}

fn evaluate_point(mode: ScanMode, p: [f64; 3], strategies: &[Strategy]) -> Result<(String, Vec<(Strategy, f64)>, f64)> {
    let probs = ProbVector::new(p.to_vec())?;
    match mode {
        ScanMode::Expectation => {
            let best = best_expectation(strategies, &probs)?;
            let e = crate::removal::expect_general(&best, &probs)?;
            Ok((best.to_string(), vec![(best, 1.0)], e))
        }
        ScanMode::MinimaxSeparate | ScanMode::MinimaxCommon => {
            let regime = if mode == ScanMode::MinimaxCommon {
                Regime::Common
            } else {
                Regime::Separate
            };
            let m = build_matrix(strategies, &GameConfig::new(regime, probs))?;
            let sol = solve_zero_sum(&m)?;
            let mut support: Vec<(Strategy, f64)> = sol
                .support
                .iter()
                .map(|&i| (strategies[i].clone(), sol.row_mix[i]))
                .collect();
            support.sort_by(|a, b| b.1.total_cmp(&a.1));
            let mixed = support.len() > 1 && support[1].1 > MIXED_THRESHOLD;
            let label = if mixed {
                "MIXED".to_string()
            } else {
                support[0].0.to_string()
            };
            Ok((label, support, sol.value))
        }
    }
}

/// Map the best strategy (or minimax solution) over the ordered triangle
/// for quota `n`, using the nonincreasing three-box strategies.
pub fn scan_ternary(n: u32, mode: ScanMode, resolution: u32) -> Result<Vec<ScanPoint>> {
    if n == 0 {
        return Err(GameError::arg("quota must be positive"));
    }
    if resolution == 0 {
        return Err(GameError::arg("resolution must be positive"));
    }
    let strategies = enumerate_monotone(n, 3);
    Ok(ternary_grid(resolution)
        .par_iter()
        .map(|&(p, perturbed)| match evaluate_point(mode, p, &strategies) {
            Ok((result, support, value)) => ScanPoint {
                p,
                perturbed,
                result,
                support,
                value: Some(value),
                error: None,
            },
            Err(e) => ScanPoint {
                p,
                perturbed,
                result: String::new(),
                support: Vec::new(),
                value: None,
                error: Some(e.to_string()),
            },
        })
        .collect())
}

pub fn write_ternary_csv<W: Write>(points: &[ScanPoint], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["p1", "p2", "p3", "perturbed", "result", "support", "weights", "value", "error"])?;
    for pt in points {
        let support: Vec<String> = pt.support.iter().map(|(s, _)| s.to_string()).collect();
        let weights: Vec<String> = pt.support.iter().map(|(_, w)| fmt_sig(*w)).collect();
        out.write_record([
            fmt_sig(pt.p[0]),
            fmt_sig(pt.p[1]),
            fmt_sig(pt.p[2]),
            pt.perturbed.to_string(),
            pt.result.clone(),
            support.join(";"),
            weights.join(";"),
            pt.value.map(fmt_sig).unwrap_or_default(),
            pt.error.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
