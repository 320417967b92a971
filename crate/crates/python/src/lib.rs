//! Python bindings. Strategies are lists of counter counts and probability
//! vectors are lists of floats or the preset strings accepted by the CLI
//! (`"dice"`, `"zipf:4"`, `"uniform:3"`).

use alloc_game::common::critical_p_common;
use alloc_game::removal::{expect_general, expect_series, pmf_table, pmf_truncated};
use alloc_game::reproduce::{reproduce as run_reproduce, ReproduceOptions, Target};
use alloc_game::scan::scan_cutoffs;
use alloc_game::simulate::{estimate_expectation, simulate_race};
use alloc_game::solver::{build_matrix, certificate_gap, solve_matrix};
use alloc_game::strategy::{enumerate_compositions, enumerate_monotone, enumerate_respecting_ties};
use alloc_game::{GameConfig, GameError, PayoffBreakdown, ProbVector, Regime, SimResult, Strategy};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: GameError) -> PyErr {
    match e {
        GameError::Argument(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

#[derive(FromPyObject)]
enum ProbsArg {
    Preset(String),
    Values(Vec<f64>),
}

fn probs_of(arg: ProbsArg) -> PyResult<ProbVector> {
    match arg {
        ProbsArg::Preset(s) => s.parse().map_err(py_err),
        ProbsArg::Values(v) => ProbVector::new(v).map_err(py_err),
    }
}

fn strategy_of(counts: Vec<u32>) -> PyResult<Strategy> {
    Strategy::new(counts).map_err(py_err)
}

fn config(regime: &str, probs: ProbsArg, col_probs: Option<ProbsArg>) -> PyResult<GameConfig> {
    let regime: Regime = regime.parse().map_err(py_err)?;
    let mut cfg = GameConfig::new(regime, probs_of(probs)?);
    if let Some(q) = col_probs {
        cfg = cfg.with_col_probs(probs_of(q)?).map_err(py_err)?;
    }
    Ok(cfg)
}

fn breakdown_dict<'py>(py: Python<'py>, b: &PayoffBreakdown) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("p_win", b.p_win)?;
    d.set_item("p_draw", b.p_draw)?;
    d.set_item("p_lose", b.p_lose)?;
    d.set_item("value", b.value)?;
    Ok(d)
}

fn sim_dict<'py>(py: Python<'py>, s: &SimResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("trials", s.trials)?;
    d.set_item("mean", s.mean)?;
    d.set_item("std_error", s.std_error)?;
    d.set_item("wins", s.wins)?;
    d.set_item("draws", s.draws)?;
    d.set_item("losses", s.losses)?;
    d.set_item("cap_hits", s.cap_hits)?;
    Ok(d)
}

/// Expected excess throws; `engine` is `"integral"` or `"series"`.
#[pyfunction]
#[pyo3(signature = (strategy, probs, engine = "integral"))]
fn expect(strategy: Vec<u32>, probs: ProbsArg, engine: &str) -> PyResult<f64> {
    let (s, p) = (strategy_of(strategy)?, probs_of(probs)?);
    match engine {
        "integral" => expect_general(&s, &p),
        "series" => expect_series(&s, &p),
        other => return Err(PyValueError::new_err(format!("unknown engine {other:?}"))),
    }
    .map_err(py_err)
}

/// `P(X = r)` for `r = 0..=max_r`, or until the tail mass is negligible.
#[pyfunction]
#[pyo3(signature = (strategy, probs, max_r = None))]
fn pmf(strategy: Vec<u32>, probs: ProbsArg, max_r: Option<u64>) -> PyResult<Vec<f64>> {
    let (s, p) = (strategy_of(strategy)?, probs_of(probs)?);
    match max_r {
        Some(m) => pmf_table(&s, &p, m),
        None => pmf_truncated(&s, &p).map(|t| t.into_iter().map(|x| x.probability).collect()),
    }
    .map_err(py_err)
}

/// Win, draw and loss probabilities of `row` against `col`.
#[pyfunction]
#[pyo3(signature = (row, col, probs, regime = "common", col_probs = None))]
fn payoff<'py>(
    py: Python<'py>,
    row: Vec<u32>,
    col: Vec<u32>,
    probs: ProbsArg,
    regime: &str,
    col_probs: Option<ProbsArg>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = config(regime, probs, col_probs)?;
    let b = cfg.payoff(&strategy_of(row)?, &strategy_of(col)?).map_err(py_err)?;
    breakdown_dict(py, &b)
}

/// Allocations of `n` counters: `"ordered"` (respecting the probability
/// ranking, needs `probs`), `"monotone"` or `"all"`.
#[pyfunction]
#[pyo3(signature = (n, k, kind = "all", probs = None))]
fn strategies(n: u32, k: usize, kind: &str, probs: Option<ProbsArg>) -> PyResult<Vec<Vec<u32>>> {
    let list = match kind {
        "all" => enumerate_compositions(n, k),
        "monotone" => enumerate_monotone(n, k),
        "ordered" => {
            let p = probs.ok_or_else(|| PyValueError::new_err("ordered strategies need probs"))?;
            enumerate_respecting_ties(n, &probs_of(p)?)
        }
        other => return Err(PyValueError::new_err(format!("unknown strategy set {other:?}"))),
    };
    Ok(list.into_iter().map(|s| s.counts().to_vec()).collect())
}

/// Payoff matrix over `strategies`, rows for the row player.
#[pyfunction]
#[pyo3(signature = (strategies, probs, regime = "common", col_probs = None))]
fn matrix(strategies: Vec<Vec<u32>>, probs: ProbsArg, regime: &str, col_probs: Option<ProbsArg>) -> PyResult<Vec<Vec<f64>>> {
    let cfg = config(regime, probs, col_probs)?;
    let strats: Vec<Strategy> = strategies.into_iter().map(strategy_of).collect::<PyResult<_>>()?;
    Ok(build_matrix(&strats, &cfg).map_err(py_err)?.values)
}

/// Minimax solution of a zero-sum matrix game.
#[pyfunction]
fn solve<'py>(py: Python<'py>, values: Vec<Vec<f64>>) -> PyResult<Bound<'py, PyDict>> {
    let sol = solve_matrix(&values).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("value", sol.value)?;
    d.set_item("pure", sol.pure)?;
    d.set_item("support", sol.support.clone())?;
    d.set_item("row_mix", sol.row_mix.clone())?;
    d.set_item("col_mix", sol.col_mix.clone())?;
    d.set_item("certificate_gap", certificate_gap(&values, &sol))?;
    Ok(d)
}

/// Two-box cutoffs as `(n, a, b, p_cutoff)` tuples.
#[pyfunction]
fn cutoffs(n_max: u32) -> PyResult<Vec<(u32, u32, u32, f64)>> {
    Ok(scan_cutoffs(n_max).map_err(py_err)?.into_iter().map(|r| (r.n, r.a, r.b, r.p_cutoff)).collect())
}

/// Roots of `I_p(r, n + 1 - r) = 1/2`, ascending.
#[pyfunction]
fn critical_points(n: u32) -> PyResult<Vec<f64>> {
    critical_p_common(n).map_err(py_err)
}

/// Seeded simulation of a race, or of one player's removal when `col` is
/// omitted.
#[pyfunction]
#[pyo3(signature = (row, probs, col = None, regime = "common", col_probs = None, trials = 100_000, seed = 1))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    row: Vec<u32>,
    probs: ProbsArg,
    col: Option<Vec<u32>>,
    regime: &str,
    col_probs: Option<ProbsArg>,
    trials: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let me = strategy_of(row)?;
    let sim = match col {
        Some(c) => {
            let cfg = config(regime, probs, col_probs)?;
            simulate_race(&me, &strategy_of(c)?, &cfg, trials, seed)
        }
        None => estimate_expectation(&me, &probs_of(probs)?, trials, seed),
    }
    .map_err(py_err)?;
    sim_dict(py, &sim)
}

/// Runs a reference target; returns `(passed, summary_lines)`.
#[pyfunction]
#[pyo3(signature = (target, seed = 1, trials = None))]
fn reproduce(target: &str, seed: u64, trials: Option<u64>) -> PyResult<(bool, Vec<String>)> {
    let t: Target = target.parse().map_err(py_err)?;
    let rep = run_reproduce(t, &ReproduceOptions { seed, trials }).map_err(py_err)?;
    Ok((rep.passed, rep.summary_lines()))
}

#[pymodule]
fn alloc_game_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(expect, m)?)?;
    m.add_function(wrap_pyfunction!(pmf, m)?)?;
    m.add_function(wrap_pyfunction!(payoff, m)?)?;
    m.add_function(wrap_pyfunction!(strategies, m)?)?;
    m.add_function(wrap_pyfunction!(matrix, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(cutoffs, m)?)?;
    m.add_function(wrap_pyfunction!(critical_points, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
