//! Payoff matrices over a strategy set and their zero-sum solutions.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::common::{payoff_common_general, payoff_common_two_box, PayoffBreakdown, DEFAULT_STATE_CAP};
use crate::error::{GameError, Result};
use crate::removal::expect_general;
use crate::separate::payoff_separate;
use crate::simulate::simulate_race;
use crate::specfun::Tolerance;
use crate::strategy::{ProbVector, Strategy};

/// How boxes are drawn each turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// One draw shared by both players.
    Common,
    /// Each player draws independently from their own vector.
    Separate,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Common => "common",
            Regime::Separate => "separate",
        })
    }
}

impl FromStr for Regime {
    type Err = GameError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "common" => Ok(Regime::Common),
            "separate" => Ok(Regime::Separate),
            other => Err(GameError::arg(format!(
                "unknown regime {other:?}; expected common or separate"
            ))),
        }
    }
}

/// Payoff evaluation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Exact,
    MonteCarlo { trials: u64, seed: u64 },
}

/// Everything needed to score one strategy against another.
#[derive(Debug, Clone, PartialEq)]
pub struct GameConfig {
    pub regime: Regime,
    pub row_probs: ProbVector,
    /// Column player's vector under separate throws; `None` means the same
    /// as the row player's.
    pub col_probs: Option<ProbVector>,
    pub state_cap: u128,
    pub tol: Tolerance,
    pub engine: Engine,
}

impl GameConfig {
    pub fn new(regime: Regime, probs: ProbVector) -> Self {
        GameConfig {
            regime,
            row_probs: probs,
            col_probs: None,
            state_cap: DEFAULT_STATE_CAP,
            tol: Tolerance::default(),
            engine: Engine::Exact,
        }
    }

    /// Give the column player their own vector (separate throws only).
    pub fn with_col_probs(mut self, probs: ProbVector) -> Result<Self> {
        if probs.len() != self.row_probs.len() {
            return Err(GameError::arg("both players' probability vectors need the same length"));
        }
        if self.regime == Regime::Common && probs != self.row_probs {
            return Err(GameError::arg(
                "a common throw uses one probability vector for both players",
            ));
        }
        self.col_probs = Some(probs);
        Ok(self)
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_state_cap(mut self, cap: u128) -> Self {
        self.state_cap = cap;
        self
    }

    pub fn col_probs(&self) -> &ProbVector {
        self.col_probs.as_ref().unwrap_or(&self.row_probs)
    }

    /// Whether swapping the players leaves the game unchanged.
    pub fn is_symmetric(&self) -> bool {
        self.col_probs.as_ref().is_none_or(|q| *q == self.row_probs)
    }

    /// Payoff to `me` (row) against `them` (column).
    pub fn payoff(&self, me: &Strategy, them: &Strategy) -> Result<PayoffBreakdown> {
        match self.engine {
            Engine::MonteCarlo { trials, seed } => Ok(simulate_race(me, them, self, trials, seed)?.breakdown()),
            Engine::Exact => match self.regime {
                Regime::Common => {
                    let p = self.row_probs.probs();
                    if p.len() == 2 && p[0] > 0.0 && p[0] < 1.0 && me.boxes() == 2 && them.boxes() == 2 {
                        payoff_common_two_box(me, them, p[0])
                    } else {
                        payoff_common_general(me, them, &self.row_probs, self.state_cap)
                    }
                }
                Regime::Separate => payoff_separate(me, them, &self.row_probs, self.col_probs(), self.state_cap),
            },
        }
    }
}

/// Expected payoff to the row player for every ordered strategy pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffMatrix {
    pub strategies: Vec<Strategy>,
    pub values: Vec<Vec<f64>>,
}

impl PayoffMatrix {
    pub fn new(strategies: Vec<Strategy>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = strategies.len();
        if n == 0 {
            return Err(GameError::arg("payoff matrix needs at least one strategy"));
        }
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(GameError::arg(format!("payoff matrix must be {n}x{n}")));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(GameError::arg("payoff matrix has non-finite entries"));
        }
        Ok(PayoffMatrix { strategies, values })
    }

    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }

    /// Largest violation of `values[i][j] = -values[j][i]`.
    pub fn antisymmetry_error(&self) -> f64 {
        let n = self.len();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.values[i][j] + self.values[j][i]).abs());
            }
        }
        worst
    }

    /// CSV with the strategy labels as header row and first column.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["strategy".to_string()];
        header.extend(self.strategies.iter().map(|s| s.to_string()));
        out.write_record(&header)?;
        for (s, row) in self.strategies.iter().zip(&self.values) {
            let mut rec = vec![s.to_string()];
            rec.extend(row.iter().map(|v| v.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let header = rdr.headers()?.clone();
        let strategies: Vec<Strategy> = header
            .iter()
            .skip(1)
            .map(Strategy::from_str)
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(strategies.len());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let label: Strategy = rec.get(0).unwrap_or("").parse()?;
            if strategies.get(i) != Some(&label) {
                return Err(GameError::arg(format!(
                    "row {} is labelled {label} but the header has {}",
                    i + 1,
                    strategies.get(i).map(|s| s.to_string()).unwrap_or_default()
                )));
            }
            let row: Vec<f64> = rec
                .iter()
                .skip(1)
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|e| GameError::arg(format!("bad matrix entry {x:?}: {e}")))
                })
                .collect::<Result<_>>()?;
            values.push(row);
        }
        PayoffMatrix::new(strategies, values)
    }
}

fn check_strategy_set(strategies: &[Strategy], k: usize) -> Result<()> {
    let first = strategies
        .first()
        .ok_or_else(|| GameError::arg("strategy set is empty"))?;
    for s in strategies {
        if s.boxes() != k || s.total() != first.total() {
            return Err(GameError::arg(format!(
                "strategy {s} does not match quota {} over {k} boxes",
                first.total()
            )));
        }
    }
    Ok(())
}

/// Payoff matrix over `strategies`. Symmetric games are evaluated on the
/// upper triangle and reflected, so antisymmetry holds exactly.
pub fn build_matrix(strategies: &[Strategy], config: &GameConfig) -> Result<PayoffMatrix> {
    check_strategy_set(strategies, config.row_probs.len())?;
    let n = strategies.len();
    let symmetric = config.is_symmetric();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| if symmetric { i < j } else { true })
        .collect();
    let entries: Vec<(usize, usize, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let mut cfg = config.clone();
            if let Engine::MonteCarlo { trials, seed } = cfg.engine {
                // distinct, reproducible stream family per ordered pair
                let pair_seed = seed ^ ((i * n + j) as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
                cfg.engine = Engine::MonteCarlo { trials, seed: pair_seed };
            }
            cfg.payoff(&strategies[i], &strategies[j])
                .map(|b| (i, j, b.value))
                .map_err(|e| GameError::Pair {
                    row: strategies[i].to_string(),
                    col: strategies[j].to_string(),
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let mut values = vec![vec![0.0; n]; n];
    for (i, j, v) in entries {
        values[i][j] = v;
        if symmetric {
            values[j][i] = -v;
        }
    }
    PayoffMatrix::new(strategies.to_vec(), values)
}

/// Minimax solution of a zero-sum game, from the row player's side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSolution {
    pub value: f64,
    pub row_mix: Vec<f64>,
    pub col_mix: Vec<f64>,
    pub pure: bool,
    /// Row strategies carrying positive weight.
    pub support: Vec<usize>,
}

const WEIGHT_FLOOR: f64 = 1e-7;

fn clean_mix(mix: &mut [f64]) {
    for w in mix.iter_mut() {
        if *w < WEIGHT_FLOOR {
            *w = 0.0;
        }
    }
    let total: f64 = mix.iter().sum();
    for w in mix.iter_mut() {
        *w /= total;
    }
}

fn unit(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Solve the game with payoff matrix `a` (rows maximize).
pub fn solve_matrix(a: &[Vec<f64>]) -> Result<GameSolution> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    if m == 0 || n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(GameError::arg("payoff matrix must be a nonempty rectangle"));
    }
    if a.iter().flatten().any(|v| !v.is_finite()) {
        return Err(GameError::arg("payoff matrix has non-finite entries"));
    }
    let row_min: Vec<f64> = a.iter().map(|r| r.iter().copied().fold(f64::INFINITY, f64::min)).collect();
    let col_max: Vec<f64> = (0..n)
        .map(|j| a.iter().map(|r| r[j]).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    let maximin = row_min.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let minimax = col_max.iter().copied().fold(f64::INFINITY, f64::min);
    if minimax - maximin <= 1e-12 {
        let i = row_min.iter().position(|&v| v == maximin).expect("max is attained");
        let j = col_max.iter().position(|&v| v == minimax).expect("min is attained");
        return Ok(GameSolution {
            value: maximin,
            row_mix: unit(m, i),
            col_mix: unit(n, j),
            pure: true,
            support: vec![i],
        });
    }
    let (value, mut row_mix, mut col_mix) = simplex(a)?;
    clean_mix(&mut row_mix);
    clean_mix(&mut col_mix);
    let support: Vec<usize> = (0..m).filter(|&i| row_mix[i] > 0.0).collect();
    Ok(GameSolution {
        value,
        pure: support.len() == 1,
        row_mix,
        col_mix,
        support,
    })
}

/// Dense tableau simplex on the column player's program
/// `max 1'z  s.t.  B z <= 1, z >= 0` with `B = A + shift > 0`, using Bland's
/// rule. Row weights are read off the slack reduced costs.
fn simplex(a: &[Vec<f64>]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let (m, n) = (a.len(), a[0].len());
    let lowest = a.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lowest;
    let width = n + m + 1;
    let mut t = vec![vec![0.0f64; width]; m];
    for i in 0..m {
        for j in 0..n {
            t[i][j] = a[i][j] + shift;
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = 1.0;
    }
    let mut obj = vec![0.0f64; width];
    for o in obj.iter_mut().take(n) {
        *o = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    let eps = 1e-12;
    let cap = 10_000 + 50 * (m + n);
    let mut iterations = 0;
    loop {
        let Some(enter) = (0..width - 1).find(|&j| obj[j] < -eps) else {
            break;
        };
        iterations += 1;
        if iterations > cap {
            return Err(GameError::Solver(format!(
                "no optimum after {cap} pivots on a {m}x{n} game (entering column {enter})"
            )));
        }
        let ratios: Vec<Option<f64>> = (0..m)
            .map(|i| (t[i][enter] > eps).then(|| t[i][width - 1] / t[i][enter]))
            .collect();
        let best = ratios.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        // Bland: among (near-)tied rows, the lowest basic variable leaves
        let leave = (0..m)
            .filter(|&i| ratios[i].is_some_and(|x| x <= best + eps * best.max(1.0)))
            .min_by_key(|&i| basis[i]);
        let Some(r) = leave else {
            return Err(GameError::Solver(format!(
                "program unbounded in column {enter} of a {m}x{n} game"
            )));
        };
        let piv = t[r][enter];
        for x in t[r].iter_mut() {
            *x /= piv;
        }
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[enter] != 0.0 {
                let f = row[enter];
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * p;
                }
            }
        }
        let f = obj[enter];
        for (x, p) in obj.iter_mut().zip(&pivot_row) {
            *x -= f * p;
        }
        basis[r] = enter;
    }
    let mut z = vec![0.0f64; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            z[b] = t[i][width - 1].max(0.0);
        }
    }
    let total: f64 = z.iter().sum();
    if !(total > 0.0) {
        return Err(GameError::Solver(format!("degenerate optimum on a {m}x{n} game")));
    }
    let v_shifted = 1.0 / total;
    let col_mix: Vec<f64> = z.iter().map(|x| x * v_shifted).collect();
    let row_mix: Vec<f64> = (0..m).map(|i| obj[n + i].max(0.0) * v_shifted).collect();
    Ok((v_shifted - shift, row_mix, col_mix))
}

pub fn solve_zero_sum(matrix: &PayoffMatrix) -> Result<GameSolution> {
    solve_matrix(&matrix.values)
}

/// Duality gap of a solution: how far the row mix falls short of the value
/// against its worst column, or the column mix exceeds it against the best
/// row. Zero for an exact minimax pair.
pub fn certificate_gap(a: &[Vec<f64>], sol: &GameSolution) -> f64 {
    let n = a[0].len();
    let row_guarantee = (0..n)
        .map(|j| a.iter().zip(&sol.row_mix).map(|(r, x)| r[j] * x).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let col_guarantee = a
        .iter()
        .map(|r| r.iter().zip(&sol.col_mix).map(|(v, y)| v * y).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    (sol.value - row_guarantee).max(col_guarantee - sol.value).max(0.0)
}

/// Expected excess throws of every strategy, sorted ascending; ties keep
/// the input order.
pub fn rank_by_expectation(strategies: &[Strategy], probs: &ProbVector) -> Result<Vec<(Strategy, f64)>> {
    let values: Vec<f64> = strategies
        .par_iter()
        .map(|s| expect_general(s, probs))
        .collect::<Result<_>>()?;
    let mut ranked: Vec<(Strategy, f64)> = strategies.iter().cloned().zip(values).collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(ranked)
}

/// The strategy with the least expected excess throws; the first in list
/// order wins ties.
pub fn best_expectation(strategies: &[Strategy], probs: &ProbVector) -> Result<Strategy> {
    if strategies.is_empty() {
        return Err(GameError::arg("strategy set is empty"));
    }
    Ok(rank_by_expectation(strategies, probs)?.swap_remove(0).0)
}
