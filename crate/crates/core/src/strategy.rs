//! Strategies (allocations of counters to boxes), box probability vectors,
//! and the strategy enumerations used to build games.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};

/// Counters per box, e.g. `<2,1,0>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Strategy(Vec<u32>);

impl Strategy {
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.is_empty() {
            return Err(GameError::arg("a strategy needs at least one box"));
        }
        Ok(Strategy(counts))
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    /// Number of boxes.
    pub fn boxes(&self) -> usize {
        self.0.len()
    }

    /// The quota `n`.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Strategy with one counter moved from box `from` to box `to`.
    pub fn transfer(&self, from: usize, to: usize) -> Option<Strategy> {
        if from == to || self.0.get(from).copied().unwrap_or(0) == 0 || to >= self.0.len() {
            return None;
        }
        let mut c = self.0.clone();
        c[from] -= 1;
        c[to] += 1;
        Some(Strategy(c))
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ">")
    }
}

impl FromStr for Strategy {
    type Err = GameError;

    /// Accepts `2,1,0` or `<2,1,0>`.
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('<').trim_end_matches('>');
        let counts = inner
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u32>()
                    .map_err(|_| GameError::arg(format!("bad counter count {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Strategy::new(counts)
    }
}

impl TryFrom<String> for Strategy {
    type Error = GameError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.to_string()
    }
}

/// Box probabilities. Entries lie in `[0, 1]` and sum to one.
///
/// Zero entries are accepted so that limiting games (a player who always
/// draws box 1) can be expressed; the engines reject a zero-probability box
/// that holds counters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(GameError::arg("empty probability vector"));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(GameError::arg(format!("probability {p} outside [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(GameError::arg(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(ProbVector(probs))
    }

    /// Like [`ProbVector::new`] but also requires `p_1 >= p_2 >= ... >= p_k`.
    pub fn new_ordered(probs: Vec<f64>) -> Result<Self> {
        let v = Self::new(probs)?;
        if !v.is_ordered() {
            return Err(GameError::arg(format!(
                "probabilities {:?} are not nonincreasing",
                v.0
            )));
        }
        Ok(v)
    }

    /// Two boxes with probabilities `(p, 1 - p)`.
    pub fn two_box(p: f64) -> Result<Self> {
        Self::new(vec![p, 1.0 - p])
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(GameError::arg("need at least one box"));
        }
        Self::new(vec![1.0 / k as f64; k])
    }

    /// Totals of two fair dice, boxes 2 through 12.
    pub fn dice() -> Self {
        ProbVector(
            (2..=12)
                .map(|i: i32| (i - 1).min(13 - i) as f64 / 36.0)
                .collect(),
        )
    }

    /// Zipf's law on `k` boxes: `p_i` proportional to `1/i`.
    pub fn zipf(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(GameError::arg("need at least one box"));
        }
        let h: f64 = (1..=k).map(|i| 1.0 / i as f64).sum();
        Ok(ProbVector((1..=k).map(|i| 1.0 / (i as f64 * h)).collect()))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_ordered(&self) -> bool {
        self.0.windows(2).all(|w| w[0] >= w[1])
    }

    /// Box indices sorted by decreasing probability; ties keep index order.
    pub fn rank_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.0.len()).collect();
        let key = |p: f64| (p * 1e12).round() as i64;
        idx.sort_by(|&i, &j| key(self.0[j]).cmp(&key(self.0[i])).then(i.cmp(&j)));
        idx
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = GameError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbVector::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(v: ProbVector) -> Vec<f64> {
        v.0
    }
}

impl FromStr for ProbVector {
    type Err = GameError;

    /// `0.7,0.2,0.1`, `dice`, `zipf:K` or `uniform:K`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("dice") {
            return Ok(ProbVector::dice());
        }
        let preset_k = |rest: &str| {
            rest.parse::<usize>()
                .map_err(|_| GameError::arg(format!("bad box count in {s:?}")))
        };
        if let Some(rest) = s.strip_prefix("zipf:") {
            return ProbVector::zipf(preset_k(rest)?);
        }
        if let Some(rest) = s.strip_prefix("uniform:") {
            return ProbVector::uniform(preset_k(rest)?);
        }
        let probs = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| GameError::arg(format!("bad probability {t:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        ProbVector::new(probs)
    }
}

fn compositions_into(n: u32, k: usize, max_part: u32, prefix: &mut Vec<u32>, out: &mut Vec<Strategy>) {
    if k == 1 {
        if n <= max_part {
            prefix.push(n);
            out.push(Strategy(prefix.clone()));
            prefix.pop();
        }
        return;
    }
    for first in (0..=n.min(max_part)).rev() {
        prefix.push(first);
        let next_max = if max_part == u32::MAX { u32::MAX } else { first };
        compositions_into(n - first, k - 1, next_max, prefix, out);
        prefix.pop();
    }
}

/// All compositions of `n` into `k` nonnegative parts, lexicographically
/// descending: `<n,0,..,0>` first, `<0,..,0,n>` last.
pub fn enumerate_compositions(n: u32, k: usize) -> Vec<Strategy> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    compositions_into(n, k, u32::MAX, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Nonincreasing compositions (`n_1 >= n_2 >= ... >= n_k`), lexicographically
/// descending.
pub fn enumerate_monotone(n: u32, k: usize) -> Vec<Strategy> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    compositions_into(n, k, n, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Compositions with `a_i >= a_j` whenever `p_i > p_j`. Within a block of
/// equal probabilities one canonical representative is kept: counts
/// nonincreasing in box index.
pub fn enumerate_respecting_ties(n: u32, probs: &ProbVector) -> Vec<Strategy> {
    let order = probs.rank_order();
    let mut out: Vec<Strategy> = enumerate_monotone(n, probs.len())
        .into_iter()
        .map(|m| {
            let mut c = vec![0; order.len()];
            for (rank, &box_idx) in order.iter().enumerate() {
                c[box_idx] = m.0[rank];
            }
            Strategy(c)
        })
        .collect();
    out.sort_by(|a, b| b.cmp(a));
    out
}

/// `C(n + k - 1, k - 1)`, the number of compositions.
pub fn composition_count(n: u32, k: usize) -> u128 {
    if k == 0 {
        return 0;
    }
    let (top, r) = (n as u128 + k as u128 - 1, k as u128 - 1);
    (1..=r).fold(1u128, |acc, i| acc * (top - r + i) / i)
}
