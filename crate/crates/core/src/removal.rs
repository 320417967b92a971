//! Distribution of the excess-throw count `X = t - n`: the number of throws
//! a single player needs beyond their quota before all their counters are gone.
//!
//! The general PMF sums, over the box cleared last, all ways of spreading
//! `r` wasted throws over the other boxes. Expectations are computed by
//! embedding the throws in a unit-rate Poisson process, under which the
//! clearing times of the boxes are independent Gamma variables, and checked
//! against the truncated PMF series.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::quad;
use crate::specfun::{hyp2f1, hyp2f1_with, ln_factorial, log_multinomial, reg_inc_gamma_lower, xlogy, Tolerance};
use crate::strategy::{ProbVector, Strategy};

/// One point of the excess-throw distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcessThrows {
    pub r: u64,
    pub probability: f64,
}

fn lm(total: u64, parts: &[i64]) -> f64 {
    log_multinomial(total, parts).expect("parts sum to total by construction")
}

/// `P(X_<a,b> = r)` for two boxes with probabilities `(p, 1 - p)`.
pub fn pmf_two_box(a: u32, b: u32, p: f64, r: u64) -> f64 {
    let (a, b) = (a as i64, b as i64);
    let r_i = r as i64;
    let total = (a + b + r_i - 1) as u64;
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let base = a as f64 * lp + b as f64 * lq;
    let last_in_1 = lm(total, &[a - 1, b + r_i]) + r as f64 * lq;
    let last_in_2 = lm(total, &[a + r_i, b - 1]) + r as f64 * lp;
    (base + last_in_1).exp() + (base + last_in_2).exp()
}

/// `E[X_<a,b>]` through the two terminating-hypergeometric terms.
pub fn expect_two_box(a: u32, b: u32, p: f64) -> Result<f64> {
    expect_two_box_with(a, b, p, &Tolerance::default())
}

/// [`expect_two_box`] with explicit series controls.
pub fn expect_two_box_with(a: u32, b: u32, p: f64, tol: &Tolerance) -> Result<f64> {
    if a + b == 0 {
        return Ok(0.0);
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(GameError::arg(format!("p = {p} must lie in (0, 1)")));
    }
    let (ai, bi) = (a as i64, b as i64);
    let n = (ai + bi) as u64;
    let q = 1.0 - p;
    let base = a as f64 * p.ln() + b as f64 * q.ln();
    let (af, bf) = (a as f64, b as f64);
    let mut total = 0.0;
    let c1 = lm(n, &[ai - 1, bi + 1]);
    if c1.is_finite() {
        let f = hyp2f1_with(af + bf + 1.0, 2.0, bf + 2.0, q, tol)?;
        total += (base + c1 + q.ln()).exp() * f;
    }
    let c2 = lm(n, &[ai + 1, bi - 1]);
    if c2.is_finite() {
        let f = hyp2f1_with(af + bf + 1.0, 2.0, af + 2.0, p, tol)?;
        total += (base + c2 + p.ln()).exp() * f;
    }
    Ok(total)
}

/// Both evaluations of the three-box PMF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeBoxPmf {
    /// Terminating-hypergeometric form.
    pub hypergeometric: f64,
    /// Direct double sum over wasted throws.
    pub direct: f64,
}

fn check_three(n: [u32; 3], p: [f64; 3]) -> Result<()> {
    if n.iter().sum::<u32>() == 0 {
        return Err(GameError::arg("strategy holds no counters"));
    }
    if p.iter().any(|&x| !(x > 0.0)) || (p.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(GameError::arg(format!("three-box probabilities {p:?} invalid")));
    }
    Ok(())
}

/// `P(X = r)` for a three-box strategy, hypergeometric form.
///
/// For the box `i` cleared last, the sum over wasted throws in the other two
/// boxes is a terminating `2F1(1, -m; c; -p_j/p_l)` minus its overshoot
/// beyond `r`. The pair `(j, l)` is taken with `p_j <= p_l` so that the
/// polynomial argument stays in `[-1, 0)`.
pub fn pmf_three_box(n: [u32; 3], p: [f64; 3], r: u64) -> Result<f64> {
    check_three(n, p)?;
    let total_n: i64 = n.iter().map(|&x| x as i64).sum();
    let top = (total_n + r as i64 - 1) as u64;
    let ri = r as i64;
    let mut acc = 0.0;
    for i in 0..3 {
        if n[i] == 0 {
            continue;
        }
        let (mut j, mut l) = ((i + 1) % 3, (i + 2) % 3);
        if p[j] > p[l] {
            std::mem::swap(&mut j, &mut l);
        }
        let (ni, nj, nl) = (n[i] as i64, n[j] as i64, n[l] as i64);
        let base = xlogy(ni as f64, p[i]) + xlogy(nj as f64, p[j]) + xlogy(nl as f64, p[l]);
        let z = -p[j] / p[l];
        let mut parts = [0i64; 3];
        parts[i] = ni - 1;
        parts[j] = nj;
        parts[l] = nl + ri;
        let head_coef = lm(top, &parts);
        let head = hyp2f1(1.0, -(nl as f64) - r as f64, nj as f64 + 1.0, z)?;
        let mut term = (base + r as f64 * p[l].ln() + head_coef).exp() * head;
        parts[j] = nj + ri + 1;
        parts[l] = nl - 1;
        let tail_coef = lm(top, &parts);
        if tail_coef.is_finite() {
            let tail = hyp2f1(1.0, 1.0 - nl as f64, (nj + ri + 2) as f64, z)?;
            term -= (base + (r + 1) as f64 * p[j].ln() - p[l].ln() + tail_coef).exp() * tail;
        }
        acc += term;
    }
    Ok(acc)
}

/// `P(X = r)` for a three-box strategy by direct summation over the
/// wasted-throw splits.
pub fn pmf_three_box_direct(n: [u32; 3], p: [f64; 3], r: u64) -> Result<f64> {
    check_three(n, p)?;
    let total_n: i64 = n.iter().map(|&x| x as i64).sum();
    let top = (total_n + r as i64 - 1) as u64;
    let mut acc = 0.0;
    for i in 0..3 {
        if n[i] == 0 {
            continue;
        }
        let (j, l) = ((i + 1) % 3, (i + 2) % 3);
        for rj in 0..=r as i64 {
            let rl = r as i64 - rj;
            let mut parts = [0i64; 3];
            parts[i] = n[i] as i64 - 1;
            parts[j] = n[j] as i64 + rj;
            parts[l] = n[l] as i64 + rl;
            let lp = xlogy(n[i] as f64, p[i])
                + parts[j] as f64 * p[j].ln()
                + parts[l] as f64 * p[l].ln();
            acc += (lm(top, &parts) + lp).exp();
        }
    }
    Ok(acc)
}

/// Both three-box forms at once, for cross-checking.
pub fn pmf_three_box_forms(n: [u32; 3], p: [f64; 3], r: u64) -> Result<ThreeBoxPmf> {
    Ok(ThreeBoxPmf {
        hypergeometric: pmf_three_box(n, p, r)?,
        direct: pmf_three_box_direct(n, p, r)?,
    })
}

/// Closed-form expectations for `<3,0,0>`, `<2,1,0>` and `<1,1,1>`.
pub fn expect_three_closed(strategy: &Strategy, probs: &ProbVector) -> Result<f64> {
    let &[p1, p2, p3] = probs.probs() else {
        return Err(GameError::arg("closed forms need three boxes"));
    };
    if !(p3 > 0.0) {
        return Err(GameError::arg("closed forms need positive probabilities"));
    }
    match strategy.counts() {
        [3, 0, 0] => Ok(3.0 * (1.0 - p1) / p1),
        [2, 1, 0] => Ok(-3.0 + 1.0 / p2 + p2 * (3.0 * p1 + 2.0 * p2) / (p1 * (p1 + p2).powi(2))),
        [1, 1, 1] => Ok(-2.0 + 1.0 / p1 + 1.0 / p2 + 1.0 / p3
            - 1.0 / (1.0 - p1)
            - 1.0 / (1.0 - p2)
            - 1.0 / (1.0 - p3)),
        _ => Err(GameError::arg(format!(
            "no closed form for {strategy}; only <3,0,0>, <2,1,0>, <1,1,1>"
        ))),
    }
}

pub(crate) fn check_general(strategy: &Strategy, probs: &ProbVector) -> Result<()> {
    if strategy.boxes() != probs.len() {
        return Err(GameError::arg(format!(
            "{strategy} has {} boxes but {} probabilities were given",
            strategy.boxes(),
            probs.len()
        )));
    }
    for (i, (&c, &p)) in strategy.counts().iter().zip(probs.probs()).enumerate() {
        if c > 0 && p <= 0.0 {
            return Err(GameError::Nontermination(format!(
                "box {} holds {c} counters but has probability zero",
                i + 1
            )));
        }
    }
    Ok(())
}

fn log_convolve(x: &[f64], y: &[f64]) -> Vec<f64> {
    let len = x.len().min(y.len());
    (0..len)
        .map(|r| {
            let mut m = f64::NEG_INFINITY;
            for t in 0..=r {
                m = m.max(x[t] + y[r - t]);
            }
            if m == f64::NEG_INFINITY {
                return m;
            }
            let s: f64 = (0..=r).map(|t| (x[t] + y[r - t] - m).exp()).sum();
            m + s.ln()
        })
        .collect()
}

/// `P(X = r)` for `r = 0..=max_r`.
pub fn pmf_table(strategy: &Strategy, probs: &ProbVector, max_r: u64) -> Result<Vec<f64>> {
    check_general(strategy, probs)?;
    let n: u64 = strategy.total() as u64;
    let len = max_r as usize + 1;
    if n == 0 {
        let mut v = vec![0.0; len];
        v[0] = 1.0;
        return Ok(v);
    }
    let counts = strategy.counts();
    let p = probs.probs();
    let k = counts.len();
    // waste[j][m] = ln( p_j^(n_j+m) / (n_j+m)! )
    let waste: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            (0..len as u64)
                .map(|m| {
                    let e = counts[j] as u64 + m;
                    if p[j] == 0.0 {
                        if e == 0 { 0.0 } else { f64::NEG_INFINITY }
                    } else {
                        e as f64 * p[j].ln() - ln_factorial(e)
                    }
                })
                .collect()
        })
        .collect();
    let mut unit = vec![f64::NEG_INFINITY; len];
    unit[0] = 0.0;
    let mut prefix = vec![unit.clone()];
    for w in &waste {
        let next = log_convolve(prefix.last().expect("nonempty"), w);
        prefix.push(next);
    }
    let mut suffix = vec![unit; k + 1];
    for j in (0..k).rev() {
        suffix[j] = log_convolve(&suffix[j + 1], &waste[j]);
    }
    let mut out = vec![0.0; len];
    for i in 0..k {
        if counts[i] == 0 {
            continue;
        }
        let others = log_convolve(&prefix[i], &suffix[i + 1]);
        let lead = xlogy(counts[i] as f64, p[i]) - ln_factorial(counts[i] as u64 - 1);
        for (r, o) in out.iter_mut().enumerate() {
            *o += (ln_factorial(n + r as u64 - 1) + lead + others[r]).exp();
        }
    }
    Ok(out)
}

/// `P(X = r)` for any number of boxes.
pub fn pmf_general(strategy: &Strategy, probs: &ProbVector, r: u64) -> Result<f64> {
    Ok(*pmf_table(strategy, probs, r)?.last().expect("nonempty"))
}

/// The PMF truncated once the cumulative mass reaches `1 - 1e-12` and the
/// current term is below `1e-15`.
pub fn pmf_truncated(strategy: &Strategy, probs: &ProbVector) -> Result<Vec<ExcessThrows>> {
    let mut max_r = 64u64;
    loop {
        let table = pmf_table(strategy, probs, max_r)?;
        let mut cum = 0.0;
        for (r, &pr) in table.iter().enumerate() {
            cum += pr;
            if cum >= 1.0 - 1e-12 && pr < 1e-15 {
                return Ok(table[..=r]
                    .iter()
                    .enumerate()
                    .map(|(r, &probability)| ExcessThrows { r: r as u64, probability })
                    .collect());
            }
        }
        if max_r > 1 << 16 {
            return Err(GameError::Convergence { terms: table.len(), partial: cum });
        }
        max_r *= 2;
    }
}

/// `E[X]` by summing `r * P(X = r)` until `r * P(X = r) < 1e-15` with
/// at least `1 - 1e-12` of the mass accounted for.
pub fn expect_series(strategy: &Strategy, probs: &ProbVector) -> Result<f64> {
    let mut max_r = 128u64;
    loop {
        let table = pmf_table(strategy, probs, max_r)?;
        let (mut cum, mut mean) = (0.0, 0.0);
        for (r, &pr) in table.iter().enumerate() {
            cum += pr;
            mean += r as f64 * pr;
            if cum >= 1.0 - 1e-12 && (r as f64) * pr < 1e-15 && r > 0 {
                return Ok(mean);
            }
        }
        if max_r > 1 << 16 {
            return Err(GameError::Convergence { terms: table.len(), partial: mean });
        }
        max_r *= 2;
    }
}

/// `E[X]` through the Poisson embedding: `E[t] = ∫ P(T > s) ds` with
/// `T = max_i Gamma(n_i, rate p_i)`, minus the quota.
pub fn expect_general(strategy: &Strategy, probs: &ProbVector) -> Result<f64> {
    check_general(strategy, probs)?;
    let active: Vec<(u32, f64)> = strategy
        .counts()
        .iter()
        .zip(probs.probs())
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &p)| (c, p))
        .collect();
    if active.is_empty() {
        return Ok(0.0);
    }
    let survival = |t: f64| -> f64 {
        let log_all_done: f64 = active
            .iter()
            .map(|&(c, p)| reg_inc_gamma_lower(c, p * t).ln())
            .sum();
        -log_all_done.exp_m1()
    };
    let mut breaks = vec![0.0];
    let mut end: f64 = 0.0;
    for &(c, p) in &active {
        let (mu, sd) = (c as f64 / p, (c as f64).sqrt() / p);
        for z in [-3.0, -1.0, 0.0, 1.0, 3.0, 8.0] {
            let x = mu + z * sd;
            if x > 0.0 {
                breaks.push(x);
            }
        }
        end = end.max(mu + 12.0 * sd);
    }
    while survival(end) > 1e-17 {
        end *= 1.5;
    }
    breaks.push(end);
    breaks.retain(|&x| x <= end);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let quota: f64 = active.iter().map(|&(c, _)| c as f64).sum();
    let tol = 1e-11f64.max(1e-14 * end);
    let expected_throws = quad::integrate(survival, &breaks, tol, 20_000)?;
    Ok(expected_throws - quota)
}

/// The probability at which `<a,b>` and `<a-1,b+1>` have equal expected
/// excess throws.
pub fn cutoff_two_box(a: u32, b: u32) -> Result<f64> {
    if a == 0 {
        return Err(GameError::arg("cutoff needs a >= 1"));
    }
    let diff = |p: f64| -> Result<f64> { Ok(expect_two_box(a, b, p)? - expect_two_box(a - 1, b + 1, p)?) };
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-6);
    let (flo, fhi) = (diff(lo)?, diff(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(GameError::NoRoot(format!(
            "E<{a},{b}> - E<{},{}> has one sign on (1e-6, 1-1e-6)",
            a - 1,
            b + 1
        )));
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        let fm = diff(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
