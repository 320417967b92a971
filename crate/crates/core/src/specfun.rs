//! Special functions behind the closed-form expressions: log-gamma and
//! log-factorials, log multinomial coefficients, the regularized incomplete
//! beta and upper incomplete gamma functions at integer parameters, and the
//! Gauss hypergeometric function on the parameter classes the game needs.
//!
//! All combinatorial mass is carried in log space and exponentiated last.

use std::f64::consts::PI;

use crate::error::{GameError, Result};

/// Convergence controls for infinite series.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    /// Relative size of the last retained term.
    pub rel_eps: f64,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel_eps: 1e-13,
            max_terms: 100_000,
        }
    }
}

impl Tolerance {
    pub fn new(rel_eps: f64, max_terms: usize) -> Result<Self> {
        if !(rel_eps > 0.0 && rel_eps < 1e-6) {
            return Err(GameError::arg(format!(
                "rel_eps must lie in (0, 1e-6), got {rel_eps}"
            )));
        }
        if max_terms < 1000 {
            return Err(GameError::arg(format!(
                "max_terms must be at least 1000, got {max_terms}"
            )));
        }
        Ok(Tolerance { rel_eps, max_terms })
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln |Γ(x)| for real `x` not a nonpositive integer.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin().abs()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(x) for real `x`, with the sign handled through reflection.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        ln_gamma(x).exp()
    }
}

/// ln(m!). Exact products below 21, Stirling's series above.
pub fn ln_factorial(m: u64) -> f64 {
    if m < 21 {
        let mut f: u64 = 1;
        for i in 2..=m {
            f *= i;
        }
        return (f as f64).ln();
    }
    let x = (m + 1) as f64;
    let x2 = x * x;
    let series = 1.0 / (12.0 * x) - 1.0 / (360.0 * x * x2) + 1.0 / (1260.0 * x * x2 * x2)
        - 1.0 / (1680.0 * x * x2 * x2 * x2);
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

/// ln of the multinomial coefficient `total! / Π parts_i!`.
///
/// A negative part yields a zero coefficient, i.e. negative infinity.
pub fn log_multinomial(total: u64, parts: &[i64]) -> Result<f64> {
    let sum: i128 = parts.iter().map(|&p| p as i128).sum();
    if sum != total as i128 {
        return Err(GameError::arg(format!(
            "multinomial parts {parts:?} do not sum to {total}"
        )));
    }
    if parts.iter().any(|&p| p < 0) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_factorial(total) - parts.iter().map(|&p| ln_factorial(p as u64)).sum::<f64>())
}

/// ln Σ exp(x_i), ignoring `-inf` entries.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// `k * ln(p)` with the convention `0 * ln 0 = 0`.
pub(crate) fn xlogy(k: f64, p: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * p.ln()
    }
}

/// Regularized incomplete beta `I_x(alpha, beta)` at positive integer
/// parameters, evaluated as the binomial tail `P(Bin(alpha+beta-1, x) >= alpha)`.
pub fn reg_inc_beta(x: f64, alpha: u32, beta: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(GameError::arg(format!("x = {x} outside [0, 1]")));
    }
    if alpha == 0 || beta == 0 {
        return Err(GameError::arg(format!(
            "incomplete beta parameters must be positive, got ({alpha}, {beta})"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let n = (alpha + beta - 1) as u64;
    let (lx, l1x) = (x.ln(), (-x).ln_1p());
    let ln_n = ln_factorial(n);
    let terms: Vec<f64> = (alpha as u64..=n)
        .map(|j| {
            ln_n - ln_factorial(j) - ln_factorial(n - j) + j as f64 * lx + (n - j) as f64 * l1x
        })
        .collect();
    Ok(log_sum_exp(&terms).exp().min(1.0))
}

fn poisson_log_term(j: u32, x: f64) -> f64 {
    -x + j as f64 * x.ln() - ln_factorial(j as u64)
}

/// Sum of `e^-x x^j / j!` over `j < n` (`upper = true`) or over `j >= n`.
fn poisson_tail(n: u32, x: f64, upper: bool) -> f64 {
    if upper {
        let logs: Vec<f64> = (0..n).map(|j| poisson_log_term(j, x)).collect();
        log_sum_exp(&logs).exp()
    } else {
        // terms decrease once j > x; stop when the remainder is negligible
        let mut lt = poisson_log_term(n, x);
        let mut logs = vec![lt];
        let mut j = n;
        loop {
            j += 1;
            lt += x.ln() - (j as f64).ln();
            logs.push(lt);
            let ratio = x / (j as f64 + 1.0);
            if ratio < 1.0 && lt - (1.0 - ratio).ln() < logs[0] - 40.0 {
                break;
            }
        }
        log_sum_exp(&logs).exp()
    }
}

/// Upper regularized incomplete gamma `Q(n, x) = P(Gamma(n, 1) > x)`,
/// i.e. `P(Poisson(x) < n)`. The finite sum `e^-x Σ_{j<n} x^j / j!` is used
/// when `x >= n`; below that the complement of the (small) lower tail.
///
/// `n = 0` is the point mass at zero and returns 0.
pub fn reg_inc_gamma_upper(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    if x <= 0.0 {
        return 1.0;
    }
    if x < n as f64 {
        1.0 - poisson_tail(n, x, false)
    } else {
        poisson_tail(n, x, true).min(1.0)
    }
}

/// Lower regularized incomplete gamma `P(n, x) = 1 - Q(n, x)`, with full
/// relative precision on both tails.
pub fn reg_inc_gamma_lower(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x < n as f64 {
        poisson_tail(n, x, false).min(1.0)
    } else {
        1.0 - poisson_tail(n, x, true).min(1.0)
    }
}

fn nonpositive_integer(x: f64) -> Option<u64> {
    (x <= 0.0 && x == x.round()).then(|| (-x) as u64)
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` with default tolerance.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    hyp2f1_with(a, b, c, z, &Tolerance::default())
}

/// Gauss hypergeometric function on two domains:
/// terminating series (`a` or `b` a nonpositive integer, any `z`) and
/// `0 <= z < 1` with `c > 0`. Near `z = 1` the series is moved to `1 - z`
/// by Euler's transformation when that terminates, and by the standard
/// two-term connection formula when `c - a - b` is not an integer.
pub fn hyp2f1_with(a: f64, b: f64, c: f64, z: f64, tol: &Tolerance) -> Result<f64> {
    if z == 0.0 {
        return Ok(1.0);
    }
    if let Some(m) = nonpositive_integer(a).or(nonpositive_integer(b)) {
        let m = match (nonpositive_integer(a), nonpositive_integer(b)) {
            (Some(x), Some(y)) => x.min(y),
            _ => m,
        };
        return polynomial(a, b, c, z, m);
    }
    if !(c > 0.0) || !(0.0..1.0).contains(&z) {
        return Err(GameError::arg(format!(
            "2F1({a}, {b}; {c}; {z}) is outside the supported domain"
        )));
    }
    if z > 0.9 {
        let w = 1.0 - z;
        let s = c - a - b;
        if let Some(m) = nonpositive_integer(c - a).or(nonpositive_integer(c - b)) {
            let m = match (nonpositive_integer(c - a), nonpositive_integer(c - b)) {
                (Some(x), Some(y)) => x.min(y),
                _ => m,
            };
            return Ok(w.powf(s) * polynomial(c - a, c - b, c, z, m)?);
        }
        if s != s.round() {
            let g1 = gamma(c) * gamma(s) / (gamma(c - a) * gamma(c - b));
            let g2 = gamma(c) * gamma(-s) / (gamma(a) * gamma(b));
            let f1 = series(a, b, 1.0 - s, w, tol)?;
            let f2 = series(c - a, c - b, 1.0 + s, w, tol)?;
            return Ok(g1 * f1 + g2 * w.powf(s) * f2);
        }
        // integer c-a-b without a terminating Euler form: sum directly
    }
    series(a, b, c, z, tol)
}

fn polynomial(a: f64, b: f64, c: f64, z: f64, degree: u64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..degree {
        let nf = n as f64;
        let denom = (c + nf) * (nf + 1.0);
        if denom == 0.0 {
            return Err(GameError::arg(format!(
                "2F1 lower parameter {c} hits a pole before the series terminates"
            )));
        }
        term *= (a + nf) * (b + nf) / denom * z;
        sum += term;
    }
    Ok(sum)
}

fn series(a: f64, b: f64, c: f64, z: f64, tol: &Tolerance) -> Result<f64> {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    // the remaining tail is held well below the reported precision
    let tail_eps = (tol.rel_eps * 1e-3).max(0.5 * f64::EPSILON);
    for n in 0..tol.max_terms {
        let nf = n as f64;
        let next = term * (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += next;
        if next == 0.0 {
            return Ok(sum);
        }
        // geometric bound on the remaining tail
        let ratio = (next / term).abs().max(z.abs());
        term = next;
        if ratio < 1.0
            && term.abs() <= tol.rel_eps * sum.abs()
            && term.abs() * ratio / (1.0 - ratio) <= tail_eps * sum.abs()
        {
            return Ok(sum);
        }
    }
    Err(GameError::Convergence {
        terms: tol.max_terms,
        partial: sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, eps: f64) -> bool {
        (a - b).abs() <= eps
    }

    #[test]
    fn log_multinomial_examples() {
        assert!(close(log_multinomial(2, &[1, 1]).unwrap(), 2f64.ln(), 1e-15));
        assert_eq!(log_multinomial(3, &[3, 0, 0]).unwrap(), 0.0);
        assert_eq!(log_multinomial(1, &[2, -1]).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(
            log_multinomial(4, &[1, 1]),
            Err(GameError::Argument(_))
        ));
    }

    #[test]
    fn ln_factorial_matches_direct_sum() {
        for m in 0..200u64 {
            let direct: f64 = (2..=m).map(|i| (i as f64).ln()).sum();
            assert!(close(ln_factorial(m), direct, 1e-11 * direct.max(1.0)), "m={m}");
        }
        // continuity across the switch point
        assert!(close(ln_factorial(21) - ln_factorial(20), 21f64.ln(), 1e-13));
    }

    #[test]
    fn ln_gamma_integers_and_half() {
        for m in 1..30u64 {
            assert!(close(ln_gamma(m as f64), ln_factorial(m - 1), 1e-12));
        }
        assert!(close(gamma(0.5), PI.sqrt(), 1e-14));
        assert!(close(gamma(-0.5), -2.0 * PI.sqrt(), 1e-13));
    }

    #[test]
    fn reg_inc_beta_examples() {
        let expect = 1.0 - 0.6f64.powi(5) - 5.0 * 0.4 * 0.6f64.powi(4);
        assert!(close(reg_inc_beta(0.4, 2, 4).unwrap(), expect, 1e-15));
        assert!(close(expect, 0.66304, 1e-12));
        assert_eq!(reg_inc_beta(0.0, 3, 7).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(1.0, 3, 7).unwrap(), 1.0);
        assert!(close(reg_inc_beta(0.5, 3, 3).unwrap(), 0.5, 1e-15));
        assert!(reg_inc_beta(1.2, 1, 1).is_err());
        assert!(reg_inc_beta(-0.1, 1, 1).is_err());
        assert!(reg_inc_beta(0.5, 0, 1).is_err());
    }

    #[test]
    fn reg_inc_beta_reflection_grid() {
        for a in 1..=30 {
            for b in 1..=30 {
                for i in 0..=100 {
                    let x = i as f64 / 100.0;
                    let s = reg_inc_beta(x, a, b).unwrap() + reg_inc_beta(1.0 - x, b, a).unwrap();
                    assert!(close(s, 1.0, 1e-12), "a={a} b={b} x={x} sum={s}");
                }
            }
        }
    }

    #[test]
    fn reg_inc_beta_monotone_grid() {
        for a in 1..=30 {
            for b in 1..=30 {
                let mut prev = 0.0;
                for i in 0..=100 {
                    let x = i as f64 / 100.0;
                    let v = reg_inc_beta(x, a, b).unwrap();
                    // log-space rounding allows a few ulps of jitter
                    assert!(v >= prev - 1e-13);
                    assert!(reg_inc_beta(x, a + 1, b).unwrap() <= v + 1e-13);
                    prev = v;
                }
            }
        }
    }

    #[test]
    fn reg_inc_gamma_upper_examples() {
        for &x in &[0.0, 0.3, 1.0, 4.5, 30.0] {
            assert!(close(reg_inc_gamma_upper(1, x), (-x as f64).exp(), 1e-15));
        }
        assert_eq!(reg_inc_gamma_upper(5, 0.0), 1.0);
        assert!(close(reg_inc_gamma_upper(2, 1.0), 2.0 * (-1f64).exp(), 1e-15));
        assert!(close(2.0 * (-1f64).exp(), 0.73576, 1e-5));
    }

    #[test]
    fn reg_inc_gamma_upper_is_survival() {
        for n in 1..40 {
            let mut prev = 1.0;
            for i in 0..2000 {
                let x = i as f64 * 0.1;
                let q = reg_inc_gamma_upper(n, x);
                assert!(q <= prev + 1e-15 && (0.0..=1.0).contains(&q));
                prev = q;
            }
            assert!(reg_inc_gamma_upper(n, 1e4) < 1e-300);
        }
        assert_eq!(reg_inc_gamma_upper(3, 1e6), 0.0);
    }

    #[test]
    fn reg_inc_gamma_tails_complement() {
        for n in 1..60 {
            for i in 0..400 {
                let x = i as f64 * 0.25;
                let (q, p) = (reg_inc_gamma_upper(n, x), reg_inc_gamma_lower(n, x));
                assert!(close(p + q, 1.0, 1e-14), "n={n} x={x}");
            }
        }
        // deep lower tail keeps relative precision: P(1, x) = 1 - e^-x
        assert!(close(reg_inc_gamma_lower(1, 1e-8) / -(-1e-8f64).exp_m1(), 1.0, 1e-12));
    }

    #[test]
    fn hyp2f1_examples() {
        assert_eq!(hyp2f1(2.5, 1.5, 3.0, 0.0).unwrap(), 1.0);
        assert!(close(hyp2f1(1.0, -2.0, 1.0, -1.0).unwrap(), 4.0, 1e-15));
        assert!(close(hyp2f1(1.0, 1.0, 2.0, 0.5).unwrap(), 2f64.ln() / 0.5, 1e-13));
        assert!(close(hyp2f1(1.0, 1.0, 2.0, 0.5).unwrap(), 1.38629, 1e-5));
    }

    // Fixed-length partial sum, no stopping rule; also returns Σ|term| so
    // cancelling polynomials can be compared on the right scale.
    fn brute(a: f64, b: f64, c: f64, z: f64, terms: u64) -> (f64, f64) {
        let (mut t, mut sum, mut abs) = (1.0f64, 0.0, 0.0);
        for n in 0..terms {
            sum += t;
            abs += t.abs();
            let nf = n as f64;
            t *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        }
        (sum, abs)
    }

    #[test]
    fn hyp2f1_polynomial_matches_rising_factorials() {
        for m in 0..12u64 {
            for &b in &[1.0, 2.5, 7.0] {
                for &c in &[1.0, 3.0, 4.5] {
                    for &z in &[-3.0, -0.5, 0.25, 0.95, 2.0] {
                        let got = hyp2f1(-(m as f64), b, c, z).unwrap();
                        let (want, scale) = brute(-(m as f64), b, c, z, m + 1);
                        assert!(close(got, want, 1e-14 * scale.max(1.0)), "m={m} b={b} c={c} z={z}");
                    }
                }
            }
        }
    }

    #[test]
    fn hyp2f1_near_one_transformations() {
        // Euler-terminating class used by the two-box expectation
        for a in 1..8 {
            for b in 1..8 {
                let (af, bf) = (a as f64, b as f64);
                for &z in &[0.91, 0.95, 0.99] {
                    let got = hyp2f1(af + bf + 1.0, 2.0, bf + 2.0, z).unwrap();
                    let want = brute(af + bf + 1.0, 2.0, bf + 2.0, z, 20_000).0;
                    assert!(close(got, want, 1e-9 * want), "a={a} b={b} z={z}");
                }
            }
        }
        // non-integer c-a-b: connection formula
        for &z in &[0.92, 0.97] {
            let got = hyp2f1(0.3, 0.7, 1.6, z).unwrap();
            let want = brute(0.3, 0.7, 1.6, z, 2_000_000).0;
            assert!(close(got, want, 1e-9), "z={z}");
        }
        // 1F0-type identity 2F1(a, b; b; z) = (1-z)^-a
        assert!(close(hyp2f1(2.0, 1.5, 1.5, 0.93).unwrap(), 0.07f64.powi(-2), 1e-8));
    }

    #[test]
    fn hyp2f1_domain_and_convergence_errors() {
        assert!(matches!(hyp2f1(0.5, 0.5, 1.0, 1.5), Err(GameError::Argument(_))));
        assert!(matches!(hyp2f1(0.5, 0.5, -1.0, 0.5), Err(GameError::Argument(_))));
        let tight = Tolerance::new(1e-13, 1000).unwrap();
        // integer c-a-b with slow algebraic decay at z close to 1
        match hyp2f1_with(3.5, 2.5, 7.0, 0.9999, &tight) {
            Err(GameError::Convergence { partial, .. }) => assert!(partial > 1.0),
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn tolerance_invariants() {
        assert!(Tolerance::new(1e-7, 1000).is_ok());
        assert!(Tolerance::new(1e-6, 1000).is_err());
        assert!(Tolerance::new(0.0, 1000).is_err());
        assert!(Tolerance::new(1e-10, 999).is_err());
        assert_eq!(Tolerance::default().rel_eps, 1e-13);
    }
}
