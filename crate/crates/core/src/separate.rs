//! Separate-throw game: each player draws their own box every turn, possibly
//! from their own probability vector.

use crate::common::PayoffBreakdown;
use crate::error::{GameError, Result};
use crate::joint::JointSpace;
use crate::strategy::{ProbVector, Strategy};

pub(crate) fn check_side(s: &Strategy, probs: &ProbVector, who: &str) -> Result<()> {
    if s.boxes() != probs.len() {
        return Err(GameError::arg(format!(
            "{who} strategy {s} has {} boxes but the probability vector has {}",
            s.boxes(),
            probs.len()
        )));
    }
    if s.total() == 0 {
        return Err(GameError::arg(format!("{who} needs at least one counter")));
    }
    for (i, (&c, &p)) in s.counts().iter().zip(probs.probs()).enumerate() {
        if c > 0 && p == 0.0 {
            return Err(GameError::Nontermination(format!(
                "{who} holds counters in box {} which they never draw",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Exact separate-throw payoff by recursion over the joint state, with the
/// turns where both players waste their throw renormalized away.
pub fn payoff_separate(
    me: &Strategy,
    them: &Strategy,
    my_probs: &ProbVector,
    their_probs: &ProbVector,
    cap: u128,
) -> Result<PayoffBreakdown> {
    check_side(me, my_probs, "row player")?;
    check_side(them, their_probs, "column player")?;
    let js = JointSpace::new(me, them, cap)?;
    let (p, q) = (my_probs.probs(), their_probs.probs());
    let k = p.len();
    let mut win = vec![0.0f64; js.size];
    let mut draw = vec![0.0f64; js.size];
    // (probability, index offset) of each progressing move; reused buffers
    let mut mine: Vec<(f64, usize)> = Vec::with_capacity(k);
    let mut theirs: Vec<(f64, usize)> = Vec::with_capacity(k);
    js.for_each(|idx, u, v| {
        let u_done = idx < js.col_size;
        let v_done = idx % js.col_size == 0;
        match (u_done, v_done) {
            (true, true) => draw[idx] = 1.0,
            (true, false) => win[idx] = 1.0,
            (false, true) => {}
            (false, false) => {
                mine.clear();
                theirs.clear();
                let (mut w_me, mut w_them) = (0.0, 0.0);
                for i in 0..k {
                    if u[i] > 0 {
                        mine.push((p[i], js.row_stride[i]));
                    } else {
                        w_me += p[i];
                    }
                    if v[i] > 0 {
                        theirs.push((q[i], js.col_stride[i]));
                    } else {
                        w_them += q[i];
                    }
                }
                let (mut w, mut d) = (0.0, 0.0);
                let mut add = |pr: f64, next: usize| {
                    w += pr * win[next];
                    d += pr * draw[next];
                };
                for &(pa, oa) in &mine {
                    add(pa * w_them, idx - oa);
                    for &(pb, ob) in &theirs {
                        add(pa * pb, idx - oa - ob);
                    }
                }
                for &(pb, ob) in &theirs {
                    add(w_me * pb, idx - ob);
                }
                let progress = 1.0 - w_me * w_them;
                win[idx] = w / progress;
                draw[idx] = d / progress;
            }
        }
    });
    Ok(PayoffBreakdown::from_win_draw(win[js.size - 1], draw[js.size - 1]))
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(GameError::arg(format!("p = {p} must lie in (0, 1)")))
    }
}

/// `<1,0>` vs `<0,1>`, both players on `(p, 1 - p)`.
pub fn payoff_1001_closed(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok((2.0 * p - 1.0) / (1.0 - p * (1.0 - p)))
}

/// `<2,0>` vs `<0,1>`.
pub fn payoff_2001_closed(p: f64) -> Result<f64> {
    check_p(p)?;
    let d = 1.0 - p * (1.0 - p);
    Ok((3.0 * p.powi(3) - 3.0 * p * p + 2.0 * p - 1.0) / (d * d))
}

/// `<2,0>` vs `<1,0>`.
pub fn payoff_2010_closed(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(1.0 / (p - 2.0))
}

fn num_2011(p: f64) -> f64 {
    p.powi(5) - 4.0 * p.powi(3) + 3.0 * p * p - 2.0 * p + 1.0
}

/// `<2,0>` vs `<1,1>` as a single rational function.
pub fn payoff_2011_closed(p: f64) -> Result<f64> {
    check_p(p)?;
    let den = p.powi(5) - 4.0 * p.powi(4) + 7.0 * p.powi(3) - 8.0 * p * p + 5.0 * p - 2.0;
    Ok(num_2011(p) / den)
}

/// The real root of the `<2,0>` vs `<1,1>` numerator in `(0, 1)`, where the
/// game changes sign.
pub fn root_2011() -> Result<f64> {
    let (mut lo, mut hi) = (0.01, 0.99);
    if num_2011(lo).signum() == num_2011(hi).signum() {
        return Err(GameError::NoRoot("numerator keeps one sign on (0.01, 0.99)".into()));
    }
    let slo = num_2011(lo).signum();
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if num_2011(mid).signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section minimum of `f` on `[lo, hi]`; `f` is assumed unimodal
/// there.
pub fn golden_min(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, f(x)?))
}
