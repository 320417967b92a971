//! Common-throw game: one box is drawn per turn and both players remove a
//! counter from it if they can.

use serde::{Deserialize, Serialize};

use crate::error::{GameError, Result};
use crate::joint::JointSpace;
use crate::specfun::reg_inc_beta;
use crate::strategy::{ProbVector, Strategy};

/// Default cap on the joint state count of the exact recursions.
pub const DEFAULT_STATE_CAP: u128 = 10_000_000;

/// Outcome probabilities for the row player and the resulting expected
/// payoff (+1 win, 0 draw, -1 loss).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PayoffBreakdown {
    pub p_win: f64,
    pub p_draw: f64,
    pub p_lose: f64,
    pub value: f64,
}

impl PayoffBreakdown {
    pub fn from_win_draw(p_win: f64, p_draw: f64) -> Self {
        let p_lose = (1.0 - p_win - p_draw).max(0.0);
        PayoffBreakdown {
            p_win,
            p_draw,
            p_lose,
            value: p_win - p_lose,
        }
    }

    pub fn from_win_lose(p_win: f64, p_lose: f64) -> Self {
        PayoffBreakdown {
            p_win,
            p_draw: (1.0 - p_win - p_lose).max(0.0),
            p_lose,
            value: p_win - p_lose,
        }
    }

    /// The same game seen from the other side.
    pub fn swap(self) -> Self {
        PayoffBreakdown {
            p_win: self.p_lose,
            p_draw: self.p_draw,
            p_lose: self.p_win,
            value: -self.value,
        }
    }
}

/// Closed-form common-throw payoff for two boxes with probabilities
/// `(p, 1 - p)`, via the negative-binomial race probabilities.
pub fn payoff_common_two_box(me: &Strategy, them: &Strategy, p: f64) -> Result<PayoffBreakdown> {
    if me.boxes() != 2 || them.boxes() != 2 {
        return Err(GameError::arg("two-box payoff needs strategies of length 2"));
    }
    if me.total() == 0 || them.total() == 0 {
        return Err(GameError::arg("both players need at least one counter"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(GameError::arg(format!("p = {p} must lie in (0, 1)")));
    }
    let (a1, b1) = (me.counts()[0], me.counts()[1]);
    let (a2, b2) = (them.counts()[0], them.counts()[1]);
    if (a1, b1) == (a2, b2) {
        return Ok(PayoffBreakdown::from_win_draw(0.0, 1.0));
    }
    if a1 > a2 && b1 < b2 {
        // crossing: I clears first iff my a1-th box-1 throw precedes
        // their b2-th box-2 throw
        return Ok(PayoffBreakdown::from_win_draw(reg_inc_beta(p, a1, b2)?, 0.0));
    }
    if a1 < a2 && b1 > b2 {
        return Ok(payoff_common_two_box(them, me, p)?.swap());
    }
    if a1 <= a2 && b1 <= b2 {
        // I hold fewer counters everywhere and can never lose
        let draw = if a1 < a2 && b1 < b2 {
            0.0
        } else if a1 < a2 {
            // equal box-2 holdings b: draw iff their a2 box-1 needs are met
            // before the b-th box-2 throw
            if b1 == 0 {
                0.0
            } else {
                reg_inc_beta(p, a2, b1)?
            }
        } else if a1 == 0 {
            0.0
        } else {
            reg_inc_beta(1.0 - p, b2, a1)?
        };
        return Ok(PayoffBreakdown::from_win_draw(1.0 - draw, draw));
    }
    Ok(payoff_common_two_box(them, me, p)?.swap())
}

pub(crate) fn check_common(me: &Strategy, them: &Strategy, probs: &ProbVector) -> Result<()> {
    if me.boxes() != probs.len() || them.boxes() != probs.len() {
        return Err(GameError::arg(format!(
            "strategies {me}, {them} and a {}-box probability vector disagree",
            probs.len()
        )));
    }
    if me.total() == 0 || them.total() == 0 {
        return Err(GameError::arg("both players need at least one counter"));
    }
    for (i, &p) in probs.probs().iter().enumerate() {
        if p == 0.0 && (me.counts()[i] > 0 || them.counts()[i] > 0) {
            return Err(GameError::Nontermination(format!(
                "box {} holds counters but has probability 0",
                i + 1
            )));
        }
    }
    Ok(())
}

/// Exact common-throw payoff for any number of boxes by recursion over the
/// joint remaining-counter state.
pub fn payoff_common_general(
    me: &Strategy,
    them: &Strategy,
    probs: &ProbVector,
    cap: u128,
) -> Result<PayoffBreakdown> {
    check_common(me, them, probs)?;
    let js = JointSpace::new(me, them, cap)?;
    let p = probs.probs();
    let mut win = vec![0.0f64; js.size];
    let mut draw = vec![0.0f64; js.size];
    js.for_each(|idx, u, v| {
        let u_done = idx < js.col_size;
        let v_done = idx % js.col_size == 0;
        match (u_done, v_done) {
            (true, true) => draw[idx] = 1.0,
            (true, false) => win[idx] = 1.0,
            (false, true) => {}
            (false, false) => {
                let (mut w, mut d, mut mass) = (0.0, 0.0, 0.0);
                for i in 0..p.len() {
                    let mut next = idx;
                    if u[i] > 0 {
                        next -= js.row_stride[i];
                    }
                    if v[i] > 0 {
                        next -= js.col_stride[i];
                    }
                    if next == idx || p[i] == 0.0 {
                        continue;
                    }
                    w += p[i] * win[next];
                    d += p[i] * draw[next];
                    mass += p[i];
                }
                // boxes empty for both players are self-loops
                win[idx] = w / mass;
                draw[idx] = d / mass;
            }
        }
    });
    Ok(PayoffBreakdown::from_win_draw(win[js.size - 1], draw[js.size - 1]))
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> f64 {
    let flo = f(lo);
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roots of `I_p(r, n + 1 - r) = 1/2` for `r = 1..=n`, ascending. These are
/// the probabilities at which adjacent crossing strategies trade places.
pub fn critical_p_common(n: u32) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(GameError::arg("critical points need n >= 1"));
    }
    let mut roots = Vec::with_capacity(n as usize);
    for r in 1..=n {
        let f = |p: f64| reg_inc_beta(p, r, n + 1 - r).expect("p in [0,1]") - 0.5;
        roots.push(bisect(f, 0.0, 1.0, 1e-14));
    }
    roots.sort_by(f64::total_cmp);
    Ok(roots)
}

/// Mean margin of victory for `<a+1,b>` against `<a,b+1>`: the expected
/// number of throws the loser still needs when the winner clears, signed
/// positive when the row player wins.
pub fn expected_margin(a: u32, b: u32, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(GameError::arg(format!("p = {p} must lie in (0, 1)")));
    }
    let i = reg_inc_beta(p, a + 1, b + 1)?;
    Ok(i / (1.0 - p) - (1.0 - i) / p)
}
