//! Seeded Monte Carlo play of the literal game rules.
//!
//! Trial `t` draws from ChaCha8 seeded with `seed` on stream `t`, so every
//! trial is reproducible on its own and trials can run in any order. Tallies
//! are integers, which makes the merged totals independent of scheduling.

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::common::{check_common, PayoffBreakdown};
use crate::error::{GameError, Result};
use crate::removal::check_general;
use crate::separate::check_side;
use crate::solver::{GameConfig, Regime};
use crate::strategy::{ProbVector, Strategy};

/// Turns allowed per trial before it is abandoned and flagged.
pub const TURN_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub trials: u64,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(trials)`.
    pub std_error: f64,
    pub wins: u64,
    pub draws: u64,
    pub losses: u64,
    /// Trials stopped at [`TURN_CAP`]. A capped race counts as a draw and a
    /// capped removal contributes the throws made so far.
    pub cap_hits: u64,
}

impl SimResult {
    pub fn breakdown(&self) -> PayoffBreakdown {
        let n = self.trials as f64;
        PayoffBreakdown::from_win_lose(self.wins as f64 / n, self.losses as f64 / n)
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    n: u64,
    wins: u64,
    draws: u64,
    losses: u64,
    caps: u64,
    sum: i128,
    sum_sq: i128,
}

impl Tally {
    fn add(mut self, x: i64) -> Self {
        self.n += 1;
        self.sum += x as i128;
        self.sum_sq += (x as i128) * (x as i128);
        self
    }

    fn merge(self, o: Tally) -> Tally {
        Tally {
            n: self.n + o.n,
            wins: self.wins + o.wins,
            draws: self.draws + o.draws,
            losses: self.losses + o.losses,
            caps: self.caps + o.caps,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    fn finish(self) -> SimResult {
        let n = self.n as f64;
        let mean = self.sum as f64 / n;
        let var = if self.n > 1 {
            // exact integer numerator n*Σx² − (Σx)²
            let num = self.n as i128 * self.sum_sq - self.sum * self.sum;
            num as f64 / (n * (n - 1.0))
        } else {
            0.0
        };
        SimResult {
            trials: self.n,
            mean,
            std_error: (var.max(0.0) / n).sqrt(),
            wins: self.wins,
            draws: self.draws,
            losses: self.losses,
            cap_hits: self.caps,
        }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn sampler(probs: &ProbVector) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new(probs.probs()).map_err(|e| GameError::arg(format!("cannot sample boxes: {e}")))
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(GameError::arg("need at least one trial"));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Win,
    Draw,
    Lose,
}

struct Race<'a> {
    me: &'a [u32],
    them: &'a [u32],
    common: bool,
    mine: &'a WeightedIndex<f64>,
    theirs: &'a WeightedIndex<f64>,
}

impl Race<'_> {
    /// Play one race. With `margin`, keep throwing after the first player
    /// clears and return the loser's extra turns, signed for the row player.
    fn play(&self, rng: &mut ChaCha8Rng, margin: bool) -> (Outcome, i64, bool) {
        let mut u = self.me.to_vec();
        let mut v = self.them.to_vec();
        let mut left_u: u32 = u.iter().sum();
        let mut left_v: u32 = v.iter().sum();
        let mut turns = 0u64;
        while left_u > 0 && left_v > 0 {
            if turns == TURN_CAP {
                return (Outcome::Draw, 0, true);
            }
            turns += 1;
            let i = self.mine.sample(rng);
            let j = if self.common { i } else { self.theirs.sample(rng) };
            if u[i] > 0 {
                u[i] -= 1;
                left_u -= 1;
            }
            if v[j] > 0 {
                v[j] -= 1;
                left_v -= 1;
            }
        }
        let outcome = match (left_u == 0, left_v == 0) {
            (true, true) => Outcome::Draw,
            (true, false) => Outcome::Win,
            _ => Outcome::Lose,
        };
        if !margin || outcome == Outcome::Draw {
            return (outcome, 0, false);
        }
        let (rest, left, dist, sign) = if outcome == Outcome::Win {
            (&mut v, &mut left_v, self.theirs, 1)
        } else {
            (&mut u, &mut left_u, self.mine, -1)
        };
        let mut extra = 0i64;
        while *left > 0 {
            if turns == TURN_CAP {
                return (outcome, sign * extra, true);
            }
            turns += 1;
            extra += 1;
            let b = dist.sample(rng);
            if rest[b] > 0 {
                rest[b] -= 1;
                *left -= 1;
            }
        }
        (outcome, sign * extra, false)
    }
}

fn run_race(me: &Strategy, them: &Strategy, config: &GameConfig, trials: u64, seed: u64, margin: bool) -> Result<SimResult> {
    check_trials(trials)?;
    let common = config.regime == Regime::Common;
    if common {
        check_common(me, them, &config.row_probs)?;
    } else {
        check_side(me, &config.row_probs, "row player")?;
        check_side(them, config.col_probs(), "column player")?;
    }
    let mine = sampler(&config.row_probs)?;
    let theirs = sampler(config.col_probs())?;
    let race = Race {
        me: me.counts(),
        them: them.counts(),
        common,
        mine: &mine,
        theirs: &theirs,
    };
    let tally = (0..trials)
        .into_par_iter()
        .fold(Tally::default, |t, trial| {
            let (outcome, m, capped) = race.play(&mut trial_rng(seed, trial), margin);
            let mut t = t.add(if margin {
                m
            } else {
                match outcome {
                    Outcome::Win => 1,
                    Outcome::Draw => 0,
                    Outcome::Lose => -1,
                }
            });
            match outcome {
                Outcome::Win => t.wins += 1,
                Outcome::Draw => t.draws += 1,
                Outcome::Lose => t.losses += 1,
            }
            t.caps += capped as u64;
            t
        })
        .reduce(Tally::default, Tally::merge);
    Ok(tally.finish())
}

/// Simulated payoff to `me` against `them`; `mean` estimates the game value.
pub fn simulate_race(me: &Strategy, them: &Strategy, config: &GameConfig, trials: u64, seed: u64) -> Result<SimResult> {
    run_race(me, them, config, trials, seed, false)
}

/// Simulated margin of victory: after the first player clears, the turns the
/// other still needs, positive when `me` cleared first. Draws count 0.
pub fn simulate_margin(me: &Strategy, them: &Strategy, config: &GameConfig, trials: u64, seed: u64) -> Result<SimResult> {
    run_race(me, them, config, trials, seed, true)
}

/// Simulated excess throws `t - n` for a single player.
pub fn estimate_expectation(strategy: &Strategy, probs: &ProbVector, trials: u64, seed: u64) -> Result<SimResult> {
    check_trials(trials)?;
    check_general(strategy, probs)?;
    let dist = sampler(probs)?;
    let quota = strategy.total() as i64;
    let tally = (0..trials)
        .into_par_iter()
        .fold(Tally::default, |t, trial| {
            let mut rng = trial_rng(seed, trial);
            let mut u = strategy.counts().to_vec();
            let mut left = strategy.total();
            let mut turns = 0u64;
            let mut capped = false;
            while left > 0 {
                if turns == TURN_CAP {
                    capped = true;
                    break;
                }
                turns += 1;
                let b = dist.sample(&mut rng);
                if u[b] > 0 {
                    u[b] -= 1;
                    left -= 1;
                }
            }
            let mut t = t.add(turns as i64 - quota);
            t.caps += capped as u64;
            t
        })
        .reduce(Tally::default, Tally::merge);
    Ok(tally.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::reg_inc_beta;

    fn s(c: &[u32]) -> Strategy {
        Strategy::new(c.to_vec()).unwrap()
    }

    fn within(r: &SimResult, want: f64, k: f64) -> bool {
        (r.mean - want).abs() <= k * r.std_error
    }

    #[test]
    fn common_two_box_race() {
        let cfg = GameConfig::new(Regime::Common, ProbVector::two_box(0.4).unwrap());
        let r = simulate_race(&s(&[2, 3]), &s(&[1, 4]), &cfg, 200_000, 11).unwrap();
        let want = 2.0 * reg_inc_beta(0.4, 2, 4).unwrap() - 1.0;
        assert!(within(&r, want, 3.0), "{r:?} vs {want}");
        assert_eq!(r.wins + r.draws + r.losses, r.trials);
        assert_eq!(r.cap_hits, 0);
    }

    #[test]
    fn identical_strategies_always_draw() {
        let cfg = GameConfig::new(Regime::Common, ProbVector::new(vec![0.5, 0.3, 0.2]).unwrap());
        let r = simulate_race(&s(&[2, 1, 1]), &s(&[2, 1, 1]), &cfg, 1000, 3).unwrap();
        assert_eq!(r.draws, 1000);
        assert_eq!(r.std_error, 0.0);
    }

    #[test]
    fn separate_symmetric_singletons() {
        let cfg = GameConfig::new(Regime::Separate, ProbVector::two_box(0.5).unwrap());
        let r = simulate_race(&s(&[1, 0]), &s(&[0, 1]), &cfg, 100_000, 5).unwrap();
        assert!(within(&r, 0.0, 3.0));
    }

    #[test]
    fn expectation_examples() {
        let r = estimate_expectation(&s(&[1, 0]), &ProbVector::two_box(0.3).unwrap(), 200_000, 1).unwrap();
        assert!(within(&r, 0.7 / 0.3, 3.0));
        let r = estimate_expectation(&s(&[1, 1, 1]), &ProbVector::uniform(3).unwrap(), 200_000, 2).unwrap();
        assert!(within(&r, 2.5, 3.0));
    }

    #[test]
    fn reproducible_for_a_seed() {
        let cfg = GameConfig::new(Regime::Separate, ProbVector::new(vec![0.6, 0.3, 0.1]).unwrap());
        let a = simulate_race(&s(&[2, 1, 0]), &s(&[1, 1, 1]), &cfg, 5000, 42).unwrap();
        let b = simulate_race(&s(&[2, 1, 0]), &s(&[1, 1, 1]), &cfg, 5000, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_race(&s(&[2, 1, 0]), &s(&[1, 1, 1]), &cfg, 5000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn margin_matches_geometric_formula() {
        let p = 0.65;
        let cfg = GameConfig::new(Regime::Common, ProbVector::two_box(p).unwrap());
        for (a, b) in [(1, 1), (1, 3), (2, 4)] {
            let r = simulate_margin(&s(&[a + 1, b]), &s(&[a, b + 1]), &cfg, 200_000, 9).unwrap();
            let want = crate::common::expected_margin(a, b, p).unwrap();
            assert!(within(&r, want, 3.0), "a={a} b={b}: {r:?} vs {want}");
            assert_eq!(r.draws, 0);
        }
    }

    #[test]
    fn preconditions() {
        let cfg = GameConfig::new(Regime::Common, ProbVector::new(vec![1.0, 0.0]).unwrap());
        assert!(matches!(
            simulate_race(&s(&[1, 1]), &s(&[2, 0]), &cfg, 10, 0),
            Err(GameError::Nontermination(_))
        ));
        assert!(simulate_race(&s(&[2, 0]), &s(&[2, 0]), &cfg, 0, 0).is_err());
    }
}
