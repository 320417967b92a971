//! Property checks shared by the acceptance harness and the property tests.
//! Each returns a short summary on success and a description of the first
//! violation otherwise.

use alloc_game::common::{payoff_common_general, payoff_common_two_box, DEFAULT_STATE_CAP};
use alloc_game::removal::{expect_general, pmf_truncated};
use alloc_game::separate::payoff_separate;
use alloc_game::simulate::{estimate_expectation, simulate_race};
use alloc_game::strategy::enumerate_compositions;
use alloc_game::{GameConfig, ProbVector, Regime, Strategy};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

pub fn st(c: &[u32]) -> Strategy {
    Strategy::new(c.to_vec()).unwrap()
}

pub fn pv(p: &[f64]) -> ProbVector {
    ProbVector::new(p.to_vec()).unwrap()
}

/// Probability vectors used by the exhaustive checks, two and three boxes.
pub fn prob_grid(k: usize) -> Vec<ProbVector> {
    match k {
        2 => [0.1, 0.3, 0.5, 0.62, 0.85].iter().map(|&p| ProbVector::two_box(p).unwrap()).collect(),
        3 => [[0.6, 0.3, 0.1], [0.4, 0.35, 0.25], [0.75, 0.125, 0.125], [0.2, 0.5, 0.3], [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]]
            .iter()
            .map(|p| pv(p))
            .collect(),
        _ => unreachable!("grids exist for two and three boxes"),
    }
}

/// Strictly ordered three-box vectors on the interior of the ordered
/// triangle, `resolution` steps per side.
pub fn ordered_grid(resolution: u32) -> Vec<ProbVector> {
    let r = resolution as f64;
    let mut out = Vec::new();
    for l in 1..resolution {
        for j in 1..resolution - l {
            let i = resolution - j - l;
            let (wi, wj, wl) = (i as f64 / r, j as f64 / r, l as f64 / r);
            out.push(pv(&[wi + wj / 2.0 + wl / 3.0, wj / 2.0 + wl / 3.0, wl / 3.0]));
        }
    }
    out
}

pub fn pmf_normalization() -> Check {
    let mut worst = 1.0f64;
    let mut cases = 0;
    for k in [2, 3] {
        for probs in prob_grid(k) {
            for n in 1..=7 {
                for s in enumerate_compositions(n, k) {
                    let total: f64 = pmf_truncated(&s, &probs).map_err(|e| e.to_string())?.iter().map(|x| x.probability).sum();
                    cases += 1;
                    worst = worst.min(total);
                    if total < 1.0 - 1e-10 {
                        return Err(format!("{s} at {:?}: mass {total}", probs.probs()));
                    }
                }
            }
        }
    }
    Ok(format!("{cases} distributions, least mass 1 - {:.1e}", 1.0 - worst))
}

pub fn antisymmetry() -> Check {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for k in [2, 3] {
        let grid = prob_grid(k);
        for n in 1..=6 {
            let strats = enumerate_compositions(n, k);
            for (gi, p) in grid.iter().enumerate() {
                let q = &grid[(gi + 1) % grid.len()];
                for a in &strats {
                    for b in &strats {
                        let c = payoff_common_general(a, b, p, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?.value
                            + payoff_common_general(b, a, p, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?.value;
                        let s = payoff_separate(a, b, p, q, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?.value
                            + payoff_separate(b, a, q, p, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?.value;
                        pairs += 1;
                        worst = worst.max(c.abs()).max(s.abs());
                        if worst > 1e-9 {
                            return Err(format!("{a} vs {b} at {:?}: common {c:e}, separate {s:e}", p.probs()));
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{pairs} pairs in both regimes, worst {worst:.1e}"))
}

pub fn two_box_closed_vs_recursion() -> Check {
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for n in 1..=8 {
        let strats = enumerate_compositions(n, 2);
        for i in 1..20 {
            let p = i as f64 * 0.05;
            let probs = ProbVector::two_box(p).unwrap();
            for a in &strats {
                for b in &strats {
                    let closed = payoff_common_two_box(a, b, p).map_err(|e| e.to_string())?;
                    let rec = payoff_common_general(a, b, &probs, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
                    let err = (closed.value - rec.value).abs().max((closed.p_draw - rec.p_draw).abs());
                    pairs += 1;
                    worst = worst.max(err);
                    if err > 1e-10 {
                        return Err(format!("{a} vs {b} at p={p}: closed {closed:?}, recursion {rec:?}"));
                    }
                }
            }
        }
    }
    Ok(format!("{pairs} pairs, worst {worst:.1e}"))
}

fn random_probs(rng: &mut ChaCha8Rng, k: usize) -> ProbVector {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    pv(&raw.iter().map(|x| x / total).collect::<Vec<_>>())
}

fn random_strategy(rng: &mut ChaCha8Rng, n: u32, k: usize) -> Strategy {
    let all = enumerate_compositions(n, k);
    all[rng.gen_range(0..all.len())].clone()
}

/// Expectation, common-throw and separate-throw engines against seeded
/// simulation of the literal rules, cycling through the three.
pub fn engines_vs_monte_carlo(cases: usize, trials: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let mut worst_z = 0.0f64;
    for case in 0..cases {
        let k = rng.gen_range(2..=3);
        let n = rng.gen_range(1..=5);
        let probs = random_probs(&mut rng, k);
        let a = random_strategy(&mut rng, n, k);
        let seed = 1000 + case as u64;
        let (label, exact, sim) = match case % 3 {
            0 => {
                let exact = expect_general(&a, &probs).map_err(|e| e.to_string())?;
                let sim = estimate_expectation(&a, &probs, trials, seed).map_err(|e| e.to_string())?;
                (format!("expectation {a}"), exact, sim)
            }
            1 => {
                let b = random_strategy(&mut rng, n, k);
                let cfg = GameConfig::new(Regime::Common, probs.clone());
                let exact = cfg.payoff(&a, &b).map_err(|e| e.to_string())?.value;
                let sim = simulate_race(&a, &b, &cfg, trials, seed).map_err(|e| e.to_string())?;
                (format!("common {a} vs {b}"), exact, sim)
            }
            _ => {
                let b = random_strategy(&mut rng, n, k);
                let q = random_probs(&mut rng, k);
                let cfg = GameConfig::new(Regime::Separate, probs.clone()).with_col_probs(q).map_err(|e| e.to_string())?;
                let exact = cfg.payoff(&a, &b).map_err(|e| e.to_string())?.value;
                let sim = simulate_race(&a, &b, &cfg, trials, seed).map_err(|e| e.to_string())?;
                (format!("separate {a} vs {b}"), exact, sim)
            }
        };
        let z = if sim.std_error > 0.0 {
            (sim.mean - exact).abs() / sim.std_error
        } else if sim.mean == exact {
            0.0
        } else {
            f64::INFINITY
        };
        worst_z = worst_z.max(z);
        if z > 4.0 {
            return Err(format!("{label} at {:?}: exact {exact}, simulated {} ± {}", probs.probs(), sim.mean, sim.std_error));
        }
    }
    Ok(format!("{cases} cases, worst deviation {worst_z:.2} standard errors"))
}

/// Moving a counter from box `j` to a strictly likelier box `i` holding
/// fewer counters strictly lowers the expected excess throws.
pub fn monotone_transfer(n_max: u32) -> Check {
    let grid = ordered_grid(12);
    let mut moves = 0;
    for n in 1..=n_max {
        for s in enumerate_compositions(n, 3) {
            for probs in &grid {
                let p = probs.probs();
                let e = expect_general(&s, probs).map_err(|e| e.to_string())?;
                for i in 0..3 {
                    for j in 0..3 {
                        if p[i] > p[j] && s.counts()[i] < s.counts()[j] {
                            let t = s.transfer(j, i).expect("box j is nonempty");
                            let et = expect_general(&t, probs).map_err(|e| e.to_string())?;
                            moves += 1;
                            if et >= e {
                                return Err(format!("{s} -> {t} at {p:?}: {e} -> {et}"));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(format!("{moves} transfers over {} probability vectors", grid.len()))
}

/// Independent oracle for the expected excess throws: first-step analysis of
/// the removal chain over remaining counts.
pub fn expectation_by_chain(s: &Strategy, probs: &ProbVector) -> f64 {
    let c = s.counts();
    let p = probs.probs();
    let dims: Vec<usize> = c.iter().map(|&x| x as usize + 1).collect();
    let size: usize = dims.iter().product();
    let mut turns = vec![0.0f64; size];
    let mut u = vec![0usize; c.len()];
    for idx in 1..size {
        let mut rem = idx;
        for (d, slot) in dims.iter().zip(u.iter_mut()) {
            *slot = rem % d;
            rem /= d;
        }
        let mut stride = 1;
        let (mut live, mut acc) = (0.0, 1.0);
        for b in 0..c.len() {
            if u[b] > 0 {
                live += p[b];
                acc += p[b] * turns[idx - stride];
            }
            stride *= dims[b];
        }
        turns[idx] = acc / live;
    }
    turns[size - 1] - s.total() as f64
}

#[cfg(test)]
mod properties;
