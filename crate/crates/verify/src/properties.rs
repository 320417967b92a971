use alloc_game::common::{payoff_common_general, DEFAULT_STATE_CAP};
use alloc_game::removal::{expect_general, expect_series, expect_three_closed, pmf_general};
use alloc_game::separate::payoff_separate;
use alloc_game::solver::{build_matrix, solve_zero_sum};
use alloc_game::strategy::{enumerate_compositions, enumerate_monotone};
use alloc_game::{GameConfig, ProbVector, Regime, Strategy};
use proptest::prelude::*;
use proptest::strategy::Strategy as Gen;

use crate::*;

#[test]
fn pmf_mass_reaches_one() {
    pmf_normalization().unwrap();
}

#[test]
fn payoffs_are_antisymmetric() {
    antisymmetry().unwrap();
}

#[test]
fn two_box_closed_form_matches_recursion() {
    two_box_closed_vs_recursion().unwrap();
}

#[test]
fn engines_agree_with_simulation() {
    engines_vs_monte_carlo(25, 40_000).unwrap();
}

#[test]
fn transfer_to_likelier_box_lowers_expectation() {
    monotone_transfer(7).unwrap();
}

#[test]
fn expectation_matches_absorbing_chain() {
    for k in [2, 3] {
        for probs in prob_grid(k) {
            for n in 1..=8 {
                for s in enumerate_compositions(n, k) {
                    let want = expectation_by_chain(&s, &probs);
                    let got = expect_general(&s, &probs).unwrap();
                    let series = expect_series(&s, &probs).unwrap();
                    assert!((got - want).abs() < 1e-9 * want.max(1.0), "{s} {:?}: {got} vs {want}", probs.probs());
                    assert!((series - want).abs() < 1e-8 * want.max(1.0), "{s} {:?}: {series} vs {want}", probs.probs());
                }
            }
        }
    }
}

#[test]
fn ten_counter_expectations_match_chain() {
    let probs = pv(&[0.7, 0.2, 0.1]);
    for s in enumerate_monotone(10, 3) {
        let want = expectation_by_chain(&s, &probs);
        assert!((expect_general(&s, &probs).unwrap() - want).abs() < 1e-8);
        assert!((expect_series(&s, &probs).unwrap() - want).abs() < 1e-8);
    }
    assert!((expectation_by_chain(&st(&[10, 0, 0]), &probs) - 30.0 / 7.0).abs() < 1e-12);
}

#[test]
fn three_box_closed_forms_match_general() {
    let strats = [st(&[3, 0, 0]), st(&[2, 1, 0]), st(&[1, 1, 1])];
    let mut points = 0;
    for probs in ordered_grid(12) {
        for s in &strats {
            let closed = expect_three_closed(s, &probs).unwrap();
            let general = expect_general(s, &probs).unwrap();
            assert!((closed - general).abs() < 1e-10 * general.max(1.0), "{s} {:?}", probs.probs());
        }
        points += 1;
    }
    assert!(points >= 50);
}

/// Where <2,1,0> and <1,1,1> tie, and where <3,0,0> and <2,1,0> tie, the
/// expectation differences change sign along a line of the triangle.
#[test]
fn region_boundaries_are_sign_changes() {
    let diff = |a: &Strategy, b: &Strategy, p3: f64, p2: f64| {
        let probs = pv(&[1.0 - p2 - p3, p2, p3]);
        expect_general(a, &probs).unwrap() - expect_general(b, &probs).unwrap()
    };
    let (s300, s210, s111) = (st(&[3, 0, 0]), st(&[2, 1, 0]), st(&[1, 1, 1]));
    // near the uniform corner <1,1,1> wins, near (1,0,0) <3,0,0> wins
    assert!(diff(&s111, &s210, 0.32, 0.33) < 0.0);
    assert!(diff(&s300, &s210, 0.01, 0.02) < 0.0);
    let mut crossings = Vec::new();
    for i in 1..40 {
        let p2 = 0.2 + i as f64 * 0.005;
        let (mut lo, mut hi) = (1e-6, p2);
        let f = |p3: f64| diff(&s111, &s210, p3, p2);
        if f(lo).signum() == f(hi).signum() {
            continue;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if f(mid).signum() == f(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        crossings.push((p2, lo));
    }
    assert!(crossings.len() >= 3, "{crossings:?}");
    // the boundary is curved: midpoints leave the chord between the ends
    let (a, b) = (crossings[0], *crossings.last().unwrap());
    let m = crossings[crossings.len() / 2];
    let on_chord = a.1 + (b.1 - a.1) * (m.0 - a.0) / (b.0 - a.0);
    assert!((m.1 - on_chord).abs() > 1e-6, "{crossings:?}");
}

#[test]
fn separate_transfer_never_lowers_payoff() {
    let grid = ordered_grid(6);
    for n in 1..=5 {
        let strats = enumerate_compositions(n, 3);
        for probs in &grid {
            let p = probs.probs();
            for s in &strats {
                for i in 0..3 {
                    for j in 0..3 {
                        if !(p[i] > p[j] && s.counts()[i] < s.counts()[j]) {
                            continue;
                        }
                        let t = s.transfer(j, i).unwrap();
                        for opp in &strats {
                            let before = payoff_separate(s, opp, probs, probs, DEFAULT_STATE_CAP).unwrap().value;
                            let after = payoff_separate(&t, opp, probs, probs, DEFAULT_STATE_CAP).unwrap().value;
                            assert!(after >= before - 1e-12, "{s} -> {t} vs {opp} at {p:?}: {before} -> {after}");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn antisymmetric_games_have_value_zero() {
    for probs in prob_grid(3) {
        for regime in [Regime::Common, Regime::Separate] {
            let m = build_matrix(&enumerate_compositions(4, 3), &GameConfig::new(regime, probs.clone())).unwrap();
            let sol = solve_zero_sum(&m).unwrap();
            assert!(sol.value.abs() < 1e-8, "{regime} {:?}: {}", probs.probs(), sol.value);
            assert!((sol.row_mix.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}

fn permute<T: Copy>(xs: &[T], perm: &[usize]) -> Vec<T> {
    perm.iter().map(|&i| xs[i]).collect()
}

fn arb_probs(k: usize) -> impl Gen<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, k).prop_map(|raw| {
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    })
}

fn arb_counts(k: usize) -> impl Gen<Value = Vec<u32>> {
    prop::collection::vec(0u32..4, k).prop_filter("at least one counter", |c| c.iter().sum::<u32>() > 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exchangeable_under_box_permutation(
        p in arb_probs(3),
        q in arb_probs(3),
        a in arb_counts(3),
        b_raw in arb_counts(3),
        perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
    ) {
        // common-throw opponents must hold the same quota
        let b: Vec<u32> = if b_raw.iter().sum::<u32>() == a.iter().sum::<u32>() {
            b_raw.clone()
        } else {
            a.iter().rev().copied().collect()
        };
        let (sa, sb) = (st(&a), st(&b));
        let (pa, pb) = (st(&permute(&a, &perm)), st(&permute(&b, &perm)));
        let (probs, qv) = (pv(&p), pv(&q));
        let (pp, qp) = (pv(&permute(&p, &perm)), pv(&permute(&q, &perm)));

        let e = expect_general(&sa, &probs).unwrap();
        prop_assert!((e - expect_general(&pa, &pp).unwrap()).abs() < 1e-9 * e.max(1.0));
        prop_assert!((pmf_general(&sa, &probs, 3).unwrap() - pmf_general(&pa, &pp, 3).unwrap()).abs() < 1e-12);

        let c = payoff_common_general(&sa, &sb, &probs, DEFAULT_STATE_CAP).unwrap();
        let cp = payoff_common_general(&pa, &pb, &pp, DEFAULT_STATE_CAP).unwrap();
        prop_assert!((c.value - cp.value).abs() < 1e-12 && (c.p_draw - cp.p_draw).abs() < 1e-12);

        let s = payoff_separate(&sa, &st(&b_raw), &probs, &qv, DEFAULT_STATE_CAP).unwrap();
        let sp = payoff_separate(&pa, &st(&permute(&b_raw, &perm)), &pp, &qp, DEFAULT_STATE_CAP).unwrap();
        prop_assert!((s.value - sp.value).abs() < 1e-12);
    }

    #[test]
    fn pmf_sums_to_one_random(p in arb_probs(3), a in arb_counts(3)) {
        let probs = ProbVector::new(p).unwrap();
        let total: f64 = alloc_game::removal::pmf_truncated(&st(&a), &probs).unwrap().iter().map(|x| x.probability).sum();
        prop_assert!(total >= 1.0 - 1e-10);
    }

    #[test]
    fn payoff_breakdown_is_a_distribution(p in arb_probs(3), a in arb_counts(3), b in arb_counts(3)) {
        let probs = ProbVector::new(p).unwrap();
        let r = payoff_separate(&st(&a), &st(&b), &probs, &probs, DEFAULT_STATE_CAP).unwrap();
        prop_assert!(r.p_win >= -1e-15 && r.p_draw >= -1e-15 && r.p_lose >= -1e-15);
        prop_assert!((r.p_win + r.p_draw + r.p_lose - 1.0).abs() < 1e-12);
        prop_assert!((r.value - (r.p_win - r.p_lose)).abs() < 1e-12);
    }
}
