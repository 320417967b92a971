"""Smoke test for the Python extension.

Build and stage the module, then run this script:

    cargo build -p alloc-game-py --release --features extension-module
    cp target/release/liballoc_game_py.so python/alloc_game_py.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import alloc_game_py as ag  # noqa: E402


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} vs {b} (tol {tol})"


def main():
    close(ag.expect([10, 0, 0], [0.7, 0.2, 0.1]), 30 / 7, 1e-9)
    close(ag.expect([10, 0, 0], [0.7, 0.2, 0.1], engine="series"), 30 / 7, 1e-8)
    close(sum(ag.pmf([2, 1, 0], [0.6, 0.3, 0.1])), 1.0, 1e-10)
    for got, want in zip(ag.pmf([1, 1], [0.5, 0.5], max_r=2), [0.5, 0.25, 0.125]):
        close(got, want, 1e-15)

    b = ag.payoff([2, 3], [1, 4], [0.4, 0.6])
    close(b["value"], 0.33, 0.005)
    close(b["p_win"] + b["p_draw"] + b["p_lose"], 1.0, 1e-12)
    sep = ag.payoff([2, 0], [1, 1], [1.0, 0.0], regime="separate", col_probs=[0.5, 0.5])
    close(sep["value"], 0.5, 1e-9)

    probs = [0.75, 0.125, 0.125]
    strats = ag.strategies(7, 3, kind="ordered", probs=probs)
    sol = ag.solve(ag.matrix(strats, probs))
    weights = {tuple(strats[i]): sol["row_mix"][i] for i in sol["support"]}
    for s, w in {(7, 0, 0): 0.156, (6, 1, 0): 0.189, (5, 1, 1): 0.655}.items():
        close(weights[s], w, 0.01)
    close(sol["value"], 0.0, 1e-8)

    zipf = ag.strategies(7, 4, kind="monotone")
    assert len(zipf) == 11
    best = min(zipf, key=lambda s: ag.expect(s, "zipf:4"))
    assert best == [5, 1, 1, 0], best

    close(ag.critical_points(5)[4], 2 ** -0.2, 1e-9)
    assert ag.cutoffs(1) == [(1, 1, 0, 0.5)]

    sim = ag.simulate([1, 1, 1], "uniform:3", trials=40_000, seed=3)
    close(sim["mean"], 2.5, 4 * sim["std_error"])

    passed, lines = ag.reproduce("mixed7")
    assert passed, lines

    try:
        ag.expect([1, 1], [0.5, 0.4])
    except ValueError:
        pass
    else:
        raise AssertionError("bad probabilities accepted")
    try:
        ag.payoff([1, 1], [2, 0], [1.0, 0.0])
    except RuntimeError:
        pass
    else:
        raise AssertionError("nonterminating game accepted")

    assert not math.isnan(ag.expect([3, 2], [0.6, 0.4]))
    print("python smoke test passed")


if __name__ == "__main__":
    main()
