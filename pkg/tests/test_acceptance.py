"""Acceptance criteria, one test each.

Every test prints a ``PASS`` / ``FAIL`` line (collected by ``conftest.py``
into the terminal summary).  Run ``python3 tests/test_acceptance.py`` to get
just those lines.
"""
from __future__ import annotations

import dataclasses
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from randlam import analytics, rng
from randlam.experiments import (
    RunConfig,
    cmd_converge,
    cmd_dimension,
    cmd_simulate,
    heights_at_uniform,
    simulate_state,
)
from randlam.fragmentation import HOMOGENEOUS, SELF_SIMILAR, FragState, dual_tree_distance_formula
from randlam.core_model import lamination_from_step
from randlam.limit_process import LimitNodeRandomness, LimitSpec, eval_grid

RESULTS: list[str] = []
SEED = 20240601


def report(number: int, title: str, passed: bool, detail: str, elapsed: float):
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:2d} {title}: {detail} [{elapsed:.1f}s]"
    RESULTS.append(line)
    print(line)
    return passed


def exact_means(t0):
    exact = analytics.mean_exact(200)
    rec = analytics.mean_recurrence(200)
    worst = 0.0
    for n in range(1, 201):
        cf = analytics.mean_closed_form(n)
        e = float(exact[n])
        worst = max(worst, abs(cf - e), abs(rec[n] - e), abs(cf - rec[n]))
    rationals = exact[1] == Fraction(1, 3) and exact[2] == Fraction(8, 15)
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and rationals and elapsed < 10
    return ok, f"max route difference {worst:.2e}, mu(1)=1/3 and mu(2)=8/15 exact: {rationals}"


def asymptotic_constant(t0):
    c = analytics.asymptotic_c()
    resid = {}
    for n in (10**3, 10**4, 10**5):
        resid[n] = abs(analytics.mean_selfsimilar(n) - c * n ** (analytics.BETA / 2))
    ratio = analytics.mean_selfsimilar(10**4) / (c * (10**4) ** (analytics.BETA / 2))
    orders = [math.floor(math.log10(resid[n])) for n in sorted(resid)]
    ok = (abs(ratio - 1) <= 0.1 and all(b <= a for a, b in zip(orders, orders[1:]))
          and time.perf_counter() - t0 < 120)
    detail = f"ratio at 1e4 {ratio:.4f}, residuals " + ", ".join(f"{resid[n]:.5f}" for n in sorted(resid))
    return ok, detail


def monte_carlo_mean(t0):
    parts, ok = [], True
    for mode, exact in ((SELF_SIMILAR, analytics.mean_selfsimilar(1000)),
                        (HOMOGENEOUS, analytics.mean_homogeneous(1000))):
        h = heights_at_uniform(mode, 1000, SEED, 10**4)
        se = h.std(ddof=1) / math.sqrt(h.size)
        z = (h.mean() - exact) / se
        ok &= abs(z) <= 3
        parts.append(f"{mode} mean {h.mean():.4f} vs {exact:.4f} (z={z:+.2f})")
    ok &= time.perf_counter() - t0 < 120
    return ok, "; ".join(parts)


def chord_count(t0):
    files = cmd_simulate(RunConfig(n_trials=10**5, replicates=100, seed=SEED))
    rows = [line.split(",") for line in files["summary.csv"].splitlines()[1:]]
    ratio = float(np.mean([float(r[3]) for r in rows]))
    rel = ratio / math.sqrt(math.pi) - 1
    ok = abs(rel) <= 0.02 and time.perf_counter() - t0 < 60
    return ok, f"mean N_n/sqrt(n) {ratio:.4f} vs sqrt(pi) {math.sqrt(math.pi):.4f} ({100 * rel:+.2f}%)"


def oracle_equivalences(t0):
    gen = np.random.default_rng(SEED)
    bad = 0
    for r in range(200):
        mode = SELF_SIMILAR if r % 2 == 0 else HOMOGENEOUS
        state = simulate_state(mode, int(gen.integers(1, 501)), SEED, r)
        f = state.height_function()
        bad += lamination_from_step(f).as_set() != set(state.chords)
        for s, t in gen.random((100, 2)):
            h = state.height_crossing(s)
            bad += h != state.height_tree(s) or h != f(s)
            bad += state.dual_tree_distance(s, t) != dual_tree_distance_formula(f, s, t)
    return bad == 0, f"200 runs x 100 queries, {bad} disagreements"


def martingale_mean(t0):
    s = np.array([0.1, 0.25, 0.5])
    parts, ok = [], True
    for mode in (SELF_SIMILAR, HOMOGENEOUS):
        vals = np.array([eval_grid(LimitSpec(mode, 8, LimitNodeRandomness(SEED, r)), s)
                         for r in range(10**4)])
        mean = LimitSpec(mode, 8, LimitNodeRandomness(SEED)).mean(s)
        z = (vals.mean(0) - mean) / (vals.std(0, ddof=1) / math.sqrt(len(vals)))
        ok &= bool(np.all(np.abs(z) <= 4))
        parts.append(f"{mode} z=" + ",".join(f"{x:+.2f}" for x in z))
    ok &= time.perf_counter() - t0 < 120
    return ok, "; ".join(parts)


def coupled_convergence(t0):
    cfg = RunConfig(n_trials=10**4, replicates=50, depth=12, grid=1024, seed=SEED,
                    schedule=(10**2, 10**3, 10**4))
    files = cmd_converge(cfg)
    rows = [line.split(",") for line in files["converge_summary.csv"].splitlines()[1:]]
    sup = [float(r[1]) for r in rows]
    gh = [float(r[2]) for r in rows]
    dec = lambda xs: all(b < a for a, b in zip(xs, xs[1:]))
    ok = dec(sup) and dec(gh) and time.perf_counter() - t0 < 600
    return ok, ("median sup " + " > ".join(f"{x:.4f}" for x in sup)
                + "; median gh bound " + " > ".join(f"{x:.4f}" for x in gh))


def box_dimension(t0):
    cfg = RunConfig(depth=14, grid=2**14, seed=SEED, delta_min=2.0**-7, delta_max=2.0**-3)
    files = cmd_dimension(cfg)
    rows = {r.split(",")[0]: float(r.split(",")[1]) for r in files["dimension_summary.csv"].splitlines()[1:]}
    slope, control = rows["limit"], rows["segment"]
    ok = 1.5 <= slope <= 2.05 and 0.9 <= control <= 1.1 and time.perf_counter() - t0 < 300
    return ok, f"limit-tree slope {slope:.3f} (band [1.5, 2.05], 1/beta={1 / analytics.BETA:.3f}), segment {control:.3f}"


def distributional_splits(t0):
    reps = 10**4
    # self-similar: first chord fixed at (0.2, 0.6); classify the next n-1 trials
    n = 5
    cells = {}
    for r in range(reps):
        state = FragState(SELF_SIMILAR)
        state.trial_selfsimilar(0.2, 0.6)
        pairs = rng.selfsimilar_pairs(SEED, r, n - 1)
        state.run_selfsimilar(pairs)
        side = [[state.locate(p).address[0] for p in pair] for pair in pairs]
        i0 = sum(a == b == "0" for a, b in side)
        i1 = sum(a == b == "1" for a, b in side)
        cells[(i0, i1)] = cells.get((i0, i1), 0) + 1
    d = 0.4
    probs = ((1 - d) ** 2, d ** 2, 2 * d * (1 - d))
    keys = [(i, j) for i in range(n) for j in range(n - i)]
    expected = np.array([stats.multinomial.pmf([i, j, n - 1 - i - j], n - 1, probs) for i, j in keys]) * reps
    observed = np.array([cells.get(k, 0) for k in keys])
    p_multi = stats.chisquare(observed, expected).pvalue
    # homogeneous: number of later splits inside the first chord's fragment
    n = 10
    counts = np.zeros(n, dtype=int)
    for r in range(reps):
        state = simulate_state(HOMOGENEOUS, n, SEED, r)
        counts[sum(a.startswith("1") for a in state.chord_address)] += 1
    p_unif = stats.chisquare(counts).pvalue
    ok = p_multi > 0.001 and p_unif > 0.001
    return ok, f"multinomial p={p_multi:.3f}, uniform I1 p={p_unif:.3f}"


def brownian_gap(t0):
    lhs, rhs = analytics.brownian_gap()
    return abs(lhs - rhs) > 0.3, f"|{lhs:.5f} - {rhs}| = {abs(lhs - rhs):.5f} > 0.3"


def determinism(t0):
    base = RunConfig(n_trials=800, replicates=16, depth=8, grid=513, seed=SEED)
    runs = [
        lambda c: cmd_simulate(c),
        lambda c: cmd_simulate(dataclasses.replace(c, mode=HOMOGENEOUS)),
        lambda c: cmd_converge(dataclasses.replace(c, schedule=(100, 1000))),
        lambda c: cmd_converge(dataclasses.replace(c, mode=HOMOGENEOUS, schedule=(100, 1000))),
        lambda c: cmd_dimension(dataclasses.replace(c, depth=10, grid=4096)),
    ]
    compared = differ = 0
    for run in runs:
        one = run(dataclasses.replace(base, workers=1))
        eight = run(dataclasses.replace(base, workers=8))
        for name in one:
            if name.endswith(".csv"):
                compared += 1
                differ += one[name] != eight[name]
    return differ == 0, f"{compared} CSV files compared under 1 and 8 workers, {differ} differ"


CRITERIA = [
    (1, "exact-mean cross-validation", exact_means),
    (2, "asymptotic constant", asymptotic_constant),
    (3, "Monte Carlo vs exact mean", monte_carlo_mean),
    (4, "chord count", chord_count),
    (5, "oracle equivalences", oracle_equivalences),
    (6, "limit martingale mean", martingale_mean),
    (7, "coupled convergence", coupled_convergence),
    (8, "box dimension", box_dimension),
    (9, "distributional splits", distributional_splits),
    (10, "Brownian-excursion gap", brownian_gap),
    (11, "determinism", determinism),
]


def run_criterion(number: int, title: str, fn) -> bool:
    t0 = time.perf_counter()
    ok, detail = fn(t0)
    return report(number, title, bool(ok), detail, time.perf_counter() - t0)


@pytest.mark.parametrize("number, title, fn", CRITERIA, ids=[f"criterion_{n:02d}" for n, _, _ in CRITERIA])
def test_acceptance(number, title, fn):
    assert run_criterion(number, title, fn)


if __name__ == "__main__":
    for number, title, fn in CRITERIA:
        run_criterion(number, title, fn)
