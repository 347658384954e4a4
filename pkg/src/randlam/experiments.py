"""Experiment drivers: simulate, converge, dimension, mean-table, render, selftest.

Every random quantity comes from :mod:`randlam.rng` streams keyed by the run
seed and the replicate index, and results are written by the calling thread
in replicate order, so outputs do not depend on the number of workers.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__, analytics, rng
from .core_model import DegenerateError, FiniteLamination, StepFunction, lamination_from_step, lamination_svg
from .fragmentation import (
    HOMOGENEOUS,
    SELF_SIMILAR,
    FragState,
    dual_tree_distance_formula,
    point_tracer_heights,
    replay_csv,
)
from .limit_process import LimitNodeRandomness, LimitSpec, coupled_Z, eval_grid, grid_csv, polyline_svg
from .metrics import (
    GridSample,
    TreePointCloud,
    boxdim_estimate,
    gh_upper_bound,
    rescale_factor,
    sup_diff,
)


@dataclass
class RunConfig:
    mode: str = SELF_SIMILAR
    n_trials: int = 1000
    seed: int = 1
    replicates: int = 1
    grid: int = 1024
    depth: int = 12
    out: Path | None = None
    name: str = "run"
    workers: int = 1
    delta_min: float = 2.0 ** -7
    delta_max: float = 2.0 ** -3
    schedule: tuple[int, ...] = ()

    def __post_init__(self):
        if self.mode not in (SELF_SIMILAR, HOMOGENEOUS):
            raise ValueError(f"unknown mode {self.mode!r}")
        for key in ("n_trials", "replicates", "grid", "workers"):
            if getattr(self, key) <= 0:
                raise ValueError(f"{key} must be positive")
        if self.depth < 0 or self.seed < 0:
            raise ValueError("depth and seed must be non-negative")
        if self.out is not None:
            self.out = Path(self.out)

    def grid_points(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid)


def run_replicates(fn: Callable[[int], object], replicates: int, workers: int = 1) -> list:
    """``[fn(0), ..., fn(replicates - 1)]`` evaluated on a thread pool."""
    if workers == 1:
        return [fn(r) for r in range(replicates)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(replicates)))


def simulate_state(mode: str, n: int, seed: int, replicate: int) -> FragState:
    """Run ``n`` trials of one replicate from its keyed streams."""
    state = FragState(mode)
    if mode == SELF_SIMILAR:
        state.run_selfsimilar(rng.selfsimilar_pairs(seed, replicate, n))
    else:
        choice, uv = rng.homogeneous_stream(seed, replicate, n)
        for t in range(n):
            try:
                state.trial_homogeneous(int(choice[t] * (t + 1)), uv[t, 0], uv[t, 1])
            except DegenerateError as exc:
                raise DegenerateError(
                    f"replicate {replicate}, trial {t}: fragment too small for double "
                    f"precision circle points ({exc}); homogeneous laminations are "
                    "reliable up to about n = 1000") from exc
    return state


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


class Collector:
    """Writes output files and the run manifest."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.files: dict[str, str] = {}
        self.t0 = time.perf_counter()

    def write(self, name: str, text: str):
        self.files[name] = text
        if self.config.out is not None:
            path = self.config.out / name
            try:
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(text)
            except OSError as exc:
                raise OSError(f"cannot write {path}: {exc}") from exc

    def finish(self) -> dict[str, str]:
        lines = [f"{k}={v}" for k, v in asdict(self.config).items()]
        lines.append(f"code_version={__version__}")
        lines.append(f"wall_time_s={time.perf_counter() - self.t0:.3f}")
        for name in sorted(self.files):
            lines.append(f"sha256:{name}={digest(self.files[name])}")
        self.write("manifest.txt", "\n".join(lines) + "\n")
        return self.files


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# -- simulate ----------------------------------------------------------------------------

SUMMARY_HEADER = ("replicate", "n_trials", "n_chords", "chords_over_sqrt_n", "max_height", "xi", "height_at_xi")


def _summary_row(config: RunConfig, r: int):
    state = simulate_state(config.mode, config.n_trials, config.seed, r)
    xi = float(rng.query_points(config.seed, r)[0])
    f = state.height_function()
    row = (r, state.n_trials, state.n_chords, state.n_chords / math.sqrt(state.n_trials),
           int(f.max()), xi, int(f(xi)))
    return row, (state if r == 0 else None)


def cmd_simulate(config: RunConfig, replay: bool = False) -> dict[str, str]:
    out = Collector(config)
    results = run_replicates(lambda r: _summary_row(config, r), config.replicates, config.workers)
    rows = [row for row, _ in results]
    out.write("summary.csv", csv_text(SUMMARY_HEADER, rows))
    state = results[0][1]
    f = state.height_function()
    lam = state.lamination()
    out.write("lamination.csv", lam.to_csv())
    out.write("lamination.svg", lamination_svg(lam))
    out.write("height.csv", f.to_csv())
    g = config.grid_points()
    out.write("height.svg", polyline_svg(g, f(g)))
    out.write("snapshot.csv", state.snapshot_csv())
    if replay and config.mode == SELF_SIMILAR:
        out.write("replay.csv", replay_csv(rng.selfsimilar_pairs(config.seed, 0, config.n_trials)))
    return out.finish()


# -- mean at a uniform point ----------------------------------------------------------

def heights_at_uniform(mode: str, n: int, seed: int, replicates: int, workers: int = 1) -> np.ndarray:
    """C_n(xi) for each replicate, xi uniform and independent of the process.

    The homogeneous process goes through :func:`point_tracer_heights`,
    vectorised over replicates; it reads the same streams as
    :func:`simulate_state`.
    """
    xi = np.array([rng.query_points(seed, r)[0] for r in range(replicates)])
    if mode == SELF_SIMILAR:
        def one(r):
            state = simulate_state(mode, n, seed, r)
            return state.height_function()(xi[r])
        return np.array(run_replicates(one, replicates, workers), dtype=float)
    choice = np.empty((n, replicates))
    uv = np.empty((n, replicates, 2))
    for r in range(replicates):
        choice[:, r], uv[:, r, :] = rng.homogeneous_stream(seed, r, n)
    return point_tracer_heights(choice, uv, xi).astype(float)


def mean_check(mode: str, n: int, seed: int, replicates: int) -> dict:
    h = heights_at_uniform(mode, n, seed, replicates)
    exact = analytics.mean_selfsimilar(n) if mode == SELF_SIMILAR else analytics.mean_homogeneous(n)
    se = h.std(ddof=1) / math.sqrt(replicates)
    return {"mean": float(h.mean()), "se": float(se), "exact": exact,
            "z": float((h.mean() - exact) / se)}


# -- converge --------------------------------------------------------------------------

def dyadic_schedule(n_max: int, start: int = 100) -> tuple[int, ...]:
    out, n = [], start
    while n <= n_max:
        out.append(n)
        n *= 2
    return tuple(out)


def _converge_selfsimilar(config: RunConfig, schedule: Sequence[int], r: int) -> list[tuple]:
    g = config.grid_points()
    pairs = rng.selfsimilar_pairs(config.seed, r, schedule[-1])
    state = FragState(SELF_SIMILAR)
    heights = []
    done = 0
    for n in schedule:
        state.run_selfsimilar(pairs[done:n])
        done = n
        heights.append(state.height_function())
    z = GridSample(g, coupled_Z(state.coupled_family(), config.seed, config.depth, g, index=r))
    rows = []
    for n, f in zip(schedule, heights):
        x = GridSample(g, f(g) * rescale_factor(SELF_SIMILAR, n))
        rows.append((r, n, sup_diff(x, z), gh_upper_bound(x, z)))
    return rows


def _converge_homogeneous(config: RunConfig, schedule: Sequence[int], r: int) -> list[tuple]:
    g = config.grid_points()
    choice, uv = rng.homogeneous_stream(config.seed, r, schedule[-1])
    k = g.size
    heights = point_tracer_heights(np.repeat(choice[:, None], k, axis=1),
                                   np.repeat(uv[:, None, :], k, axis=1), g, checkpoints=schedule)
    rows = [(r, n, float(h.max() * rescale_factor(HOMOGENEOUS, n))) for n, h in zip(schedule, heights)]
    h = eval_grid(LimitSpec(HOMOGENEOUS, config.depth, LimitNodeRandomness(config.seed, r)), g)
    rows.append((r, -1, float(h.max())))
    return rows


def cmd_converge(config: RunConfig) -> dict[str, str]:
    out = Collector(config)
    schedule = tuple(config.schedule) or dyadic_schedule(config.n_trials)
    if config.mode == SELF_SIMILAR:
        per_rep = run_replicates(lambda r: _converge_selfsimilar(config, schedule, r),
                                 config.replicates, config.workers)
        rows = [row for rep in per_rep for row in rep]
        out.write("converge.csv", csv_text(("replicate", "n", "sup_diff", "gh_bound"), rows))
        arr = np.array([row[1:] for row in rows], dtype=float)
        summary = [(n, float(np.median(arr[arr[:, 0] == n, 1])), float(np.median(arr[arr[:, 0] == n, 2])))
                   for n in schedule]
        out.write("converge_summary.csv", csv_text(("n", "median_sup_diff", "median_gh_bound"), summary))
    else:
        per_rep = run_replicates(lambda r: _converge_homogeneous(config, schedule, r),
                                 config.replicates, config.workers)
        rows = [row for rep in per_rep for row in rep]
        out.write("converge.csv", csv_text(("replicate", "n", "sup_rescaled"), rows))
        probs = (0.1, 0.25, 0.5, 0.75, 0.9)
        arr = np.array([row[1:] for row in rows], dtype=float)
        qrows = []
        for n in list(schedule) + [-1]:
            label = n if n > 0 else f"H_depth{config.depth}"
            qrows.append((label, *np.quantile(arr[arr[:, 0] == n, 1], probs)))
        out.write("converge_quantiles.csv", csv_text(("n", *[f"q{p}" for p in probs]), qrows))
    return out.finish()


# -- dimension ---------------------------------------------------------------------------

def dimension_deltas(delta_min: float, delta_max: float) -> list[float]:
    k_lo = int(round(-math.log2(delta_max)))
    k_hi = int(round(-math.log2(delta_min)))
    return [2.0 ** -k for k in range(k_lo, k_hi + 1)]


def cmd_dimension(config: RunConfig) -> dict[str, str]:
    out = Collector(config)
    g = config.grid_points()
    spec = LimitSpec(config.mode, config.depth, LimitNodeRandomness(config.seed))
    values = eval_grid(spec, g)
    deltas = dimension_deltas(config.delta_min, config.delta_max)
    est = boxdim_estimate(TreePointCloud(values), deltas)
    control = boxdim_estimate(TreePointCloud(g), deltas)
    out.write("dimension.csv", csv_text(("delta", "cover", "packing"), est.rows()))
    out.write("dimension_control.csv", csv_text(("delta", "cover", "packing"), control.rows()))
    target = 1.0 / analytics.BETA if config.mode == SELF_SIMILAR else float("nan")
    out.write("dimension_summary.csv", csv_text(
        ("cloud", "slope", "slope_cover", "slope_packing", "target"),
        [("limit", est.slope, est.slope_cover, est.slope_packing, target),
         ("segment", control.slope, control.slope_cover, control.slope_packing, 1.0)]))
    out.write("limit.csv", grid_csv(g, values, depth=config.depth))
    out.write("limit.svg", polyline_svg(g, values / spec.scale))
    return out.finish()


# -- mean table, render ------------------------------------------------------------------

def cmd_mean_table(ns: Sequence[int], out_dir: Path | None = None) -> str:
    text = csv_text(("n", "mu_selfsim", "mu_homog", "c_n_beta_half", "residual"),
                    analytics.mean_table(ns))
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "mean_table.csv").write_text(text)
    return text


def cmd_render(path: Path, out: Path | None = None, stroke_width: float = 0.004) -> str:
    """SVG for a lamination CSV ``(a, b)`` or a sampled-function CSV ``(s, value)``."""
    path = Path(path)
    text = path.read_text()
    header = text.splitlines()[0].split(",")
    if header[:2] == ["a", "b"]:
        svg = lamination_svg(FiniteLamination.from_csv(text), stroke_width=stroke_width)
    elif header[:2] == ["breakpoint", "value"]:
        f = StepFunction.from_csv(text)
        g = np.linspace(0.0, 1.0, 1024)
        svg = polyline_svg(g, f(g))
    else:
        rows = list(csv.reader(io.StringIO(text)))[1:]
        s = [float(r[0]) for r in rows]
        v = [float(r[1]) for r in rows]
        svg = polyline_svg(s, v)
    target = Path(out) if out is not None else path.with_suffix(".svg")
    target.write_text(svg)
    return svg


# -- selftest ----------------------------------------------------------------------------

@dataclass
class SelfTestReport:
    results: list[tuple[str, bool, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.results)

    def add(self, name: str, passed: bool, detail: str = ""):
        self.results.append((name, bool(passed), detail))

    def lines(self) -> list[str]:
        return [f"{'PASS' if p else 'FAIL'} {name} {detail}".rstrip() for name, p, detail in self.results]


def cmd_selftest(consts: analytics.Constants | None = None, seed: int = 12345) -> SelfTestReport:
    """Exact-arithmetic suites, cross-route agreement, oracle equivalences, constants."""
    report = SelfTestReport()
    consts = consts or analytics.constants()
    bad = consts.check()
    report.add("constants", not bad, ",".join(bad))
    report.add("constants_reference_values",
               abs(consts.beta - 0.561552) < 1e-6 and abs(consts.c - 1.178226) < 1e-6
               and abs(consts.kappa - 3.34443) < 1e-5)

    gen = np.random.default_rng(seed)
    from fractions import Fraction
    seqs = [[Fraction(int(gen.integers(-50, 50)), int(gen.integers(1, 20))) for _ in range(30)]
            for _ in range(20)]
    report.add("binomial_involution",
               all(analytics.binomial_transform(analytics.binomial_transform(s)) == s for s in seqs))

    exact = analytics.mean_exact(200)
    report.add("exact_mu_1_2", exact[1] == Fraction(1, 3) and exact[2] == Fraction(8, 15))
    rec = analytics.mean_recurrence(200)
    worst = 0.0
    for n in range(1, 201):
        cf = analytics.mean_closed_form(n)
        worst = max(worst, abs(cf - rec[n]), abs(cf - float(exact[n])), abs(rec[n] - float(exact[n])))
    report.add("mean_routes_agree", worst < 1e-9, f"max_diff={worst:.2e}")

    agree = True
    for r in range(20):
        state = simulate_state(SELF_SIMILAR, int(gen.integers(1, 500)), seed, r)
        f = state.height_function()
        pts = gen.random((20, 2))
        agree &= all(state.height_tree(s) == state.height_crossing(s) == f(s)
                     and state.dual_tree_distance(s, t) == dual_tree_distance_formula(f, s, t)
                     for s, t in pts)
        agree &= lamination_from_step(f).as_set() == set(state.chords)
    report.add("oracle_equivalences", agree)
    return report
