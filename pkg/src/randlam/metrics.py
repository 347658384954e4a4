"""Distances between height processes, trees and laminations; box dimension.

The Gromov-Hausdorff distance between the real trees coded by two
excursions f and g is never computed exactly.  ``gh_upper_bound`` returns
the classical bound ``2 ||f - g||`` instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import analytics
from .core_model import FiniteLamination, StepFunction
from .fragmentation import HOMOGENEOUS, FragState


@dataclass(frozen=True)
class GridSample:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.shape != v.shape or g.ndim != 1:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if g.size > 1 and np.any(np.diff(g) <= 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @classmethod
    def of(cls, f, grid) -> "GridSample":
        grid = np.asarray(grid, dtype=float)
        return cls(grid, np.asarray(f(grid), dtype=float))


def _same_grid(f: GridSample, g: GridSample):
    if not np.array_equal(f.grid, g.grid):
        raise ValueError("samples live on different grids")


def sup_diff(f: GridSample, g: GridSample) -> float:
    _same_grid(f, g)
    if f.grid.size == 0:
        return 0.0
    return float(np.max(np.abs(f.values - g.values)))


def step_sup_diff(f: StepFunction, g) -> float:
    """Exact sup |f - g| when g is a StepFunction or a constant."""
    if isinstance(g, StepFunction):
        pts = np.union1d(f.breakpoints, g.breakpoints)
        pts = np.concatenate(([0.0], pts))
        return float(np.max(np.abs(f(pts) - g(pts))))
    return float(np.max(np.abs(f.values - float(g))))


def gh_upper_bound(f: GridSample, g: GridSample) -> float:
    """``2 sup |f - g|``: bounds d_GH of the coded trees on this grid."""
    return 2.0 * sup_diff(f, g)


def rescale_factor(mode: str, n: int) -> float:
    if n < 1:
        raise ValueError("rescaling needs n >= 1")
    if mode == HOMOGENEOUS:
        return 1.0 / (math.gamma(4.0 / 3.0) * analytics.mean_homogeneous(n))
    c = analytics.constants()
    return c.kappa * analytics.beta_fn(c.beta + 1, c.beta + 1) / analytics.mean_selfsimilar(n)


def rescaled_discrete(state: FragState, grid, n: int | None = None) -> GridSample:
    """Height process scaled so its mean at a uniform point matches the limit's."""
    n = state.n_trials if n is None else n
    factor = rescale_factor(state.mode, n)
    grid = np.asarray(grid, dtype=float)
    return GridSample(grid, state.height_function()(grid) * factor)


# -- tree pseudo-metric -------------------------------------------------------------

class TreePointCloud:
    """Grid points with the excursion pseudo-distance ``f(x)+f(y)-2 min f``."""

    def __init__(self, sample: GridSample | np.ndarray):
        f = sample.values if isinstance(sample, GridSample) else np.asarray(sample, dtype=float)
        self.f = np.asarray(f, dtype=float)

    def __len__(self):
        return self.f.size

    def distance(self, i: int, j: int) -> float:
        lo, hi = min(i, j), max(i, j)
        return float(self.f[i] + self.f[j] - 2.0 * self.f[lo:hi + 1].min())

    def distances_from(self, i: int) -> np.ndarray:
        f = self.f
        m = np.empty_like(f)
        m[i:] = np.minimum.accumulate(f[i:])
        m[:i + 1] = np.minimum.accumulate(f[i::-1])[::-1]
        return f[i] + f - 2.0 * m

    def _ball(self, i: int, r: float) -> tuple[int, int]:
        """Index range [lo, hi) of a window containing every point within r of i.

        Outside the window the running minimum has dropped below f(i) - r, so
        all further points are farther than r.
        """
        f = self.f
        floor = f[i] - r
        right = np.flatnonzero(f[i:] < floor)
        hi = i + int(right[0]) if right.size else f.size
        left = np.flatnonzero(f[:i][::-1] < floor)
        lo = i - int(left[0]) if left.size else 0
        return lo, hi

    def greedy_centers(self, r: float) -> int:
        """Sequential greedy cover by closed balls of radius r; returns #centers."""
        n = self.f.size
        covered = np.zeros(n, dtype=bool)
        f = self.f
        count = 0
        i = 0
        while i < n:
            if covered[i]:
                nxt = np.flatnonzero(~covered[i:])
                if nxt.size == 0:
                    break
                i += int(nxt[0])
            count += 1
            lo, hi = self._ball(i, r)
            seg = f[lo:hi]
            m = np.empty_like(seg)
            k = i - lo
            m[k:] = np.minimum.accumulate(seg[k:])
            m[:k + 1] = np.minimum.accumulate(seg[k::-1])[::-1]
            covered[lo:hi] |= (f[i] + seg - 2.0 * m) <= r
            i += 1
        return count


class MatrixPointCloud:
    """Finite pseudo-metric space given by a full distance matrix."""

    def __init__(self, dist):
        d = np.asarray(dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if np.any(d < 0) or not np.allclose(d, d.T) or np.any(np.diag(d) != 0):
            raise ValueError("not a pseudo-metric")
        self.d = d

    def __len__(self):
        return self.d.shape[0]

    def distance(self, i: int, j: int) -> float:
        return float(self.d[i, j])

    def greedy_centers(self, r: float) -> int:
        covered = np.zeros(len(self), dtype=bool)
        count = 0
        for i in range(len(self)):
            if not covered[i]:
                count += 1
                covered |= self.d[i] <= r
        return count


def covering_number(cloud: TreePointCloud | MatrixPointCloud, delta: float) -> tuple[int, int]:
    """``(cover, packing)`` bracketing the covering number N(delta).

    ``cover`` is a greedy cover by balls of radius delta (an upper bound);
    ``packing`` is a greedy maximal set of points more than 2 delta apart,
    which no delta-ball can hit twice (a lower bound).
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if len(cloud) == 0:
        return 0, 0
    return cloud.greedy_centers(delta), cloud.greedy_centers(2.0 * delta)


@dataclass(frozen=True)
class BoxDimension:
    slope: float
    slope_cover: float
    slope_packing: float
    deltas: tuple[float, ...]
    cover: tuple[int, ...]
    packing: tuple[int, ...]

    @property
    def spread(self) -> float:
        return abs(self.slope_cover - self.slope_packing)

    def rows(self) -> list[tuple[float, int, int]]:
        return list(zip(self.deltas, self.cover, self.packing))


def boxdim_estimate(cloud: TreePointCloud | MatrixPointCloud, deltas: Iterable[float], trim: int = 1) -> BoxDimension:
    """Slope of log N against log(1/delta), dropping ``trim`` scales at each end.

    N is the geometric midpoint of the cover/packing bracket; the slopes of
    the two bracket ends are reported as well.
    """
    deltas = sorted(float(d) for d in deltas)[::-1]
    if len(deltas) < 4 or len(set(deltas)) != len(deltas):
        raise ValueError("need at least 4 distinct scales")
    cover, packing = zip(*(covering_number(cloud, d) for d in deltas))
    keep = slice(trim, len(deltas) - trim)
    x = np.log(1.0 / np.array(deltas))[keep]

    def slope(counts):
        y = np.log(np.array(counts, dtype=float))[keep]
        return float(np.polyfit(x, y, 1)[0])

    mid = np.sqrt(np.array(cover, dtype=float) * np.array(packing, dtype=float))
    return BoxDimension(slope(mid), slope(cover), slope(packing), tuple(deltas),
                        tuple(cover), tuple(packing))


def dyadic_deltas(k_min: int, k_max: int) -> list[float]:
    return [2.0 ** -k for k in range(k_min, k_max + 1)]


# -- laminations -----------------------------------------------------------------------

def _chord_points(chords, resolution: float) -> np.ndarray:
    pts = []
    for c in chords:
        a, b = (c.a, c.b) if hasattr(c, "a") else c
        p = np.array([math.cos(2 * math.pi * a), math.sin(2 * math.pi * a)])
        q = np.array([math.cos(2 * math.pi * b), math.sin(2 * math.pi * b)])
        k = max(1, int(math.ceil(np.linalg.norm(q - p) / resolution)))
        t = np.linspace(0.0, 1.0, k + 1)[:, None]
        pts.append(p + t * (q - p))
    return np.vstack(pts)


def hausdorff_laminations(A: FiniteLamination | Sequence, B: FiniteLamination | Sequence,
                          resolution: float = 1e-3) -> float:
    """Hausdorff distance between two chord sets drawn in the unit disk.

    Chords are sampled with spacing at most ``resolution``, so the result is
    within ``resolution`` of the true distance.
    """
    A, B = list(A), list(B)
    if not A or not B:
        raise ValueError("Hausdorff distance needs two non-empty sets")
    pa, pb = _chord_points(A, resolution), _chord_points(B, resolution)
    d_ab = cKDTree(pb).query(pa)[0].max()
    d_ba = cKDTree(pa).query(pb)[0].max()
    return float(max(d_ab, d_ba))
