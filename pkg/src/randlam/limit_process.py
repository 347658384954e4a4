"""Depth-n approximations of the limit height processes.

Nodes of the infinite binary tree are addressed by words over {0, 1}; a word
``w`` is stored at heap index ``int("1" + w, 2)`` so the root is 1 and the
children of ``k`` are ``2k`` and ``2k + 1``.  Each node carries a split
``(U, V)`` with density ``2 1{0 < u < v < 1}`` and, for the homogeneous
process, a weight ``W`` uniform on (0, 1).

The process at depth n is obtained by n applications of the operator

    G[u, v; f0, f1](s) = c0 f0(K0(s; u, v)) + c1 f1(K1(s; u, v))

starting from the mean profile, with ``(c0, c1) = ((1-(v-u))^beta, (v-u)^beta)``
in the self-similar case and ``(W^(1/3), (1-W)^(1/3))`` in the homogeneous one.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import analytics
from .rng import stream

SELF_SIMILAR = "self-similar"
HOMOGENEOUS = "homogeneous"
MAX_DEPTH = 24


def K0(s, u, v):
    """Position in the outer child of a point ``s`` of the parent fragment."""
    d = v - u
    s = np.asarray(s, dtype=float)
    out = np.where(s < u, s / (1.0 - d), np.where(s >= v, (s - d) / (1.0 - d), u / (1.0 - d)))
    return out if out.ndim else float(out)


def K1(s, u, v):
    """Position in the enclosed child; 0 outside [u, v)."""
    s = np.asarray(s, dtype=float)
    out = np.where((u <= s) & (s < v), (s - u) / (v - u), 0.0)
    return out if out.ndim else float(out)


def address_to_index(address: str) -> int:
    return int("1" + address, 2)


def index_to_address(k: int) -> str:
    return bin(k)[3:]


class LimitNodeRandomness:
    """Address-keyed node variables drawn from one Philox stream.

    Node ``k`` reads stream positions ``3k .. 3k+2``, so tables for a larger
    depth extend those of a smaller depth without changing them.
    """

    def __init__(self, seed: int, index: int = 0):
        self.seed = int(seed)
        self.index = int(index)
        self._cache: tuple[int, np.ndarray] | None = None

    def table(self, depth: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(U, V, W)`` indexed by heap index, for all nodes above ``depth``."""
        if not 0 <= depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in 0..{MAX_DEPTH}")
        size = 1 << max(depth, 1)
        if self._cache is None or self._cache[0] < size:
            raw = stream(self.seed, "limit", self.index).random(3 * size).reshape(size, 3)
            raw[raw == 0.0] = np.nextafter(0.0, 1.0)
            self._cache = (size, raw)
        raw = self._cache[1][:size]
        u = np.minimum(raw[:, 0], raw[:, 1])
        v = np.maximum(raw[:, 0], raw[:, 1])
        return u, v, raw[:, 2].copy()

    def draw(self, address: str) -> tuple[float, float, float]:
        k = address_to_index(address)
        u, v, w = self.table(len(address) + 1)
        return float(u[k]), float(v[k]), float(w[k])


@dataclass
class LimitSpec:
    mode: str
    depth: int
    randomness: LimitNodeRandomness
    family: Mapping[str, tuple[float, float]] | None = None
    weights: Mapping[str, float] | None = None
    _nodes: "_NodeTable | None" = field(default=None, init=False, repr=False)

    def __post_init__(self):
        if self.mode not in (SELF_SIMILAR, HOMOGENEOUS):
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0 <= self.depth <= MAX_DEPTH:
            raise ValueError(f"depth must be in 0..{MAX_DEPTH}")

    @property
    def exponent(self) -> float:
        return analytics.BETA if self.mode == SELF_SIMILAR else 0.5

    @property
    def scale(self) -> float:
        c = analytics.constants()
        return c.kappa if self.mode == SELF_SIMILAR else c.kappa_h

    def mean(self, s):
        """The common mean profile ``scale * (s(1-s))^exponent`` of every Z_n(s)."""
        return self.scale * _profile(np.asarray(s, dtype=float), self.exponent)

    def nodes(self) -> "_NodeTable":
        if self._nodes is None:
            self._nodes = _NodeTable.build(self)
        return self._nodes


def _profile(s: np.ndarray, exponent: float) -> np.ndarray:
    return np.power(np.clip(s * (1.0 - s), 0.0, None), exponent)


@dataclass
class _NodeTable:
    u: np.ndarray
    v: np.ndarray
    c0: np.ndarray
    c1: np.ndarray
    outer: np.ndarray  # 1 - (v - u)
    psi: np.ndarray
    depth: int
    scale: float
    exponent: float

    @classmethod
    def build(cls, spec: LimitSpec) -> "_NodeTable":
        u, v, w = spec.randomness.table(spec.depth)
        u, v = u.copy(), v.copy()
        size = len(u)
        for mapping, target in ((spec.family, "uv"), (spec.weights, "w")):
            for addr, val in (mapping or {}).items():
                k = address_to_index(addr)
                if k >= size:
                    continue
                if target == "uv":
                    u[k], v[k] = val
                else:
                    w[k] = val
        outer = 1.0 - (v - u)
        if spec.mode == SELF_SIMILAR:
            c0 = np.power(outer, analytics.BETA)
            c1 = np.power(v - u, analytics.BETA)
        else:
            c0 = np.power(w, 1.0 / 3.0)
            c1 = np.power(1.0 - w, 1.0 / 3.0)
        return cls(u, v, c0, c1, outer, u / outer, spec.depth, spec.scale, spec.exponent)

    def base(self, s: np.ndarray) -> np.ndarray:
        return self.scale * _profile(s, self.exponent)


def _eval_scalar(spec: LimitSpec, s: float) -> float:
    t = spec.nodes()
    memo: dict[int, float] = {}

    def value(k: int, rem: int, x: float) -> float:
        if rem == 0:
            return float(t.base(np.array([x]))[0])
        u, v = t.u[k], t.v[k]
        if x < u:
            return t.c0[k] * value(2 * k, rem - 1, x / t.outer[k])
        if x < v:
            if k not in memo:
                memo[k] = value(2 * k, rem - 1, t.psi[k])
            return t.c0[k] * memo[k] + t.c1[k] * value(2 * k + 1, rem - 1, (x - u) / (v - u))
        return t.c0[k] * value(2 * k, rem - 1, (x - (v - u)) / t.outer[k])

    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    return float(value(1, spec.depth, float(s)))


def eval_Z(spec: LimitSpec, s: float) -> float:
    if spec.mode != SELF_SIMILAR:
        raise ValueError("eval_Z needs a self-similar LimitSpec")
    return _eval_scalar(spec, s)


def eval_H(spec: LimitSpec, s: float) -> float:
    if spec.mode != HOMOGENEOUS:
        raise ValueError("eval_H needs a homogeneous LimitSpec")
    return _eval_scalar(spec, s)


def _descend(t: _NodeTable, start: np.ndarray, rem: int, s: np.ndarray, psi_val: np.ndarray) -> np.ndarray:
    """Values of the depth-``rem`` subtrees rooted at ``start`` at points ``s``.

    Performs the same floating point operations, in the same order, as the
    scalar recursion, using ``psi_val[k]`` for the memoised left-child value.
    """
    k, x = start.copy(), s.copy()
    trail = []
    for _ in range(rem):
        u, v, outer = t.u[k], t.v[k], t.outer[k]
        lo, mid = x < u, (x >= u) & (x < v)
        hi = ~(lo | mid)
        nx = np.empty_like(x)
        nx[lo] = x[lo] / outer[lo]
        nx[mid] = (x[mid] - u[mid]) / (v[mid] - u[mid])
        nx[hi] = (x[hi] - (v[hi] - u[hi])) / outer[hi]
        trail.append((k, mid))
        k = np.where(mid, 2 * k + 1, 2 * k)
        x = nx
    val = t.base(x)
    for k, mid in reversed(trail):
        out = t.c0[k] * val
        out[mid] = t.c0[k[mid]] * psi_val[k[mid]] + t.c1[k[mid]] * val[mid]
        val = out
    return val


def _psi_values(t: _NodeTable) -> np.ndarray:
    """Value of each node's outer child at its ``psi`` point, deepest level first."""
    psi_val = np.zeros(len(t.u))
    for level in range(t.depth - 1, -1, -1):
        ks = np.arange(1 << level, 1 << (level + 1))
        rem = t.depth - level - 1
        psi_val[ks] = _descend(t, 2 * ks, rem, t.psi[ks], psi_val)
    return psi_val


def eval_grid(spec: LimitSpec, grid: Sequence[float]) -> np.ndarray:
    """Vectorised evaluation; equal to the pointwise recursion bit for bit."""
    s = np.asarray(grid, dtype=float)
    if s.size == 0:
        return np.zeros(0)
    if np.any((s < 0.0) | (s > 1.0)):
        raise ValueError("grid must lie in [0, 1]")
    t = spec.nodes()
    psi_val = _psi_values(t)
    return _descend(t, np.ones(s.size, dtype=np.int64), spec.depth, s, psi_val)


def coupled_Z(family: Mapping[str, tuple[float, float]], seed: int, depth: int,
              grid: Sequence[float], index: int = 0) -> np.ndarray:
    """Z at ``depth`` driven by a run's split coordinates where available.

    Nodes the run never split read the keyed fallback stream ``(seed, index)``.
    """
    spec = LimitSpec(SELF_SIMILAR, depth, LimitNodeRandomness(seed, index), family=family)
    return eval_grid(spec, grid)


def apply_G(mode: str, u: float, v: float, f0, f1, s, w: float | None = None):
    """One application of the recursion operator to callables ``f0, f1``."""
    if mode == SELF_SIMILAR:
        c0, c1 = (1.0 - (v - u)) ** analytics.BETA, (v - u) ** analytics.BETA
    else:
        c0, c1 = w ** (1.0 / 3.0), (1.0 - w) ** (1.0 / 3.0)
    s = np.asarray(s, dtype=float)
    inside = (u <= s) & (s < v)
    return c0 * f0(K0(s, u, v)) + np.where(inside, c1 * f1(K1(s, u, v)), 0.0)


def grid_csv(grid: Sequence[float], values: Sequence[float], depth: int | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["s", "value"] if depth is None else ["s", f"value_depth{depth}"])
    for s, v in zip(grid, values):
        w.writerow([repr(float(s)), repr(float(v))])
    return buf.getvalue()


def polyline_svg(grid: Sequence[float], values: Sequence[float], width: int = 600,
                 height: int = 300, stroke_width: float = 1.0, y_max: float | None = None) -> str:
    """Fixed-viewBox SVG plot of a sampled function on [0, 1]."""
    values = np.asarray(values, dtype=float)
    top = float(y_max if y_max is not None else max(values.max(initial=0.0), 1e-12))
    pts = " ".join(f"{s * width:.3f},{height - v / top * height:.3f}"
                   for s, v in zip(grid, values))
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n'
            f'<polyline points="{pts}" fill="none" stroke="black" stroke-width="{stroke_width}"/>\n'
            "</svg>\n")
