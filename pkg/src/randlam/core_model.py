"""Chords, arc sets, step functions and finite laminations of the unit disk.

Circle points are coordinates in [0, 1); the point ``t`` sits at angle
``2*pi*t``.  Ties between endpoints have probability zero under every model in
this package, so they are rejected instead of being resolved.
"""
from __future__ import annotations

import csv
import io
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class DegenerateError(ValueError):
    """A probability-zero coincidence (shared endpoint, zero-length split)."""


@dataclass(frozen=True, order=True)
class Chord:
    """Straight chord between two distinct circle points, stored with a < b."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if a == b:
            raise DegenerateError(f"chord endpoints coincide at {a}")
        if a > b:
            a, b = b, a
        if not (0.0 < a and b < 1.0):
            raise DegenerateError(f"chord ({a}, {b}) touches circle point 0")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def covers(self, s: float) -> bool:
        """True if the segment from 0 to ``s`` crosses this chord.

        Uses the right-continuous convention: ``s == a`` counts, ``s == b`` does not.
        """
        return self.a <= s < self.b


def chords_cross(c1: Chord, c2: Chord) -> bool:
    inside_a = c1.a < c2.a < c1.b
    inside_b = c1.a < c2.b < c1.b
    return inside_a != inside_b


@dataclass(frozen=True)
class ArcSet:
    """Disjoint half-open arcs [l, r) of the circle, sorted by left endpoint.

    The measure-preserving local coordinate runs from the left end of the first
    arc.  Fragments built by :func:`arcset_split` always start at their
    separating parent chord (or at 0 for the whole circle), so arcs never need
    to wrap across 1.
    """

    arcs: tuple[tuple[float, float], ...]
    _lefts: tuple[float, ...] = field(init=False, repr=False, compare=False)
    _cum: tuple[float, ...] = field(init=False, repr=False, compare=False)
    mass: float = field(init=False, compare=False)

    def __post_init__(self):
        arcs = tuple((float(l), float(r)) for l, r in self.arcs)
        if not arcs:
            raise ValueError("ArcSet needs at least one arc")
        prev = -math.inf
        cum = [0.0]
        for l, r in arcs:
            if not (0.0 <= l < r <= 1.0):
                raise ValueError(f"bad arc [{l}, {r})")
            if l < prev:
                raise ValueError("arcs must be sorted and disjoint")
            prev = r
            cum.append(cum[-1] + (r - l))
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "_lefts", tuple(l for l, _ in arcs))
        object.__setattr__(self, "_cum", tuple(cum))
        object.__setattr__(self, "mass", cum[-1])

    @classmethod
    def circle(cls) -> "ArcSet":
        return cls(((0.0, 1.0),))

    @property
    def origin(self) -> float:
        return self.arcs[0][0]

    def __contains__(self, p: float) -> bool:
        return self.locate(p) is not None

    def locate(self, p: float) -> float | None:
        """Local coordinate in [0, 1) of circle point ``p``, or None if absent."""
        i = bisect_right(self._lefts, p) - 1
        if i < 0:
            return None
        l, r = self.arcs[i]
        if p >= r:
            return None
        return (self._cum[i] + (p - l)) / self.mass

    def point_at(self, t: float) -> float:
        """Inverse of :meth:`locate`: circle point with local coordinate ``t``."""
        if not 0.0 <= t < 1.0:
            raise ValueError(f"local coordinate {t} outside [0, 1)")
        x = t * self.mass
        i = bisect_right(self._cum, x) - 1
        i = min(i, len(self.arcs) - 1)
        l, r = self.arcs[i]
        p = l + (x - self._cum[i])
        # rounding can push p onto the right edge of its arc
        return p if p < r else math.nextafter(r, -math.inf)

    def split_at(self, x: float, y: float) -> tuple["ArcSet", "ArcSet"]:
        """Cut by the chord (x, y): returns (outside part, part inside [x, y))."""
        outer, inner = [], []
        for l, r in self.arcs:
            if r <= x or l >= y:
                outer.append((l, r))
                continue
            if l < x:
                outer.append((l, x))
            inner.append((max(l, x), min(r, y)))
            if r > y:
                outer.append((y, r))
        if not outer or not inner:
            raise DegenerateError(f"chord ({x}, {y}) does not split the fragment")
        return ArcSet(tuple(outer)), ArcSet(tuple(inner))


def arcset_locate(s: ArcSet, p: float) -> float | None:
    return s.locate(p)


def arcset_split(s: ArcSet, u_local: float, v_local: float) -> tuple[Chord, ArcSet, ArcSet]:
    """Insert the chord with local endpoints ``u_local < v_local`` into ``s``.

    The first returned child holds local coordinate 0 (the side of the parent
    chord); the second is the part enclosed by the new chord.
    """
    if u_local == v_local:
        raise DegenerateError("zero-length split")
    if u_local > v_local:
        raise ValueError("expected u_local < v_local")
    x, y = s.point_at(u_local), s.point_at(v_local)
    chord = Chord(x, y)
    outer, inner = s.split_at(chord.a, chord.b)
    return chord, outer, inner


class StepFunction:
    """Right-continuous piecewise constant function on [0, 1].

    ``values[0]`` holds on [0, x_1), ``values[i]`` on [x_i, x_{i+1}); the
    value at 1 is the left limit ``values[-1]``.  Adjacent equal values are
    kept as given.
    """

    def __init__(self, breakpoints: Sequence[float], values: Sequence[float]):
        x = np.asarray(breakpoints, dtype=float)
        v = np.asarray(values, dtype=float)
        if v.shape != (x.size + 1,):
            raise ValueError("need exactly one more value than breakpoints")
        if x.size and (x[0] <= 0.0 or x[-1] >= 1.0 or np.any(np.diff(x) <= 0)):
            raise ValueError("breakpoints must be strictly increasing in (0, 1)")
        self.breakpoints = x
        self.values = v
        x.setflags(write=False)
        v.setflags(write=False)

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls([], [0.0])

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if np.any((s < 0.0) | (s > 1.0)):
            raise ValueError("evaluation point outside [0, 1]")
        idx = np.searchsorted(self.breakpoints, s, side="right")
        out = self.values[idx]
        return out if out.ndim else float(out)

    def left_limit(self, s):
        idx = np.searchsorted(self.breakpoints, np.asarray(s, dtype=float), side="left")
        out = self.values[idx]
        return out if out.ndim else float(out)

    def max(self) -> float:
        return float(self.values.max())

    def __eq__(self, other):
        if not isinstance(other, StepFunction):
            return NotImplemented
        return (np.array_equal(self.breakpoints, other.breakpoints)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"StepFunction({len(self.breakpoints)} breakpoints, max={self.max():g})"

    def to_csv(self) -> str:
        """Rows ``(breakpoint, value)``; the first row is the piece starting at 0."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["breakpoint", "value"])
        w.writerow([_fmt(0.0), _fmt(self.values[0])])
        for x, v in zip(self.breakpoints, self.values[1:]):
            w.writerow([_fmt(x), _fmt(v)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "StepFunction":
        rows = list(csv.reader(io.StringIO(text)))[1:]
        xs = [float(r[0]) for r in rows]
        vs = [float(r[1]) for r in rows]
        return cls(xs[1:], vs)


def step_eval(f: StepFunction, s: float) -> float:
    return f(s)


class FiniteLamination:
    """Finite set of pairwise non-crossing chords with distinct endpoints."""

    def __init__(self, chords: Iterable[Chord] = ()):
        chords = tuple(sorted(chords))
        ends = sorted((p, i) for i, c in enumerate(chords) for p in (c.a, c.b))
        for (p, _), (q, _) in zip(ends, ends[1:]):
            if p == q:
                raise DegenerateError(f"shared chord endpoint {p}")
        # non-crossing iff the endpoints nest like parentheses
        stack = []
        for _, i in ends:
            if stack and stack[-1] == i:
                stack.pop()
            elif i in stack:
                raise ValueError(f"chord {chords[i]} crosses another chord")
            else:
                stack.append(i)
        self.chords = chords

    def __len__(self):
        return len(self.chords)

    def __iter__(self):
        return iter(self.chords)

    def __eq__(self, other):
        if not isinstance(other, FiniteLamination):
            return NotImplemented
        return self.chords == other.chords

    def __repr__(self):
        return f"FiniteLamination({len(self.chords)} chords)"

    def as_set(self) -> set[Chord]:
        return set(self.chords)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["a", "b"])
        for c in self.chords:
            w.writerow([_fmt(c.a), _fmt(c.b)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FiniteLamination":
        rows = list(csv.reader(io.StringIO(text)))[1:]
        return cls(Chord(float(a), float(b)) for a, b in rows)

    def to_svg(self, size: int = 400, stroke_width: float = 0.004) -> str:
        return lamination_svg(self, size=size, stroke_width=stroke_width)


def lamination_from_step(f: StepFunction) -> FiniteLamination:
    """Chords encoded by a step function.

    ``(x_i, x_j)`` is a chord when some level ``w`` has ``f > w`` on the open
    interval and ``max(f(x_i-), f(x_j)) <= w``.
    """
    x, v = f.breakpoints, f.values
    chords = []
    for i in range(len(x)):
        before = v[i]
        run_min = math.inf
        for j in range(i + 1, len(x)):
            run_min = min(run_min, v[j])
            if run_min <= before:
                break
            if v[j + 1] < run_min:
                chords.append(Chord(x[i], x[j]))
    return FiniteLamination(chords)


def circle_xy(t: float, size: int) -> tuple[float, float]:
    r = 0.45 * size
    ang = 2.0 * math.pi * t
    return 0.5 * size + r * math.cos(ang), 0.5 * size - r * math.sin(ang)


def lamination_svg(lam: FiniteLamination, size: int = 400, stroke_width: float = 0.004) -> str:
    sw = _fmt(stroke_width * size)
    c = _fmt(0.5 * size)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<circle cx="{c}" cy="{c}" r="{_fmt(0.45 * size)}" fill="none" '
        f'stroke="black" stroke-width="{sw}"/>',
    ]
    for ch in lam:
        x1, y1 = circle_xy(ch.a, size)
        x2, y2 = circle_xy(ch.b, size)
        lines.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" '
                     f'y2="{_fmt(y2)}" stroke="black" stroke-width="{sw}"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    return repr(float(x))
