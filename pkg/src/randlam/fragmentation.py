"""Chord-insertion processes on the disk and their dual trees.

Two processes are supported:

* self-similar: each trial throws two uniform points on the circle and keeps
  the chord only if both land in the same fragment;
* homogeneous: each trial picks a fragment uniformly and always splits it.

The state keeps the genealogy of fragments (binary addresses, child "0" is the
part on the side of the separating parent chord, child "1" the part enclosed
by the new chord) and a sorted endpoint index for point location.  Randomness
is supplied by the caller, so a state is a deterministic function of its trial
stream.
"""
from __future__ import annotations

import csv
import io
from bisect import bisect_right, insort
from collections import deque
from dataclasses import dataclass

import numpy as np

from .core_model import (
    ArcSet,
    Chord,
    DegenerateError,
    FiniteLamination,
    StepFunction,
)

SELF_SIMILAR = "self-similar"
HOMOGENEOUS = "homogeneous"


@dataclass(frozen=True)
class Split:
    chord: Chord
    u_local: float
    v_local: float


@dataclass
class FragNode:
    """A fragment of the genealogy.

    ``depth`` counts the ancestor chords separating the fragment from circle
    point 0 at the time it was created.  Chords inserted later in other
    fragments can enclose it, so this is not the height of its points; use
    :meth:`FragState.height_tree` for that.
    """

    address: str
    arcs: ArcSet
    depth: int
    split: Split | None = None

    @property
    def mass(self) -> float:
        return self.arcs.mass

    @property
    def is_leaf(self) -> bool:
        return self.split is None


class FragState:
    """Current lamination, its fragments and the fragment genealogy.

    Leaves carry integer ids ``0 .. n_chords``.  When a leaf splits, its id
    passes to child "0" and the enclosed child "1" gets the next id, so the
    leaf ids double as the fragment labels used by the homogeneous process.
    """

    def __init__(self, mode: str = SELF_SIMILAR):
        if mode not in (SELF_SIMILAR, HOMOGENEOUS):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        root = FragNode("", ArcSet.circle(), 0)
        self.nodes: dict[str, FragNode] = {"": root}
        self.n_trials = 0
        self.chords: list[Chord] = []
        self.chord_address: list[str] = []
        self._leaf_address: list[str] = [""]
        # endpoint index: [e, next endpoint) lies in leaf _owner[e]
        self._ends: list[float] = [0.0]
        self._owner: dict[float, int] = {0.0: 0}
        self._frozen_index: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def n_chords(self) -> int:
        return len(self.chords)

    @property
    def n_leaves(self) -> int:
        return len(self._leaf_address)

    def leaf(self, j: int) -> FragNode:
        return self.nodes[self._leaf_address[j]]

    def leaves(self) -> list[FragNode]:
        return [self.nodes[a] for a in self._leaf_address]

    def lamination(self) -> FiniteLamination:
        return FiniteLamination(self.chords)

    # -- point location -------------------------------------------------

    def leaf_id(self, p: float) -> int:
        """Id of the leaf owning ``[p, p + eps)``."""
        return self._owner[self._ends[bisect_right(self._ends, p) - 1]]

    def leaf_ids(self, p: np.ndarray) -> np.ndarray:
        ends, owner = self._index_arrays()
        return owner[np.searchsorted(ends, p, side="right") - 1]

    def locate(self, p: float) -> FragNode:
        return self.leaf(self.leaf_id(p))

    def _index_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self._frozen_index is None:
            ends = np.array(self._ends)
            owner = np.array([self._owner[e] for e in self._ends], dtype=np.int64)
            self._frozen_index = (ends, owner)
        return self._frozen_index

    def _check_fresh(self, p: float):
        if p in self._owner:
            raise DegenerateError(f"point {p} is an existing chord endpoint")

    # -- splitting --------------------------------------------------------

    def _split_leaf(self, j: int, chord: Chord, u_local: float, v_local: float) -> str:
        node = self.leaf(j)
        outer, inner = node.arcs.split_at(chord.a, chord.b)
        node.split = Split(chord, u_local, v_local)
        # the enclosed child is cut off from 0 by the new chord iff that chord
        # crosses the segment from 0 to a point of the child
        probe = inner.arcs[0][0]
        inner_depth = node.depth + (1 if chord.covers(probe) else 0)
        a0, a1 = node.address + "0", node.address + "1"
        self.nodes[a0] = FragNode(a0, outer, node.depth)
        self.nodes[a1] = FragNode(a1, inner, inner_depth)
        new_id = len(self._leaf_address)
        self._leaf_address[j] = a0
        self._leaf_address.append(a1)
        self.chords.append(chord)
        self.chord_address.append(node.address)
        insort(self._ends, chord.a)
        insort(self._ends, chord.b)
        self._owner[chord.b] = j
        # every arc of the enclosed child starts at an endpoint now owned by it
        for l, _ in inner.arcs:
            self._owner[l] = new_id
        self._frozen_index = None
        return node.address

    def trial_selfsimilar(self, u: float, v: float) -> str | None:
        """One self-similar trial; returns the split address or None if rejected."""
        if self.mode != SELF_SIMILAR:
            raise ValueError("trial_selfsimilar needs a self-similar state")
        if not (0.0 < u < 1.0 and 0.0 < v < 1.0):
            raise ValueError("trial points must lie in (0, 1)")
        self._check_fresh(u)
        self._check_fresh(v)
        chord = Chord(u, v)
        self.n_trials += 1
        j = self.leaf_id(chord.a)
        if self.leaf_id(chord.b) != j:
            return None
        arcs = self.leaf(j).arcs
        return self._split_leaf(j, chord, arcs.locate(chord.a), arcs.locate(chord.b))

    def run_selfsimilar(self, pairs: np.ndarray, window: int = 64) -> int:
        """Feed an ``(m, 2)`` array of trial points; returns chords inserted.

        Equivalent to calling :meth:`trial_selfsimilar` row by row, but
        rejections are screened in vectorised windows.
        """
        if self.mode != SELF_SIMILAR:
            raise ValueError("run_selfsimilar needs a self-similar state")
        pairs = np.asarray(pairs, dtype=float)
        if pairs.ndim != 2 or pairs.shape[1] != 2:
            raise ValueError("pairs must have shape (m, 2)")
        if np.any((pairs <= 0.0) | (pairs >= 1.0)) or np.any(pairs[:, 0] == pairs[:, 1]):
            raise DegenerateError("trial points must be distinct and inside (0, 1)")
        inserted = 0
        i, m = 0, len(pairs)
        while i < m:
            # expected gap between acceptances is about n_trials / n_chords
            w = max(window, 2 * self.n_trials // (self.n_chords + 1))
            block = pairs[i:i + w]
            ends, owner = self._index_arrays()
            pos = np.searchsorted(ends, block, side="right") - 1
            if np.any(ends[pos] == block):
                raise DegenerateError("trial point hits an existing chord endpoint")
            ids = owner[pos]
            hits = np.flatnonzero(ids[:, 0] == ids[:, 1])
            if hits.size == 0:
                self.n_trials += len(block)
                i += len(block)
                continue
            k = int(hits[0])
            self.n_trials += k
            self.trial_selfsimilar(*block[k])
            inserted += 1
            i += k + 1
        return inserted

    def trial_homogeneous(self, j: int, u: float, v: float) -> str:
        """Split leaf ``j`` at local coordinates ``u < v``."""
        if self.mode != HOMOGENEOUS:
            raise ValueError("trial_homogeneous needs a homogeneous state")
        if not 0 <= j < self.n_leaves:
            raise IndexError(f"leaf index {j} out of range 0..{self.n_leaves - 1}")
        if u == v:
            raise DegenerateError("zero-length split")
        if not 0.0 < u < v < 1.0:
            raise ValueError("need 0 < u < v < 1")
        arcs = self.leaf(j).arcs
        chord = Chord(arcs.point_at(u), arcs.point_at(v))
        self._check_fresh(chord.a)
        self._check_fresh(chord.b)
        self.n_trials += 1
        return self._split_leaf(j, chord, u, v)

    # -- heights and distances -------------------------------------------

    def height_crossing(self, s: float) -> int:
        """Number of chords crossed by the segment from 0 to ``s`` (brute force)."""
        return sum(1 for c in self.chords if c.covers(s))

    def height_tree(self, s: float) -> int:
        """Separating chords on the dual-tree path from the root fragment to ``s``.

        Walks the genealogy: inside the chord ``(a, b)`` of node ``v`` the
        height is that of ``v0`` next to the chord (at ``b``), plus one, plus
        the height inside ``v1``.
        """
        memo: dict[str, int] = {}

        def walk(addr: str, p: float) -> int:
            total = 0
            while True:
                split = self.nodes[addr].split
                if split is None:
                    return total
                c = split.chord
                if c.covers(p):
                    if addr not in memo:
                        memo[addr] = walk(addr + "0", c.b)
                    total += memo[addr] + 1
                    addr += "1"
                else:
                    addr += "0"

        return walk("", s)

    def height(self, s: float) -> int:
        h = self.height_tree(s)
        assert h == self.height_crossing(s)
        return h

    def height_function(self) -> StepFunction:
        """C_n as a step function with a breakpoint at every chord endpoint."""
        steps = {}
        for c in self.chords:
            steps[c.a] = 1.0
            steps[c.b] = -1.0
        xs = self._ends[1:]
        values = np.concatenate(([0.0], np.cumsum([steps[x] for x in xs])))
        return StepFunction(xs, values)

    def dual_tree_edges(self) -> list[tuple[int, int]]:
        """One edge per chord, between the leaves just inside and just outside it."""
        return [(self._owner[c.a], self._owner[c.b]) for c in self.chords]

    def dual_tree_distance(self, s: float, t: float) -> int:
        """Graph distance between the leaves owning ``s`` and ``t`` (BFS)."""
        src, dst = self.leaf_id(s), self.leaf_id(t)
        if src == dst:
            return 0
        adj: list[list[int]] = [[] for _ in range(self.n_leaves)]
        for x, y in self.dual_tree_edges():
            adj[x].append(y)
            adj[y].append(x)
        dist = {src: 0}
        queue = deque([src])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    if y == dst:
                        return dist[y]
                    queue.append(y)
        raise RuntimeError("dual tree is disconnected")

    def coupled_family(self) -> dict[str, tuple[float, float]]:
        """Local split coordinates ``address -> (U_v, V_v)`` of every split node."""
        return {a: (n.split.u_local, n.split.v_local)
                for a, n in self.nodes.items() if n.split is not None}

    # -- export -----------------------------------------------------------

    def snapshot_csv(self) -> str:
        """Rows ``(address, a, b, depth)`` per chord; depth is the height just inside it."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["address", "a", "b", "depth"])
        for c, addr in zip(self.chords, self.chord_address):
            w.writerow([addr or "-", repr(c.a), repr(c.b), self.height_tree(c.a)])
        return buf.getvalue()


def dual_tree_distance_formula(f: StepFunction, s: float, t: float) -> float:
    """``f(s) + f(t) - 2 min f`` over the closed interval between s and t."""
    lo, hi = min(s, t), max(s, t)
    i = np.searchsorted(f.breakpoints, lo, side="right")
    j = np.searchsorted(f.breakpoints, hi, side="right")
    return f(s) + f(t) - 2.0 * float(f.values[i:j + 1].min())


def trial_selfsimilar(state: FragState, u: float, v: float) -> str | None:
    return state.trial_selfsimilar(u, v)


def trial_homogeneous(state: FragState, j: int, u: float, v: float) -> str:
    return state.trial_homogeneous(j, u, v)


def height(state: FragState, s: float) -> int:
    return state.height(s)


def height_function(state: FragState) -> StepFunction:
    return state.height_function()


def dual_tree_distance(state: FragState, s: float, t: float) -> int:
    d = state.dual_tree_distance(s, t)
    assert d == dual_tree_distance_formula(state.height_function(), s, t)
    return d


def coupled_family(state: FragState) -> dict[str, tuple[float, float]]:
    if state.mode != SELF_SIMILAR:
        raise ValueError("coupled family is defined for the self-similar process")
    return state.coupled_family()


def replay_csv(pairs: np.ndarray) -> str:
    """Trial stream as CSV rows ``(u, v)``; ``repr`` floats round-trip exactly."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["u", "v"])
    for u, v in np.asarray(pairs, dtype=float):
        w.writerow([repr(float(u)), repr(float(v))])
    return buf.getvalue()


def read_replay_csv(text: str) -> np.ndarray:
    rows = list(csv.reader(io.StringIO(text)))[1:]
    return np.array([[float(u), float(v)] for u, v in rows], dtype=float).reshape(-1, 2)


def point_tracer_heights(j_uniform: np.ndarray, uv: np.ndarray, xi: np.ndarray,
                         checkpoints=None) -> np.ndarray:
    """Homogeneous heights at query points without building the lamination.

    ``j_uniform`` has shape ``(n, r)`` (uniforms choosing the fragment at
    each step), ``uv`` shape ``(n, r, 2)`` sorted local split points and
    ``xi`` shape ``(r,)``.  Column ``k`` gives the same height as running a
    :class:`FragState` on trial ``t`` with leaf ``floor(j_uniform[t, k] * (t + 1))``
    and evaluating :meth:`FragState.height` at ``xi[k]``.

    For every leaf we keep the share of its arc mass lying below the query
    point.  A chord cut at local ``(u, v)`` encloses the query exactly when
    that share lies in ``[u, v)``, whichever leaf the chord lands in.
    Only local coordinates are stored, so this keeps working after
    fragments shrink below double resolution on the circle.

    With ``checkpoints`` (increasing trial counts) the result has one row
    per checkpoint.
    """
    n, r = j_uniform.shape
    stops = [] if checkpoints is None else [int(c) for c in checkpoints]
    if any(c < 0 or c > n for c in stops) or stops != sorted(stops):
        raise ValueError("checkpoints must be increasing and at most n")
    snaps = []
    share = np.zeros((r, n + 1))
    share[:, 0] = xi
    h = np.zeros(r, dtype=np.int64)
    rows = np.arange(r)
    for t in range(n):
        while len(snaps) < len(stops) and stops[len(snaps)] == t:
            snaps.append(h.copy())
        j = np.floor(j_uniform[t] * (t + 1)).astype(np.int64)
        u, v = uv[t, :, 0], uv[t, :, 1]
        d = v - u
        p = share[rows, j]
        inside = (u <= p) & (p < v)
        h += inside
        share[rows, j] = np.where(p < u, p / (1.0 - d),
                                  np.where(p >= v, (p - d) / (1.0 - d), u / (1.0 - d)))
        share[:, t + 1] = np.where(inside, (p - u) / d, np.where(p >= v, 1.0, 0.0))
    if checkpoints is None:
        return h
    while len(snaps) < len(stops):
        snaps.append(h.copy())
    return np.array(snaps)
