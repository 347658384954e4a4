"""Counter-based random streams keyed by (seed, purpose, index).

Every stream is a Philox generator whose key comes from
``SeedSequence(seed, spawn_key=(purpose, index))``.  Streams never depend on
the order in which they are created, so replicates can run in any order or
on any number of workers.
"""
from __future__ import annotations

import numpy as np

# pinned purpose codes; changing them changes every output
PURPOSES = {
    "trials": 1,
    "choice": 2,
    "xi": 3,
    "limit": 4,
    "grid": 5,
}


def stream(seed: int, purpose: str, index: int = 0) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(PURPOSES[purpose], int(index)))
    return np.random.Generator(np.random.Philox(ss))


def open_uniforms(gen: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1)."""
    x = gen.random(size)
    # Generator.random can return exactly 0.0
    return np.where(x == 0.0, np.nextafter(0.0, 1.0), x)


def selfsimilar_pairs(seed: int, replicate: int, n: int) -> np.ndarray:
    return open_uniforms(stream(seed, "trials", replicate), (n, 2))


def homogeneous_stream(seed: int, replicate: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Fragment-choice uniforms ``(n,)`` and sorted local split points ``(n, 2)``."""
    choice = stream(seed, "choice", replicate).random(n)
    uv = np.sort(open_uniforms(stream(seed, "trials", replicate), (n, 2)), axis=1)
    return choice, uv


def query_points(seed: int, replicate: int, k: int = 1) -> np.ndarray:
    return open_uniforms(stream(seed, "xi", replicate), k)
