"""
Discrete heights converging to the coupled limit
================================================

The splits of one run drive the first levels of the limit, so the rescaled
height function and the limit can be compared path by path.
"""

import numpy as np

from randlam import rng
from randlam.fragmentation import FragState
from randlam.limit_process import coupled_Z
from randlam.metrics import GridSample, rescale_factor, sup_diff

grid = np.linspace(0, 1, 1024)
seed, rep = 11, 0
pairs = rng.selfsimilar_pairs(seed, rep, 20000)

state = FragState()
snapshots = {}
done = 0
for n in (100, 1000, 10000, 20000):
    state.run_selfsimilar(pairs[done:n])
    done = n
    snapshots[n] = state.height_function()

# Z is truncated at depth 12, which puts a floor under the distance; one
# path is noisy, medians over replicates decrease (randlam converge)
z = GridSample(grid, coupled_Z(state.coupled_family(), seed, 12, grid, index=rep))
for n, f in snapshots.items():
    x = GridSample(grid, f(grid) * rescale_factor("self-similar", n))
    print("n=%6d  sup |X_n - Z| = %.4f" % (n, sup_diff(x, z)))
