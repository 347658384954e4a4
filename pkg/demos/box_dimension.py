"""
Counting balls in the limit tree
================================

Covering numbers of the tree coded by Z, bracketed by a greedy cover and a
greedy packing, and the slope of log N against log(1/delta).
"""

import numpy as np

from randlam.analytics import BETA
from randlam.limit_process import LimitNodeRandomness, LimitSpec, eval_grid
from randlam.metrics import TreePointCloud, boxdim_estimate, dyadic_deltas

grid = np.linspace(0, 1, 2 ** 14)
deltas = dyadic_deltas(3, 7)

for depth in (10, 14, 18):
    z = eval_grid(LimitSpec("self-similar", depth, LimitNodeRandomness(1)), grid)
    est = boxdim_estimate(TreePointCloud(z), deltas)
    print("depth %2d  slope %.3f  (cover %.3f, packing %.3f)"
          % (depth, est.slope, est.slope_cover, est.slope_packing))

# the slope creeps up with depth; the target is 1/beta
print("1/beta =", 1 / BETA)

segment = boxdim_estimate(TreePointCloud(grid), deltas)
print("segment control:", segment.slope)
