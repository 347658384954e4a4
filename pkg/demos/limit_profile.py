"""
The limit height process
========================

Evaluate the depth-n approximation of the limit on a grid and compare with
its mean profile kappa (s(1-s))^beta.
"""

import numpy as np

from randlam.limit_process import LimitNodeRandomness, LimitSpec, eval_grid, polyline_svg

grid = np.linspace(0, 1, 2049)
spec = LimitSpec("self-similar", 14, LimitNodeRandomness(seed=3))
z = eval_grid(spec, grid)

print("max Z:", z.max(), " mean profile max:", spec.mean(0.5))

# averaging over independent copies recovers the mean profile
s = np.array([0.1, 0.25, 0.5])
copies = np.array([eval_grid(LimitSpec("self-similar", 8, LimitNodeRandomness(3, r)), s)
                   for r in range(2000)])
print("sample mean:", copies.mean(0))
print("profile:    ", spec.mean(s))

open("limit.svg", "w").write(polyline_svg(grid, z))
