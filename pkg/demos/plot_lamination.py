"""
Growing a random lamination
===========================

Throw pairs of uniform points on the circle and keep the chord only when it
crosses nothing already drawn.
"""

import math
from pathlib import Path

from randlam import rng
from randlam.fragmentation import FragState
from randlam.core_model import lamination_svg

# one replicate of 20000 trials, seed 7
state = FragState()
state.run_selfsimilar(rng.selfsimilar_pairs(7, 0, 20000))
print("chords kept:", state.n_chords, "of", state.n_trials, "trials")

# most trials are rejected; the number kept grows like sqrt(pi n)
print("N / sqrt(n) =", state.n_chords / math.sqrt(state.n_trials))

# the height function counts chords crossed on the way from 0 to s
f = state.height_function()
print("max height:", f.max(), " height at 0.5:", f(0.5))

Path("lamination.svg").write_text(lamination_svg(state.lamination()))
