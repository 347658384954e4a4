"""
Exact mean height at a uniform point
====================================

Three independent routes to mu(n), and how close it sits to c n^(beta/2).
"""

from randlam import analytics as an

# rational route: exact fractions for the first few n
mu = an.mean_exact(5)
print("mu(1..5) =", [str(x) for x in mu[1:]])

# recurrence and alternating sum agree to rounding
n = 150
print(an.mean_recurrence(n)[n], an.mean_closed_form(n))

# the residual mu(n) - c n^(beta/2) settles near -1
for row in an.mean_table([10, 100, 1000, 10000]):
    print("n=%6d  mu=%9.5f  homogeneous=%9.5f  residual=%+.5f" % (row[0], row[1], row[2], row[4]))

c = an.constants()
print("beta=%.7f  c=%.6f  kappa=%.5f  kappa_h=%.5f" % (c.beta, c.c, c.kappa, c.kappa_h))
