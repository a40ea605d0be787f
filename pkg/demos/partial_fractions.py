"""Rebuilding an elliptic function from its zeros and poles.

The log-derivative of a meromorphic function of finite order is a sum over
its zeros and poles.  For the Weierstrass function, moved off the lattice so
that the origin is regular, the genus-2 sum truncated at |a| < R converges
to f'/f as R grows, though only conditionally, so the error curve is not
monotone.
"""

import numpy as np

from yosida import build
from yosida.catalog import recentre_map
from yosida.expansion import convergence_report
from yosida.locate import Disc, locate_in_region

g = recentre_map(build("weierstrass"), 1.0 / 3.0)
ps = locate_in_region(g, Disc(0j, 42.0))
rng = np.random.default_rng(0)
pts = 0.8 * np.sqrt(rng.uniform(size=10)) * np.exp(2j * np.pi * rng.uniform(size=10))
rep = convergence_report(g, ps.zeros(), ps.poles(), 2, [10.0, 15.0, 20.0, 25.0, 30.0, 40.0], pts)
print("cutoff R   partial-fraction error   product error")
for R, e_ml, e_pr in zip(rep.R, rep.ml_max, rep.product_max):
    print(f"  {R:6.1f}   {e_ml:20.3e}   {e_pr:13.3e}")
print(f"fitted log-log slope of the partial-fraction error: {rep.ml_slope:.3f}")
