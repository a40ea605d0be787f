"""A function whose poles are exponentially sparse.

bank_kaufman is built from the Weierstrass function composed with arcsin, so
its poles sit on the imaginary axis at +-i sinh(pi k).  The pole count then
grows like log r rather than any power of r, and the characteristic like
log^2 r.
"""

import math

import numpy as np

from yosida import build
from yosida.locate import Disc, locate_in_region
from yosida.nevanlinna import circle_means, counting_N, order_fit

f = build("bank_kaufman")
radii = np.exp(2.0 ** np.arange(1, 6))
ps = locate_in_region(f, Disc(0j, 1.05 * radii[-1]), polar_inner=1.5)

print("radius              n(r,inf)  closed form")
for r in radii:
    n = ps.count(r, "pole")
    closed = 2 + 4 * math.floor(math.asinh(r) / math.pi)
    print(f"  {r:16.6g}  {n:8d}  {closed:8d}")

fit = order_fit([(r, ps.count(r, "pole")) for r in radii], "ninf", "log")
print(f"n(r,inf) ~ a log r with a = {fit.coefficient:.4f}; 4/pi = {4 / math.pi:.4f}")

vals, _ = circle_means(f, radii, ("m_f",), 1e-8, density=0.0, max_init_panels=64)
T = [float(m) + counting_N(ps, r, kind="pole").value for m, r in zip(vals[0], radii)]
for model in ("log-squared", "power"):
    fit = order_fit(list(zip(radii, T)), "T_nev", model)
    print(f"T(r) against {model:12s}: coefficient {fit.coefficient:.4f}, residual {fit.residual:.4g}")
