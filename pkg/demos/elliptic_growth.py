"""How fast do the poles of an elliptic function accumulate?

The Weierstrass function on the square lattice pi*(Z + iZ) has one double
pole per period cell, so the number of poles in |z| < r should grow like the
area, r^2, while the proximity to 0 and infinity stays logarithmic.
"""

import numpy as np

from yosida import build
from yosida.locate import Disc, locate_in_region
from yosida.nevanlinna import circle_means, order_fit

wp = build("weierstrass")
radii = np.geomspace(5.0, 40.0, 8)

ps = locate_in_region(wp, Disc(0j, 41.0))
print(f"located {len(ps.poles())} pole records and {len(ps.zeros())} zero records, complete={ps.complete}")

counts = [ps.count(r, "pole") for r in radii]
for r, n in zip(radii, counts):
    print(f"  n({r:6.2f}, inf) = {n:5d}   n / r^2 = {n / r**2:.4f}")
fit = order_fit(list(zip(radii, counts)), "ninf", "power")
print(f"power-law exponent of the pole count: {fit.coefficient:.4f} (area growth gives 2)")
print(f"  n / r^2 tends to 2/pi = {2 / np.pi:.4f}: one double pole per cell of area pi^2")

vals, ok = circle_means(wp, radii, ("schmiegung", "m_f", "m_recip"), 1e-9)
print("\nproximity to 0 and infinity, m(r,f) + m(r,1/f):")
for r, s in zip(radii, vals[0]):
    print(f"  r = {r:6.2f}   sum = {s:8.4f}   sum / log r = {s / np.log(r):.4f}")
