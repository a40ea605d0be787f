"""Following a Painleve I solution along the positive real axis.

Starting from w(0) = w'(0) = 0 the solution of w'' = z + 6 w^2 develops a
string of double poles.  Each one is stepped around on a small circle, and
the first integral W with W' = w provides an independent accuracy check.
At the zeros q of w the spherical derivative grows like |q|^(3/4).
"""

import numpy as np

from yosida.painleve import (
    PInitialData,
    first_integral_drift,
    integrate_ray,
    pole_free_arcs,
    roundtrip_errors,
    zero_sphericality_probe,
)

traj = integrate_ray(PInitialData(0j, 0j, 0j), 1.0, 100.5, 1e-10)
print(f"{len(traj.poles)} poles on [0, 100]; the first few:")
for rec in traj.poles[:5]:
    print(f"  p = {rec.p.real:10.6f}   h = {rec.h.real:+.5f}   fit residual {rec.incoming_residual:.1e}")

gaps = np.diff([rec.p.real for rec in traj.poles])
p = np.array([rec.p.real for rec in traj.poles[1:]])
print(f"pole gap times p^(1/4): {np.min(gaps * p**0.25):.3f} .. {np.max(gaps * p**0.25):.3f}")

drift = max(first_integral_drift(traj, a, b) for a, b in pole_free_arcs(traj))
print(f"worst first-integral drift per unit length: {drift:.2e}")
print(f"worst backward round trip through a pole:  {max(roundtrip_errors(traj)):.2e}")

zs = zero_sphericality_probe(traj, (20.0, 100.0))
ratios = np.array([s.ratio for s in zs])
print(f"{len(zs)} zeros in [20, 100]; w#(q) / |q|^(3/4) lies in [{ratios.min():.4f}, {ratios.max():.4f}]")
