"""Batched adaptive Gauss-Legendre quadrature over many parameter intervals.

Every integrand is a vectorised function ``fun(ids, t)`` evaluated on a flat
batch of (path id, parameter) pairs and returning an array of shape
``(ncomp, len(t))``.  Each refinement level issues one call for all panels
still active on all paths, so thousands of contour edges or circles cost a
handful of numpy calls.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

__all__ = ["gauss_legendre", "PathIntegrals", "integrate_paths", "integrate_interval"]

_ROUND = 64 * np.finfo(float).eps


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass
class PathIntegrals:
    values: np.ndarray  # (ncomp, npaths)
    error: np.ndarray  # (npaths,) accumulated absolute error estimate
    converged: np.ndarray  # (npaths,) bool
    evaluations: int
    panels: np.ndarray  # (npaths,) accepted panel count


def integrate_paths(
    fun: Callable[[np.ndarray, np.ndarray], np.ndarray],
    npaths: int,
    tol: float | np.ndarray,
    *,
    n: int = 8,
    init_panels: int | np.ndarray = 4,
    max_level: int = 40,
    min_width: float = 1e-14,
    max_panels: int = 200_000,
    max_path_panels: Optional[int] = None,
    check: Optional[Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]] = None,
    span: tuple[float, float] = (0.0, 1.0),
) -> PathIntegrals:
    """Integrate ``fun`` over ``span`` on every path.

    A panel is accepted once its n-point rule and the sum of the rules on its
    two halves agree to the panel's share of ``tol``, or once the whole path's
    accepted and pending error estimates add up to at most ``tol``.
    Refinement stops (and the affected paths are marked unconverged) once more
    than ``max_panels`` panels would be active, or, per path, once that path
    alone would exceed ``max_path_panels``.  ``check(ids, a, b, halves)`` may
    return an extra per-panel error (for instance an exactly known real part)
    that must also fall under the share.
    """
    xg, wg = gauss_legendre(n)
    tol = np.broadcast_to(np.asarray(tol, dtype=float), (npaths,))
    lo, hi = span
    length = hi - lo
    init = np.broadcast_to(np.asarray(init_panels, dtype=int), (npaths,))
    ids = np.repeat(np.arange(npaths), init)
    starts = np.concatenate([lo + length * np.arange(k) / k for k in init]) if npaths else np.zeros(0)
    widths = np.concatenate([np.full(k, length / k) for k in init]) if npaths else np.zeros(0)

    def rule(pid, a, w):
        t = (a[:, None] + w[:, None] * xg[None, :]).ravel()
        vals = np.asarray(fun(np.repeat(pid, n), t))
        if vals.ndim == 1:
            vals = vals[None, :]
        vals = vals.reshape(vals.shape[0], a.size, n)
        return np.einsum("cpn,n->cp", vals, wg) * w[None, :]

    whole = rule(ids, starts, widths)
    evals = ids.size * n
    ncomp = whole.shape[0]
    total = np.zeros((ncomp, npaths), dtype=whole.dtype)
    err = np.zeros(npaths)
    npan = np.zeros(npaths, dtype=int)
    ok = np.ones(npaths, dtype=bool)

    for level in range(max_level + 1):
        if ids.size == 0:
            break
        half = 0.5 * widths
        a2 = np.concatenate([starts, starts + half])
        w2 = np.concatenate([half, half])
        id2 = np.concatenate([ids, ids])
        parts = rule(id2, a2, w2)
        evals += id2.size * n
        m = ids.size
        left, right = parts[:, :m], parts[:, m:]
        halves = left + right
        # differences at the rounding level of the panel sums are not error
        floor = _ROUND * np.max(np.abs(left) + np.abs(right), axis=0)
        e = np.maximum(np.max(np.abs(halves - whole), axis=0) - floor, 0.0)
        if check is not None:
            e = np.maximum(e, np.asarray(check(ids, starts, starts + widths, halves)))
        share = tol[ids] * widths / length
        # a path whose accepted plus pending error already fits its tolerance is
        # finished; endpoint singularities never pass the per-panel share alone
        done = (err + np.bincount(ids, weights=e, minlength=npaths)) <= tol
        accept = (e <= share) | done[ids] | (widths <= min_width) | (level == max_level)
        if 2 * int(np.count_nonzero(~accept)) > max_panels:
            accept[:] = True
        elif max_path_panels is not None:
            active = np.bincount(ids[~accept], minlength=npaths)
            over = 2 * active > max_path_panels
            if np.any(over):
                accept |= over[ids]
        bad = accept & (e > share) & ~done[ids]
        if np.any(bad):
            ok[np.unique(ids[bad])] = False
        if np.any(accept):
            for c in range(ncomp):
                np.add.at(total[c], ids[accept], halves[c, accept])
            np.add.at(err, ids[accept], e[accept])
            np.add.at(npan, ids[accept], 1)
        keep = ~accept
        ids = np.concatenate([ids[keep], ids[keep]])
        starts = np.concatenate([starts[keep], starts[keep] + half[keep]])
        widths = np.concatenate([half[keep], half[keep]])
        whole = np.concatenate([left[:, keep], right[:, keep]], axis=1)

    return PathIntegrals(total, err, ok, evals, npan)


def integrate_interval(
    fun: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-10,
    *,
    n: int = 10,
    init_panels: int = 8,
    max_level: int = 40,
) -> tuple[np.ndarray, float, bool]:
    """Scalar-interval convenience wrapper around :func:`integrate_paths`."""
    res = integrate_paths(
        lambda ids, t: fun(t),
        1,
        tol,
        n=n,
        init_panels=init_panels,
        max_level=max_level,
        span=(a, b),
    )
    vals = res.values[:, 0]
    return (vals[0] if vals.size == 1 else vals), float(res.error[0]), bool(res.converged[0])
