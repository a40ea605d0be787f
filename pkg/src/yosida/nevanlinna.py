"""Circle means, counting functions and characteristics of meromorphic maps.

All circle averages share one batched adaptive quadrature in the angle, so a
whole table of radii costs a few vectorised evaluations per refinement level.
Logarithmic singularities where the circle passes close to a zero or pole
are integrable and handled by the panel refinement; ``log|f|`` is clipped at
+-700 so exact hits stay finite.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import optimize

from .catalog import MeromorphicMap
from .locate import PointSet
from .quadrature import integrate_paths
from .sphere import JetArray, ScalingParams

__all__ = [
    "GROWTH_COLUMNS",
    "GrowthRow",
    "OrderFit",
    "Proximity",
    "CircleValue",
    "FprimeMeans",
    "Counting",
    "DiscEnergy",
    "QuadratureWarning",
    "circle_means",
    "proximity_m",
    "schmiegung_sum",
    "counting_N",
    "ahlfors_shimizu_T",
    "m_over_fprime",
    "disc_energy",
    "order_fit",
    "growth_table",
    "geometric_radii",
    "doubly_exponential_radii",
]

GROWTH_COLUMNS = (
    "r", "n0", "ninf", "m_f", "m_recip", "N_f", "N_recip", "T_nev", "T_as", "schmiegung", "m_recip_fprime",
)

_NUDGES = 3


class QuadratureWarning(UserWarning):
    pass


# ---------------------------------------------------------------- integrands

def _log_plus(j: JetArray) -> np.ndarray:
    return np.maximum(j.log_abs(), 0.0)


def _log_plus_recip(j: JetArray) -> np.ndarray:
    return np.maximum(-j.log_abs(), 0.0)


def _abs_log(j: JetArray) -> np.ndarray:
    return np.abs(j.log_abs())


def _log_plus_recip_fprime(j: JetArray) -> np.ndarray:
    return np.maximum(-j.log_abs_derivative(), 0.0)


def _neg_log_sharp(j: JetArray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        l1 = np.maximum(np.log(np.abs(j.g1)), -700.0)
    return np.log1p(np.abs(j.g0) ** 2) - l1


def _sharp_sq(j: JetArray) -> np.ndarray:
    return j.sharp() ** 2


QUANTITIES: dict[str, Callable[[JetArray], np.ndarray]] = {
    "m_f": _log_plus,
    "m_recip": _log_plus_recip,
    "schmiegung": _abs_log,
    "m_recip_fprime": _log_plus_recip_fprime,
    "neg_log_sharp": _neg_log_sharp,
    "sharp_sq": _sharp_sq,
}


# ---------------------------------------------------------------- circle means

def _init_panels(radii: np.ndarray, density: float, cap: int) -> np.ndarray:
    return np.clip(np.ceil(density * radii), 16, cap).astype(int)


def circle_means(
    f: MeromorphicMap,
    radii,
    quantities: Sequence[str],
    tol: float = 1e-8,
    *,
    center: complex = 0j,
    density: float = 4.0,
    max_init_panels: int = 2048,
) -> tuple[np.ndarray, np.ndarray]:
    """(1/2pi) * integral over the circle of each named quantity.

    Returns ``(values (nq, nr), converged (nr,))``.  ``density`` initial
    panels per unit arc length (capped) keep features from slipping between
    the first quadrature nodes.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    fns = [QUANTITIES[q] for q in quantities]
    two_pi = 2 * math.pi

    def fun(ids, t):
        z = center + radii[ids] * np.exp(1j * t)
        j = f.evaluate(z)
        with np.errstate(all="ignore"):
            return np.stack([fn(j) for fn in fns]).astype(float)

    res = integrate_paths(
        fun,
        radii.size,
        tol * two_pi,
        n=10,
        init_panels=_init_panels(radii, density, max_init_panels),
        max_level=40,
        max_path_panels=1 << 16,
        span=(0.0, two_pi),
    )
    vals = res.values / two_pi
    ok = res.converged & np.all(np.isfinite(vals), axis=0)
    return vals, ok


def _nudged_means(f, r, quantities, tol, **kw):
    """Circle means at r, nudging the radius outward if refinement fails."""
    r0 = float(r)
    for k in range(_NUDGES + 1):
        rr = r0 + k * max(1e-3, 1e-6 * r0)
        vals, ok = circle_means(f, [rr], quantities, tol, **kw)
        if ok[0]:
            return rr, vals[:, 0], k > 0
    warnings.warn(f"circle quadrature at r={r0:g} did not converge", QuadratureWarning, stacklevel=3)
    return rr, vals[:, 0], True


@dataclass(frozen=True)
class Proximity:
    r: float
    m_f: float
    m_recip: float
    nudged: bool = False


@dataclass(frozen=True)
class CircleValue:
    r: float
    value: float
    nudged: bool = False


def proximity_m(f: MeromorphicMap, r: float, tol: float = 1e-8, **kw) -> Proximity:
    """m(r, f) and m(r, 1/f) from one sweep of the circle |z| = r."""
    if not r > 1:
        raise ValueError("proximity functions need r > 1")
    rr, v, nudged = _nudged_means(f, r, ("m_f", "m_recip"), tol, **kw)
    return Proximity(rr, float(v[0]), float(v[1]), nudged)


def schmiegung_sum(f: MeromorphicMap, r: float, tol: float = 1e-8, **kw) -> CircleValue:
    """Mean of |log|f|| over the circle, that is m(r, f) + m(r, 1/f)."""
    if not r > 1:
        raise ValueError("proximity functions need r > 1")
    rr, v, nudged = _nudged_means(f, r, ("schmiegung",), tol, **kw)
    return CircleValue(rr, float(v[0]), nudged)


@dataclass(frozen=True)
class FprimeMeans:
    r: float
    m_recip_fprime: float
    neg_log_sharp: float  # -(1/2pi) * integral of log f^#
    m_f: float
    m_recip: float
    yos_residual: float
    nudged: bool = False


def m_over_fprime(f: MeromorphicMap, r: float, tol: float = 1e-8, **kw) -> FprimeMeans:
    """m(r, 1/f') together with the circle mean of -log f^#.

    The two agree up to O(log r) for members of the classes studied here;
    ``yos_residual`` is their difference m(r, 1/f') - mean(-log f^#).  Since
    mean(log f^#) = m(r, f') - m(r, 1/f') - 2 m(r, f) + O(1), the residual
    is m(r, f') - 2 m(r, f) up to a bounded term; m(r, f) and m(r, 1/f) are
    returned alongside for that bookkeeping.
    """
    if not r > 1:
        raise ValueError("proximity functions need r > 1")
    rr, v, nudged = _nudged_means(f, r, ("m_recip_fprime", "neg_log_sharp", "m_f", "m_recip"), tol, **kw)
    mfp, nls, mf, mr = (float(x) for x in v)
    return FprimeMeans(rr, mfp, nls, mf, mr, mfp - nls, nudged)


# ---------------------------------------------------------------- counting

@dataclass(frozen=True)
class Counting:
    value: float
    complete: bool


def counting_N(ps: PointSet, r: float, n_origin: Optional[int] = None, kind: Optional[str] = None) -> Counting:
    """N(r) = sum of multiplicity * log(r/|p|) over 0 < |p| < r, plus n(0) log r.

    ``kind`` selects zeros or poles when ``ps`` holds both.
    """
    pts = [p for p in ps.points if kind is None or p.kind == kind]
    at0 = sum(p.multiplicity for p in pts if abs(p.position) <= 1e-12)
    n0 = at0 if n_origin is None else n_origin
    total = n0 * math.log(r)
    for p in pts:
        a = abs(p.position)
        if 1e-12 < a < r:
            total += p.multiplicity * math.log(r / a)
    return Counting(float(total), bool(ps.complete))


# ---------------------------------------------------------------- area integrals

def _area_weighted(
    f: MeromorphicMap,
    center: complex,
    radius: float,
    weight: Callable[[np.ndarray], np.ndarray],
    rtol: float,
    log_from: Optional[float],
    **kw,
) -> tuple[float, bool]:
    """Integral over |z - center| < radius of (f^#)^2 * weight(|z - center|) dA.

    Past ``log_from`` the radial variable is log s, which keeps the outer
    quadrature cheap when radii span many decades.
    """
    ok_all = True

    def shells(s):
        nonlocal ok_all
        vals, ok = circle_means(f, s, ("sharp_sq",), rtol * 1e-2, center=center, **kw)
        ok_all &= bool(np.all(ok))
        return 2 * math.pi * vals[0]  # integral over the angle

    pieces = []
    lo = radius if log_from is None else min(radius, log_from)
    pieces.append(("s", 0.0, lo))
    if log_from is not None and radius > log_from:
        pieces.append(("log", math.log(log_from), math.log(radius)))

    total = 0.0
    for mode, a, b in pieces:
        if b <= a:
            continue

        def fun(ids, t, mode=mode):
            s = np.exp(t) if mode == "log" else t
            jac = s * s if mode == "log" else s
            return (shells(s) * jac * weight(s))[None, :]

        # pilot on a fixed rule sets the absolute tolerance scale
        x = a + (b - a) * (np.arange(32) + 0.5) / 32
        scale = abs(float(np.mean(fun(None, x)))) * (b - a)
        res = integrate_paths(
            fun, 1, rtol * max(scale, 1e-300), n=10, init_panels=8, max_level=30, span=(a, b)
        )
        ok_all &= bool(res.converged[0])
        total += float(res.values[0, 0])
    return total, ok_all


def ahlfors_shimizu_T(f: MeromorphicMap, r: float, rtol: float = 1e-6, **kw) -> float:
    """T(r) = int_0^r A(t)/t dt with A(t) = (1/pi) int_{|z|<t} (f^#)^2 dA.

    Exchanging the order of integration gives the single area integral
    (1/pi) int_{|z|<r} (f^#)^2 log(r/|z|) dA, which is what is evaluated.
    """
    if not r > 0:
        raise ValueError("r must be positive")
    lr = math.log(r)
    val, ok = _area_weighted(f, 0j, r, lambda s: lr - np.log(s), rtol, 1.0, **kw)
    if not ok:
        warnings.warn(f"Ahlfors-Shimizu quadrature at r={r:g} did not converge", QuadratureWarning, stacklevel=2)
    return val / math.pi


@dataclass(frozen=True)
class DiscEnergy:
    energy: float
    sup: float


def disc_energy(
    f: MeromorphicMap, h: complex, eps: float, params: ScalingParams, rtol: float = 1e-6, grid: int = 48
) -> DiscEnergy:
    """|h|^{2|alpha|} times the integral of (f^#)^2 over the disc |z-h| < eps |h|^-beta,
    and the sup of f^#(z) |z|^{|alpha|-beta} over the same disc (sampled, then
    polished by local maximisation)."""
    h = complex(h)
    if not abs(h) > 1:
        raise ValueError("need |h| > 1")
    a, b = abs(params.alpha), params.beta
    rho = eps * abs(h) ** (-b)
    energy, _ = _area_weighted(f, h, rho, lambda s: np.ones_like(s), rtol, None)
    s = rho * np.sqrt((np.arange(grid) + 0.5) / grid)  # area-uniform radii
    th = 2 * math.pi * np.arange(2 * grid) / (2 * grid)
    z = np.concatenate([[h], (h + s[:, None] * np.exp(1j * th[None, :])).ravel()])
    vals = f.evaluate(z).sharp() * np.abs(z) ** (a - b)
    return DiscEnergy(abs(h) ** (2 * a) * energy, _polished_sup(f, h, rho, a - b, z, vals))


def _polished_sup(f, h, rho, power, z, vals, starts: int = 4) -> float:
    """Largest sample, refined by local maximisation from the best few samples
    (points are projected onto the closed disc)."""

    def project(x):
        w = complex(x[0], x[1]) - h
        return h + (w if abs(w) <= rho else w * (rho / abs(w)))

    def neg(x):
        zz = np.array([project(x)])
        return -float(f.evaluate(zz).sharp()[0] * abs(zz[0]) ** power)

    best = float(np.max(vals))
    for i in np.argsort(vals)[::-1][:starts]:
        res = optimize.minimize(neg, [z[i].real, z[i].imag], method="Nelder-Mead",
                                options={"xatol": 1e-10 * max(rho, 1.0), "fatol": 1e-13, "maxiter": 400})
        best = max(best, -float(res.fun))
    return best


# ---------------------------------------------------------------- growth table

@dataclass(frozen=True)
class GrowthRow:
    r: float
    n0: int
    ninf: int
    m_f: float
    m_recip: float
    N_f: float
    N_recip: float
    T_nev: float
    T_as: float
    schmiegung: float
    m_recip_fprime: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in GROWTH_COLUMNS}


def geometric_radii(r0: float, r1: float, per_decade: int = 12) -> np.ndarray:
    n = max(2, int(round(per_decade * math.log10(r1 / r0))) + 1)
    return np.geomspace(r0, r1, n)


def doubly_exponential_radii(kmax: int, kmin: int = 1) -> np.ndarray:
    return np.exp(2.0 ** np.arange(kmin, kmax + 1))


def growth_table(
    f: MeromorphicMap,
    radii: Sequence[float],
    points: PointSet,
    tol: float = 1e-8,
    *,
    with_T_as: bool = True,
    with_fprime: bool = True,
    **kw,
) -> list[GrowthRow]:
    """One GrowthRow per radius; counts come from ``points``, which must cover
    the largest radius."""
    radii = np.asarray(radii, dtype=float)
    qs = ["m_f", "m_recip", "schmiegung"] + (["m_recip_fprime"] if with_fprime else [])
    vals, ok = circle_means(f, radii, qs, tol, **kw)
    rows = []
    for i, r in enumerate(radii):
        v = vals[:, i]
        if not ok[i]:
            rr, v, _ = _nudged_means(f, r, qs, tol, **kw)
        nf = counting_N(points, r, kind="pole").value
        nr = counting_N(points, r, kind="zero").value
        tas = ahlfors_shimizu_T(f, r, **kw) if with_T_as else math.nan
        rows.append(
            GrowthRow(
                r=float(r),
                n0=points.count(r, "zero"),
                ninf=points.count(r, "pole"),
                m_f=float(v[0]),
                m_recip=float(v[1]),
                N_f=nf,
                N_recip=nr,
                T_nev=float(v[0]) + nf,
                T_as=tas,
                schmiegung=float(v[2]),
                m_recip_fprime=float(v[3]) if with_fprime else math.nan,
            )
        )
    return rows


# ---------------------------------------------------------------- order fits

@dataclass(frozen=True)
class OrderFit:
    model: str  # "power" | "log" | "log-squared"
    coefficient: float  # exponent (power) or leading coefficient
    intercept: float
    residual: float  # rms of X - fit(X), in the units of X
    r_range: tuple[float, float]
    coefficients: tuple[float, ...]

    def as_dict(self) -> dict:
        return asdict(self)


def order_fit(rows, field: str, model: str = "power", r_min: float = 0.0, r_max: float = math.inf) -> OrderFit:
    """Least-squares growth model for ``field`` over the rows with r in range.

    power: log X = e log r + c.  log: X = a log r + b.  log-squared:
    X = a (log r)^2 + b log r + c.  Residuals are always measured on X itself
    so different models can be compared.
    """
    pairs = [(row.r, getattr(row, field)) if not isinstance(row, tuple) else row for row in rows]
    pairs = [(r, x) for r, x in pairs if r_min <= r <= r_max]
    if len(pairs) < 5:
        raise ValueError(f"order_fit needs at least 5 rows, got {len(pairs)}")
    r = np.array([p[0] for p in pairs], dtype=float)
    x = np.array([p[1] for p in pairs], dtype=float)
    L = np.log(r)
    if model == "power":
        if np.any(x <= 0):
            raise ValueError("power model needs positive values")
        e, c = np.polyfit(L, np.log(x), 1)
        pred = np.exp(c) * r**e
        coeffs = (float(e), float(c))
        lead, icpt = float(e), float(c)
    elif model == "log":
        a, b = np.polyfit(L, x, 1)
        pred = a * L + b
        coeffs = (float(a), float(b))
        lead, icpt = float(a), float(b)
    elif model == "log-squared":
        a, b, c = np.polyfit(L, x, 2)
        pred = a * L * L + b * L + c
        coeffs = (float(a), float(b), float(c))
        lead, icpt = float(a), float(c)
    else:
        raise ValueError(f"unknown model {model!r}")
    res = float(np.sqrt(np.mean((x - pred) ** 2)))
    return OrderFit(model, lead, icpt, res, (float(r.min()), float(r.max())), coeffs)
