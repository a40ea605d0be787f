"""Partial-fraction and product reconstructions from zero and pole data.

Sums and products run over the points with |p| < R, the symmetric cutoff
that fixes the order of summation for conditionally convergent series.
Zeros and poles at the same location cancel before anything is summed, and
points are processed in sorted order, so results do not depend on how the
input lists are arranged.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .catalog import MeromorphicMap
from .locate import PointSet

__all__ = [
    "ExpansionConfig",
    "ReconstructionReport",
    "ProximityError",
    "MultiplicityError",
    "RadiusError",
    "prime_factor",
    "log_prime_factor",
    "mittag_leffler_logderiv",
    "taylor_logderiv",
    "taylor_coefficients",
    "fit_exponential_factor",
    "hadamard_log",
    "hadamard_product",
    "simple_pole_expansion",
    "residue_at",
    "symmetric_power_sum",
    "convergence_report",
]

Points = Union[PointSet, Sequence[complex], np.ndarray]


class ProximityError(ValueError):
    """Evaluation point too close to a zero or pole."""


class MultiplicityError(ValueError):
    pass


class RadiusError(ValueError):
    pass


@dataclass(frozen=True)
class ExpansionConfig:
    m: int
    R: float
    T: tuple[complex, ...] = ()  # Taylor coefficients, constant term first
    s: int = 0
    S: tuple[complex, ...] = ()  # exponential-factor polynomial, constant term first

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValueError("genus must be >= 0")
        if not self.R > 1:
            raise ValueError("cutoff radius must exceed 1")
        if len(self.S) > self.m + 1:
            raise ValueError("deg S must not exceed m")


# ---------------------------------------------------------------- prime factors

def prime_factor(u, g: int):
    """E(u, g) = (1 - u) exp(u + u^2/2 + ... + u^g/g)."""
    if not 0 <= g <= 20:
        raise ValueError("genus must be in 0..20")
    u = np.asarray(u, dtype=complex)
    return (1.0 - u) * np.exp(_partial_log(u, g))


def _partial_log(u, g):
    acc = np.zeros_like(u)
    pw = np.ones_like(u)
    for k in range(1, g + 1):
        pw = pw * u
        acc = acc + pw / k
    return acc


def log_prime_factor(u, g: int):
    """log E(u, g) with the principal log(1 - u); continuous along rays from 0
    that do not pass through u = 1."""
    u = np.asarray(u, dtype=complex)
    return np.log(1.0 - u) + _partial_log(u, g)


# ---------------------------------------------------------------- point handling

def _net_points(zeros: Points, poles: Points, R: float) -> tuple[np.ndarray, np.ndarray]:
    """(positions, signed multiplicities) inside |p| < R, zero/pole pairs cancelled."""
    net: Counter = Counter()
    for pts, sign in ((zeros, 1), (poles, -1)):
        if isinstance(pts, PointSet):
            items = [(p.position, p.multiplicity) for p in pts.points]
        else:
            items = [(complex(p), 1) for p in np.atleast_1d(np.asarray(pts, dtype=complex))]
        for z, mlt in items:
            if abs(z) < R:
                net[complex(z)] += sign * mlt
    keys = sorted((z for z, k in net.items() if k != 0), key=lambda z: (abs(z), math.atan2(z.imag, z.real)))
    return np.array(keys, dtype=complex), np.array([net[z] for z in keys], dtype=float)


def _check_distance(z: np.ndarray, pts: np.ndarray, resolution: float) -> None:
    if pts.size and z.size:
        d = np.min(np.abs(z[:, None] - pts[None, :]))
        if d < resolution:
            raise ProximityError(f"evaluation point within {d:.3g} of a special point")


def _poly(coeffs: Sequence[complex], z: np.ndarray) -> np.ndarray:
    out = np.zeros_like(z)
    for c in reversed(list(coeffs)):
        out = out * z + c
    return out


def _poly_derivative(coeffs: Sequence[complex]) -> list[complex]:
    return [k * c for k, c in enumerate(coeffs)][1:]


# ---------------------------------------------------------------- sums

def mittag_leffler_logderiv(zeros: Points, poles: Points, cfg: ExpansionConfig, z, resolution: float = 1e-10):
    """T_{m-1}(z) + sum_q z^m/((z-q) q^m) - sum_p z^m/((z-p) p^m) over |.| < R."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    pts, w = _net_points(zeros, poles, cfg.R)
    if np.any(pts == 0) and cfg.m > 0:
        raise ValueError("points at the origin need recentring first")
    _check_distance(z, pts, resolution)
    out = _poly(cfg.T, z)
    zm = z**cfg.m
    for k in range(0, pts.size, 512):
        p = pts[k : k + 512]
        terms = w[k : k + 512] * zm[:, None] / ((z[:, None] - p[None, :]) * p[None, :] ** cfg.m)
        out = out + np.sum(terms, axis=1)
    return out


def simple_pole_expansion(
    poles: Sequence[complex],
    residues: Sequence[complex],
    m: int,
    T: Sequence[complex],
    z,
    R: float = math.inf,
    multiplicities: Optional[Sequence[int]] = None,
):
    """T(z) + sum over |p| < R of rho(p) z^m / ((z - p) p^m)."""
    if multiplicities is not None and any(int(k) != 1 for k in multiplicities):
        raise MultiplicityError("only simple poles are supported")
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    p = np.asarray(poles, dtype=complex)
    rho = np.asarray(residues, dtype=complex)
    keep = np.abs(p) < R
    p, rho = p[keep], rho[keep]
    order = np.lexsort((np.angle(p), np.abs(p)))
    p, rho = p[order], rho[order]
    out = _poly(T, z)
    zm = z**m
    for k in range(0, p.size, 512):
        pk, rk = p[k : k + 512], rho[k : k + 512]
        out = out + np.sum(rk * zm[:, None] / ((z[:, None] - pk) * pk**m), axis=1)
    return out


def symmetric_power_sum(zeros: Points, poles: Points, mu: int, R: float) -> complex:
    """sum_{|p|<R} p^-mu - sum_{|q|<R} q^-mu."""
    pts, w = _net_points(zeros, poles, R)
    pts, w = pts[pts != 0], w[pts != 0]
    return complex(np.sum(-w * pts ** (-float(mu))))


# ---------------------------------------------------------------- Taylor data

def _nearest_special(f: MeromorphicMap, search: float = 10.0) -> float:
    """Distance from 0 to the closest zero or pole of f."""
    try:
        pts = f.points(search)
    except Exception as exc:  # no closed form: caller must supply a radius
        raise RadiusError(f"{f.name}: pass an explicit radius") from exc
    d = [abs(p.position) for p in pts]
    return min(d) if d else search


def taylor_coefficients(values_on_circle: np.ndarray, radius: float, count: int) -> np.ndarray:
    """First ``count`` Taylor coefficients from samples at radius * exp(2 pi i k/N)."""
    c = np.fft.fft(values_on_circle) / values_on_circle.size
    return c[:count] / radius ** np.arange(count)


def taylor_logderiv(f: MeromorphicMap, m: int, radius: Optional[float] = None, nodes: int = 128) -> np.ndarray:
    """Coefficients of the (m-1)-th Taylor polynomial of f'/f at 0."""
    if m == 0:
        return np.zeros(0, dtype=complex)
    if radius is None:
        radius = 0.5 * _nearest_special(f)
    if not radius > 1e-8:
        raise RadiusError("nearest special point too close to the origin")
    z = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    j0 = f.evaluate(np.array([0j]))
    if j0.g0[0] == 0:  # a zero, or a pole in reciprocal form
        raise ValueError("f(0) must be finite and non-zero")
    return taylor_coefficients(f.log_derivative(z), radius, m)


# ---------------------------------------------------------------- products

def fit_exponential_factor(
    f: MeromorphicMap, zeros: Points, poles: Points, m: int, R: float, s: int = 0,
    radius: Optional[float] = None, nodes: int = 128,
) -> tuple[np.ndarray, float]:
    """S (degree <= m) with log f = s log z + S + sum log E terms near 0.

    The difference is analytic on a small disc, so its samples on a circle
    are unwrapped and expanded; the size of the discarded higher coefficients
    is the fit residual.
    """
    if radius is None:
        radius = 0.5 * _nearest_special(f)
    th = 2 * np.pi * np.arange(nodes) / nodes
    z = radius * np.exp(1j * th)
    vals = f(z)
    cfg = ExpansionConfig(m, R, s=s)
    prod = _log_products(zeros, poles, cfg, z)
    d = np.log(vals) - s * np.log(z) - prod
    d = d.real + 1j * np.unwrap(d.imag)
    c = taylor_coefficients(d, radius, nodes // 2)
    resid = float(np.max(np.abs(c[m + 1 :] * radius ** np.arange(m + 1, nodes // 2)), initial=0.0))
    return c[: m + 1], resid


def _log_products(zeros: Points, poles: Points, cfg: ExpansionConfig, z: np.ndarray) -> np.ndarray:
    pts, w = _net_points(zeros, poles, cfg.R)
    if np.any(pts == 0):
        raise ValueError("points at the origin belong in z^s")
    out = np.zeros(z.shape, dtype=complex)
    for k in range(0, pts.size, 512):
        p = pts[k : k + 512]
        out = out + np.sum(w[k : k + 512] * log_prime_factor(z[..., None] / p, cfg.m), axis=-1)
    return out


@dataclass(frozen=True)
class HadamardLog:
    value: np.ndarray  # log of the product, continuous along the ray from 0
    ambiguous: np.ndarray  # bool per point


def hadamard_log(zeros: Points, poles: Points, cfg: ExpansionConfig, z, path_samples: int = 64, resolution: float = 1e-10) -> HadamardLog:
    """s log z + S(z) + sum log E(z/q, m) - sum log E(z/p, m).

    Each principal log E(t z/q, m) is continuous in t on [0, 1] unless the
    ray from 0 to z runs through q, so the sum is already the continuous
    branch; the path samples confirm this and flag jumps larger than pi.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    pts, _ = _net_points(zeros, poles, cfg.R)
    _check_distance(z, pts, resolution)
    t = np.linspace(0.0, 1.0, path_samples + 1)[1:]
    path = z[:, None] * t[None, :]
    logs = _log_products(zeros, poles, cfg, path) + _poly(cfg.S, path)
    jumps = np.abs(np.diff(logs.imag, axis=1))
    ambiguous = np.any(jumps > np.pi, axis=1)
    val = logs[:, -1]
    if cfg.s:
        val = val + cfg.s * np.log(z)
    return HadamardLog(val, ambiguous)


def hadamard_product(zeros: Points, poles: Points, cfg: ExpansionConfig, z, **kw):
    """z^s e^{S(z)} prod E(z/q, m) / prod E(z/p, m) over |.| < R."""
    return np.exp(hadamard_log(zeros, poles, cfg, z, **kw).value)


# ---------------------------------------------------------------- residues

def residue_at(f: MeromorphicMap, p: complex, radius: Optional[float] = None, nodes: int = 128, others: Optional[Sequence[complex]] = None) -> complex:
    """(1/2 pi i) times the integral of f around a small circle about the pole p.

    The radius defaults to half the distance to the nearest other special
    point.  A pole of higher order shows up as negative Fourier modes of
    (z - p) f(z) on the circle and raises :class:`MultiplicityError`.
    """
    p = complex(p)
    if radius is None:
        if others is not None:
            d = [abs(q - p) for q in others if abs(q - p) > 1e-12]
            radius = 0.5 * min(d) if d else 0.5
        else:
            radius = 0.5 * _nearest_other(f, p)
    u = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    g = f(p + u) * u
    c = np.fft.fft(g) / nodes
    neg = np.max(np.abs(c[nodes // 2 + 1 :])) if nodes > 2 else 0.0
    if neg > 1e-7 * max(np.max(np.abs(c)), 1e-300):
        raise MultiplicityError(f"pole at {p} is not simple")
    return complex(c[0])


def _nearest_other(f: MeromorphicMap, p: complex) -> float:
    try:
        pts = f.points(abs(p) + 10.0)
    except Exception as exc:
        raise RadiusError(f"{f.name}: pass an explicit radius or the other points") from exc
    d = [abs(q.position - p) for q in pts if abs(q.position - p) > 1e-9]
    return min(d) if d else 1.0


# ---------------------------------------------------------------- convergence

@dataclass
class ReconstructionReport:
    test_points: list[complex]
    direct_logderiv: list[complex]
    direct_values: list[complex]
    R: list[float] = field(default_factory=list)
    ml_max: list[float] = field(default_factory=list)
    ml_rms: list[float] = field(default_factory=list)
    product_max: list[float] = field(default_factory=list)
    product_rms: list[float] = field(default_factory=list)
    symmetric_sums: list[complex] = field(default_factory=list)
    ml_slope: float = math.nan
    product_slope: float = math.nan

    def rows(self) -> list[tuple[float, float, float]]:
        return list(zip(self.R, self.ml_max, self.ml_rms))

    def as_dict(self) -> dict:
        c = lambda v: [[x.real, x.imag] for x in v]  # noqa: E731
        return {
            "test_points": c(self.test_points),
            "R": self.R,
            "ml_max": self.ml_max,
            "ml_rms": self.ml_rms,
            "product_max": self.product_max,
            "product_rms": self.product_rms,
            "symmetric_sums": c(self.symmetric_sums),
            "ml_slope": self.ml_slope,
            "product_slope": self.product_slope,
        }


def _slope(R, err):
    R, err = np.asarray(R, float), np.asarray(err, float)
    good = err > 0
    if np.count_nonzero(good) < 2:
        return math.nan
    return float(np.polyfit(np.log(R[good]), np.log(err[good]), 1)[0])


def convergence_report(
    f: MeromorphicMap,
    zeros: Points,
    poles: Points,
    m: int,
    R_grid: Sequence[float],
    test_points: Sequence[complex],
    *,
    s: int = 0,
    with_product: bool = True,
    taylor_radius: Optional[float] = None,
) -> ReconstructionReport:
    """Relative errors of both reconstructions against direct evaluation of f
    for each cutoff R, plus the symmetric sums of p^-(m+1) - q^-(m+1)."""
    zt = np.asarray(test_points, dtype=complex)
    direct_ld = f.log_derivative(zt)
    direct = f(zt)
    T = tuple(taylor_logderiv(f, m, radius=taylor_radius))
    rep = ReconstructionReport(list(zt), list(direct_ld), list(direct))
    for R in R_grid:
        cfg = ExpansionConfig(m, float(R), T, s)
        ml = mittag_leffler_logderiv(zeros, poles, cfg, zt)
        e = np.abs(ml - direct_ld) / np.abs(direct_ld)
        rep.R.append(float(R))
        rep.ml_max.append(float(np.max(e)))
        rep.ml_rms.append(float(np.sqrt(np.mean(e * e))))
        if with_product:
            S, _ = fit_exponential_factor(f, zeros, poles, m, float(R), s, radius=taylor_radius)
            cfg_p = ExpansionConfig(m, float(R), T, s, tuple(S))
            pr = hadamard_product(zeros, poles, cfg_p, zt)
            ep = np.abs(pr - direct) / np.abs(direct)
            rep.product_max.append(float(np.max(ep)))
            rep.product_rms.append(float(np.sqrt(np.mean(ep * ep))))
        rep.symmetric_sums.append(symmetric_power_sum(zeros, poles, m + 1, float(R)))
    rep.ml_slope = _slope(rep.R, rep.ml_max)
    if with_product:
        rep.product_slope = _slope(rep.R, rep.product_max)
    return rep
