"""The rescaled family f_h(z) = h^-alpha f(h + h^-beta z) and its diagnostics.

Powers of h use the principal logarithm.  Everything is evaluated through
pole-aware jets, so poles inside a sampling grid need no special care.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .catalog import MeromorphicMap
from .locate import PointSet
from .sphere import JetArray, ScalingParams, chordal_distance_array, jet_scale, spherical_diameter_array

__all__ = [
    "FamilyMember",
    "NormalityReport",
    "SphericalBoundFit",
    "YosidaVerdict",
    "LimitProbeReport",
    "ModulusProfile",
    "NONCONSTANT_DELTA",
    "CAUCHY_TOL",
    "rescaled_jet",
    "predicted_sharp",
    "unit_grid",
    "ray_h_samples",
    "marty_scan",
    "circle_sampler",
    "sphericalbound_fit",
    "disc_sup",
    "yosida_criterion",
    "limit_probe",
    "exclusion_mask",
    "modulus_profile",
]

NONCONSTANT_DELTA = 0.05  # chordal diameter below which a member counts as constant
CAUCHY_TOL = 1e-3  # sup-chordal distance for a numerically Cauchy block
_BOUNDED_RATIO = 10.0  # late sups may exceed early sups by this much and still count as bounded


@dataclass(frozen=True)
class FamilyMember:
    base: str
    params: ScalingParams
    h: complex
    log_h: complex = field(init=False)

    def __post_init__(self) -> None:
        h = complex(self.h)
        if abs(h) < 1:
            raise ValueError("family members need |h| >= 1")
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "log_h", complex(np.log(h)))

    @property
    def value_factor(self) -> complex:
        return complex(np.exp(-self.params.alpha * self.log_h))

    @property
    def argument_factor(self) -> complex:
        return complex(np.exp(-self.params.beta * self.log_h))

    def evaluate(self, f: MeromorphicMap, z) -> JetArray:
        return rescaled_jet(f, self.params, self.h, z)


def rescaled_jet(f: MeromorphicMap, params: ScalingParams, h, z) -> JetArray:
    """Jets of f_h at z; ``h`` and ``z`` broadcast against each other."""
    h, z = np.broadcast_arrays(np.asarray(h, dtype=complex), np.asarray(z, dtype=complex))
    if np.any(np.abs(h) < 1):
        raise ValueError("family members need |h| >= 1")
    logh = np.log(h)
    c = np.exp(-params.alpha * logh)
    k = np.exp(-params.beta * logh)
    zeta = h + k * z
    j = f.evaluate(zeta)
    r, g0, g1, g2 = jet_scale((j.recip, j.g0, j.g1, j.g2), c, k)
    return JetArray(z, r, g0, g1, g2)


def predicted_sharp(f: MeromorphicMap, params: ScalingParams, h, z=0.0) -> np.ndarray:
    """f_h^#(z) from the base function at zeta = h + h^-beta z:

        |h|^{-alpha-beta} f^#(zeta) (1+|f(zeta)|^2) / (1+|h|^{-2 alpha}|f(zeta)|^2).

    At z = 0 this is the closed form of f_h^#(0) in terms of f at h.
    """
    h, z = np.broadcast_arrays(np.asarray(h, dtype=complex), np.asarray(z, dtype=complex))
    zeta = h + np.exp(-params.beta * np.log(h)) * z
    j = f.evaluate(zeta)
    a = np.abs(h) ** (-2.0 * params.alpha)
    g = np.abs(j.g0) ** 2
    # with g0 = 1/f the ratio becomes (g + 1) / (g + a)
    ratio = np.where(j.recip, (g + 1.0) / (g + a), (1.0 + g) / (1.0 + a * g))
    return np.abs(h) ** (-params.alpha - params.beta) * j.sharp() * ratio


# ---------------------------------------------------------------- Marty scan

def unit_grid(R: float = 1.0, density: int = 16) -> np.ndarray:
    """Square grid with ``density`` points per unit, clipped to |z| <= R."""
    if density < 16:
        raise ValueError("grid density must be at least 16 points per unit")
    n = int(math.ceil(R * density))
    x = np.arange(-n, n + 1) / density
    z = (x[:, None] + 1j * x[None, :]).ravel()
    return z[np.abs(z) <= R + 1e-12]


def ray_h_samples(r0: float, r1: float, n_moduli: int = 8, n_angles: int = 8, offset: float = 0.0) -> np.ndarray:
    """h samples on ``n_angles`` rays at geometric moduli."""
    th = offset + 2 * math.pi * np.arange(n_angles) / n_angles
    mod = np.geomspace(r0, r1, n_moduli)
    return (mod[None, :] * np.exp(1j * th[:, None])).ravel()


@dataclass(frozen=True)
class NormalityReport:
    function: str
    params: tuple[float, float]
    grid_radius: float
    density: int
    h: list[complex]
    sups: list[float]
    diameters: list[float]
    m_f: float
    delta: float
    sups_bounded: bool
    nonconstant: bool
    first_category: bool

    def as_dict(self) -> dict:
        return {
            "function": self.function,
            "params": list(self.params),
            "grid_radius": self.grid_radius,
            "density": self.density,
            "h": [[z.real, z.imag] for z in self.h],
            "sups": list(self.sups),
            "diameters": list(self.diameters),
            "m_f": self.m_f,
            "delta": self.delta,
            "sups_bounded": self.sups_bounded,
            "nonconstant": self.nonconstant,
            "first_category": self.first_category,
        }


def _bounded_trend(h: np.ndarray, vals: np.ndarray) -> bool:
    """Sups over the larger half of |h| stay within a fixed factor of the smaller half."""
    order = np.argsort(np.abs(h), kind="stable")
    v = vals[order]
    half = max(1, v.size // 2)
    return bool(np.all(np.isfinite(v)) and np.max(v[half:], initial=0.0) <= _BOUNDED_RATIO * max(np.max(v[:half]), 1e-300))


def marty_scan(
    f: MeromorphicMap,
    params: ScalingParams,
    hs: Sequence[complex],
    R: float = 1.0,
    density: int = 16,
    *,
    grid: Optional[np.ndarray] = None,
    delta: float = NONCONSTANT_DELTA,
) -> NormalityReport:
    """Per-h sup of f_h^# and chordal diameter of f_h over a grid in |z| <= R.

    ``grid`` replaces the default square grid, for instance to keep rescaled
    points on a ray where ``f`` is only known there.
    """
    hs = np.asarray(hs, dtype=complex)
    z = unit_grid(R, density) if grid is None else np.asarray(grid, dtype=complex)
    sups, diams = [], []
    for h in hs:
        j = rescaled_jet(f, params, h, z)
        s = j.sharp()
        sups.append(float(np.max(s)))
        diams.append(spherical_diameter_array(j.g0, j.recip))
    sups_a = np.array(sups)
    bounded = _bounded_trend(hs, sups_a)
    nonconst = bool(min(diams) >= delta) if diams else False
    return NormalityReport(
        f.name,
        (params.alpha, params.beta),
        float(R),
        int(density),
        [complex(h) for h in hs],
        sups,
        diams,
        float(np.max(sups_a)) if sups else math.nan,
        delta,
        bounded,
        nonconst,
        bounded and nonconst,
    )


# ---------------------------------------------------------------- spherical bound

def circle_sampler(density: float = 16.0, minimum: int = 512, maximum: int = 1 << 18) -> Callable[[float], np.ndarray]:
    """Equally spaced points on |z| = r, ``density`` per unit length within
    [minimum, maximum]."""

    def sample(r: float) -> np.ndarray:
        n = min(maximum, max(minimum, int(math.ceil(density * 2 * math.pi * r))))
        th = 2 * math.pi * (np.arange(n) + 0.5) / n
        return r * np.exp(1j * th)

    return sample


def exclusion_mask(z: np.ndarray, points: Optional[PointSet], eps: float, beta: float) -> np.ndarray:
    """True where z lies outside every disc |z - p| < eps max(|p|,1)^-beta."""
    z = np.asarray(z, dtype=complex)
    keep = np.ones(z.shape, dtype=bool)
    if points is None or len(points) == 0:
        return keep
    p = points.positions
    rad = eps * np.maximum(np.abs(p), 1.0) ** (-beta)
    for k in range(0, p.size, 256):
        d = np.abs(z[..., None] - p[k : k + 256])
        keep &= ~np.any(d < rad[k : k + 256], axis=-1)
    return keep


@dataclass(frozen=True)
class SphericalBoundFit:
    radii: list[float]
    sups: list[float]
    exponent: float
    residual: float
    outside_sups: list[float]
    outside_exponent: float
    outside_residual: float
    flagged: bool  # some radius had no samples left after exclusion


def _loglog(r, v):
    r, v = np.asarray(r, float), np.asarray(v, float)
    good = np.isfinite(v) & (v > 0)
    if np.count_nonzero(good) < 2:
        return math.nan, math.nan
    e, c = np.polyfit(np.log(r[good]), np.log(v[good]), 1)
    res = float(np.sqrt(np.mean((np.log(v[good]) - (e * np.log(r[good]) + c)) ** 2)))
    return float(e), res


def sphericalbound_fit(
    f: MeromorphicMap,
    params: ScalingParams,
    radii: Sequence[float],
    points: Optional[PointSet] = None,
    eps: float = 0.25,
    *,
    sampler: Optional[Callable[[float], np.ndarray]] = None,
) -> SphericalBoundFit:
    """Log-log fits of sup f^# over the samples at each radius, with and
    without the discs of radius eps |p|^-beta around the points in ``points``.

    The default sampler is the circle |z| = r; ray data supply their own.
    """
    sampler = sampler or circle_sampler()
    sups, outs = [], []
    flagged = points is None
    for r in radii:
        z = sampler(float(r))
        s = f.evaluate(z).sharp()
        sups.append(float(np.max(s)) if s.size else math.nan)
        keep = exclusion_mask(z, points, eps, params.beta)
        if np.any(keep):
            outs.append(float(np.max(s[keep])))
        else:
            outs.append(math.nan)
            flagged = True
    e, res = _loglog(radii, sups)
    eo, reso = _loglog(radii, outs)
    return SphericalBoundFit([float(r) for r in radii], sups, e, res, outs, eo, reso, flagged)


# ---------------------------------------------------------------- membership

def disc_sup(f: MeromorphicMap, h: complex, eps: float, beta: float, weight_power: float, n: int = 24) -> float:
    """sup over |z-h| < eps|h|^-beta of f^#(z) |z|^weight_power (polar sampling)."""
    h = complex(h)
    rho = eps * abs(h) ** (-beta)
    s = rho * np.sqrt((np.arange(n) + 0.5) / n)
    th = 2 * math.pi * np.arange(2 * n) / (2 * n)
    z = np.concatenate([[h], (h + s[:, None] * np.exp(1j * th[None, :])).ravel()])
    return float(np.max(f.evaluate(z).sharp() * np.abs(z) ** weight_power))


@dataclass(frozen=True)
class YosidaVerdict:
    bound_exponent: float
    bound_holds: bool
    disc_sups: list[float]
    tail_min: float
    liminf_positive: bool
    h_range: tuple[float, float]
    caveat: str = "verdicts cover the sampled h and radii only"

    @property
    def passes(self) -> bool:
        return self.bound_holds and self.liminf_positive


def yosida_criterion(
    f: MeromorphicMap,
    beta: float,
    eps: float,
    hs: Sequence[complex],
    radii: Sequence[float],
    *,
    slack: float = 0.15,
    floor: float = 1e-3,
    sampler: Optional[Callable[[float], np.ndarray]] = None,
) -> YosidaVerdict:
    """Two-clause membership test for the alpha = 0 classes.

    Clause one: the fitted exponent of sup f^# on |z| = r is at most
    beta + slack.  Clause two: sup over the disc around h of f^# |z|^-beta
    stays above ``floor`` on the larger half of the sampled |h|.
    """
    fit = sphericalbound_fit(f, ScalingParams(0.0, beta), radii, sampler=sampler)
    hs = np.asarray(hs, dtype=complex)
    sups = np.array([disc_sup(f, h, eps, beta, -beta) for h in hs])
    order = np.argsort(np.abs(hs), kind="stable")
    tail = sups[order][max(1, hs.size // 2) :] if hs.size > 1 else sups
    tail_min = float(np.min(tail))
    return YosidaVerdict(
        fit.exponent,
        bool(fit.exponent <= beta + slack),
        [float(s) for s in sups],
        tail_min,
        bool(tail_min >= floor),
        (float(np.min(np.abs(hs))), float(np.max(np.abs(hs)))),
    )


# ---------------------------------------------------------------- limit probe

@dataclass(frozen=True)
class LimitProbeReport:
    h: list[complex]
    distances: np.ndarray  # (n, n) sup chordal distances on the grid
    blocks: list[list[int]]
    candidate_sharp_sup: float
    candidate_diameter: float
    inconclusive: bool
    a0_verdict: bool


def _blocks(D: np.ndarray, tol: float) -> list[list[int]]:
    """Greedy grouping into sets whose pairwise distances are all below tol."""
    n = D.shape[0]
    left = list(range(n))
    out = []
    while left:
        i = left.pop(0)
        block = [i]
        for j in list(left):
            if all(D[j, k] < tol for k in block):
                block.append(j)
                left.remove(j)
        out.append(block)
    return out


def limit_probe(
    f: MeromorphicMap,
    params: ScalingParams,
    hs: Sequence[complex],
    grid: Optional[np.ndarray] = None,
    tol: float = CAUCHY_TOL,
    delta: float = NONCONSTANT_DELTA,
) -> LimitProbeReport:
    """Pairwise sup-chordal distances of f_{h_n} on a grid and the Cauchy blocks."""
    hs = np.asarray(hs, dtype=complex)
    if hs.size < 6:
        raise ValueError("limit_probe needs at least 6 members")
    z = unit_grid() if grid is None else np.asarray(grid, dtype=complex)
    jets = [rescaled_jet(f, params, h, z) for h in hs]
    n = hs.size
    D = np.zeros((n, n))
    for i in range(n):
        for k in range(i + 1, n):
            d = chordal_distance_array(jets[i].g0, jets[i].recip, jets[k].g0, jets[k].recip)
            D[i, k] = D[k, i] = float(np.max(d))
    blocks = _blocks(D, tol)
    big = max(blocks, key=len)
    inconclusive = len(big) < 2
    cand = jets[big[-1]]
    sharp_sup = float(np.max(cand.sharp()))
    diam = spherical_diameter_array(cand.g0, cand.recip)
    verdict = (not inconclusive) and diam >= delta and math.isfinite(sharp_sup)
    return LimitProbeReport([complex(h) for h in hs], D, blocks, sharp_sup, diam, inconclusive, verdict)


# ---------------------------------------------------------------- modulus profile

@dataclass(frozen=True)
class ModulusProfile:
    n: int
    minimum: float
    maximum: float
    deciles: list[float]
    spread: float  # maximum / minimum
    bounded: bool


def modulus_profile(
    f: MeromorphicMap,
    params: ScalingParams,
    samples: np.ndarray,
    points: Optional[PointSet],
    eps: float = 0.25,
    spread_limit: float = 1e6,
) -> ModulusProfile:
    """Statistics of |f(z)| |z|^-alpha over samples outside the exclusion discs."""
    z = np.asarray(samples, dtype=complex)
    z = z[exclusion_mask(z, points, eps, params.beta)]
    if z.size == 0:
        raise ValueError("exclusion leaves no samples")
    with np.errstate(over="ignore", divide="ignore"):
        ratio = np.abs(f(z)) * np.abs(z) ** (-params.alpha)
    lo, hi = float(np.min(ratio)), float(np.max(ratio))
    dec = [float(x) for x in np.quantile(ratio, np.linspace(0.1, 0.9, 9))]
    spread = hi / lo if lo > 0 else math.inf
    return ModulusProfile(int(z.size), lo, hi, dec, spread, bool(math.isfinite(spread) and spread <= spread_limit))
