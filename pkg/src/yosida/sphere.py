"""Riemann-sphere kernel: sphere points, pole-aware jets, spherical derivative.

A jet stores the value and first two derivatives of either ``f`` or ``1/f``
at a point.  The reciprocal form is used whenever ``|f| > 1``, so every stored
magnitude is bounded by one and poles are represented exactly (``1/f = 0``).
The vectorised :class:`JetArray` is what evaluators return; :class:`Jet` is the
scalar view of one entry.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "SpherePoint",
    "Jet",
    "JetArray",
    "ScalingParams",
    "UndefinedJetError",
    "chordal_distance",
    "chordal_distance_array",
    "spherical_derivative",
    "spherical_diameter",
    "spherical_diameter_array",
    "normalize",
    "jet_product",
    "jet_reciprocal",
    "jet_scale",
    "jet_compose",
    "jet_derivative",
]


class UndefinedJetError(ValueError):
    """Raised when neither representation of a jet is finite."""


@dataclass(frozen=True)
class SpherePoint:
    """A point of the Riemann sphere.

    ``value`` is the point itself when ``reciprocal`` is False and the
    reciprocal of the point otherwise, so ``SpherePoint(0, True)`` is infinity.
    """

    value: complex
    reciprocal: bool = False

    @classmethod
    def of(cls, a: complex | float) -> "SpherePoint":
        a = complex(a)
        if cmath.isinf(a):
            return cls(0j, True)
        if abs(a) > 1.0:
            return cls(1.0 / a, True)
        return cls(a, False)

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(0j, True)

    @property
    def is_infinite(self) -> bool:
        return self.reciprocal and self.value == 0

    def invert(self) -> "SpherePoint":
        """The point ``1/a``; exact involution."""
        return SpherePoint(self.value, not self.reciprocal)

    def to_complex(self) -> complex:
        if not self.reciprocal:
            return complex(self.value)
        if self.value == 0:
            return complex(math.inf, 0.0)
        return 1.0 / self.value


@dataclass(frozen=True)
class ScalingParams:
    """Exponents (alpha, beta) of the rescaling ``h^-alpha f(h + h^-beta z)``.

    Powers of ``h`` use the principal logarithm.
    """

    alpha: float
    beta: float
    branch: str = "principal"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")
        if self.beta < -1:
            raise ValueError(f"beta must be >= -1, got {self.beta}")
        if self.branch != "principal":
            raise ValueError("only the principal branch is supported")


class JetArray(NamedTuple):
    """Vectorised jets: ``g0, g1, g2`` are f, f', f'' or (1/f), (1/f)', (1/f)''."""

    z: np.ndarray
    recip: np.ndarray
    g0: np.ndarray
    g1: np.ndarray
    g2: np.ndarray

    def __len__(self) -> int:  # type: ignore[override]
        return int(np.size(self.z))

    def sharp(self) -> np.ndarray:
        """Spherical derivative |f'| / (1 + |f|^2); identical in both forms."""
        return np.abs(self.g1) / (1.0 + np.abs(self.g0) ** 2)

    def log_abs(self, floor: float = -700.0) -> np.ndarray:
        """log|f| clipped from below at ``floor`` and from above at ``-floor``."""
        with np.errstate(divide="ignore"):
            la = np.log(np.abs(self.g0))
        la = np.maximum(la, floor)
        return np.where(self.recip, -la, la)

    def log_derivative(self) -> np.ndarray:
        """f'/f (the reciprocal form flips the sign)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            q = self.g1 / self.g0
        return np.where(self.recip, -q, q)

    def log_abs_derivative(self, floor: float = -700.0) -> np.ndarray:
        """log|f'|, clipped at ``floor``."""
        with np.errstate(divide="ignore"):
            l1 = np.maximum(np.log(np.abs(self.g1)), floor)
            l0 = np.maximum(np.log(np.abs(self.g0)), floor)
        return np.where(self.recip, l1 - 2.0 * l0, l1)

    def values(self) -> np.ndarray:
        """f as complex numbers, ``inf`` at poles."""
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(self.g0 == 0, complex(np.inf, 0), 1.0 / np.where(self.g0 == 0, 1.0, self.g0))
        return np.where(self.recip, inv, self.g0)

    def sphere_points(self) -> tuple[np.ndarray, np.ndarray]:
        return self.g0, self.recip

    def __getitem__(self, i):  # type: ignore[override]
        if isinstance(i, int):
            return Jet(
                complex(self.z[i]),
                bool(self.recip[i]),
                complex(self.g0[i]),
                complex(self.g1[i]),
                complex(self.g2[i]),
            )
        return JetArray(self.z[i], self.recip[i], self.g0[i], self.g1[i], self.g2[i])


@dataclass(frozen=True)
class Jet:
    """Value and two derivatives of f (direct) or of 1/f (reciprocal) at ``z``."""

    z: complex
    reciprocal: bool
    f0: complex
    f1: complex
    f2: complex

    @classmethod
    def direct(cls, z: complex, f0: complex, f1: complex, f2: complex = complex("nan")) -> "Jet":
        return cls(complex(z), False, complex(f0), complex(f1), complex(f2))

    def flip(self) -> "Jet":
        """The jet of ``1/f``: same numbers, opposite flag."""
        return Jet(self.z, not self.reciprocal, self.f0, self.f1, self.f2)

    def switched(self) -> "Jet":
        """Same function, other representation (needs ``f0 != 0``)."""
        r = _invert(np.asarray([self.f0]), np.asarray([self.f1]), np.asarray([self.f2]))
        return Jet(self.z, not self.reciprocal, complex(r[0][0]), complex(r[1][0]), complex(r[2][0]))

    @property
    def value(self) -> SpherePoint:
        return SpherePoint(self.f0, self.reciprocal)

    def as_array(self) -> JetArray:
        return JetArray(
            np.array([self.z]),
            np.array([self.reciprocal]),
            np.array([self.f0]),
            np.array([self.f1]),
            np.array([self.f2]),
        )


# ---------------------------------------------------------------- metric

def chordal_distance(a: SpherePoint | complex, b: SpherePoint | complex) -> float:
    """Chordal distance normalised to [0, 1]; antipodal points are at distance 1."""
    if not isinstance(a, SpherePoint):
        a = SpherePoint.of(a)
    if not isinstance(b, SpherePoint):
        b = SpherePoint.of(b)
    d = chordal_distance_array(
        np.array([a.value]), np.array([a.reciprocal]), np.array([b.value]), np.array([b.reciprocal])
    )
    return float(d[0])


def chordal_distance_array(u, ru, v, rv) -> np.ndarray:
    """Elementwise chordal distance between sphere points in (value, flag) form."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    ru = np.asarray(ru, dtype=bool)
    rv = np.asarray(rv, dtype=bool)
    same = np.abs(u - v)
    mixed_uv = np.abs(u * v - 1.0)
    num = np.where(ru == rv, same, mixed_uv)
    den = np.sqrt(1.0 + np.abs(u) ** 2) * np.sqrt(1.0 + np.abs(v) ** 2)
    return np.minimum(num / den, 1.0)


def spherical_diameter(samples: Sequence[SpherePoint | complex]) -> float:
    """Largest pairwise chordal distance within ``samples``."""
    if len(samples) == 0:
        raise ValueError("spherical_diameter of an empty sample list")
    pts = [s if isinstance(s, SpherePoint) else SpherePoint.of(s) for s in samples]
    vals = np.array([p.value for p in pts])
    flags = np.array([p.reciprocal for p in pts])
    return spherical_diameter_array(vals, flags)


def spherical_diameter_array(g0: np.ndarray, recip: np.ndarray, chunk: int = 512) -> float:
    g0 = np.ravel(np.asarray(g0, dtype=complex))
    recip = np.ravel(np.asarray(recip, dtype=bool))
    if g0.size == 0:
        raise ValueError("spherical_diameter of an empty sample list")
    best = 0.0
    for i in range(0, g0.size, chunk):
        d = chordal_distance_array(
            g0[i : i + chunk, None], recip[i : i + chunk, None], g0[None, :], recip[None, :]
        )
        best = max(best, float(np.max(d)))
    return best


def spherical_derivative(j: Jet | JetArray) -> float | np.ndarray:
    """|f'| / (1 + |f|^2) from either representation of the jet."""
    if isinstance(j, JetArray):
        return j.sharp()
    if not (cmath.isfinite(j.f0) and cmath.isfinite(j.f1)):
        raise UndefinedJetError(f"jet at {j.z} is not finite in its representation")
    return abs(j.f1) / (1.0 + abs(j.f0) ** 2)


# ---------------------------------------------------------------- jet algebra
# All helpers take and return arrays (recip, g0, g1, g2) and never assume
# anything about the magnitudes; `normalize` restores |g0| <= 1.

def _invert(f0, f1, f2):
    with np.errstate(divide="ignore", invalid="ignore"):
        q0 = 1.0 / f0
        q1 = -f1 * q0 * q0
        q2 = (2.0 * f1 * f1 - f0 * f2) * q0 * q0 * q0
    return q0, q1, q2


def _mul(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    return a0 * b0, a1 * b0 + a0 * b1, a2 * b0 + 2.0 * a1 * b1 + a0 * b2


def _div(a, b):
    a0, a1, a2 = a
    b0, b1, b2 = b
    with np.errstate(divide="ignore", invalid="ignore"):
        q0 = a0 / b0
        q1 = (a1 - q0 * b1) / b0
        q2 = (a2 - 2.0 * q1 * b1 - q0 * b2) / b0
    return q0, q1, q2


def normalize(recip, g0, g1, g2):
    """Switch entries with ``|g0| > 1`` to the other representation."""
    recip = np.asarray(recip, dtype=bool)
    g0, g1, g2 = (np.asarray(x, dtype=complex) for x in (g0, g1, g2))
    big = np.abs(g0) > 1.0
    if not np.any(big):
        return recip, g0, g1, g2
    q0, q1, q2 = _invert(g0, g1, g2)
    return (
        np.where(big, ~recip, recip),
        np.where(big, q0, g0),
        np.where(big, q1, g1),
        np.where(big, q2, g2),
    )


def jet_reciprocal(recip, g0, g1, g2):
    return ~np.asarray(recip, dtype=bool), g0, g1, g2


def jet_product(a, b):
    """Jets of f*g from normalised jets of f and g."""
    ra, a0, a1, a2 = a
    rb, b0, b1, b2 = b
    ra = np.asarray(ra, dtype=bool)
    rb = np.asarray(rb, dtype=bool)
    p = _mul((a0, a1, a2), (b0, b1, b2))
    # mixed: f g = a / b  (b holds 1/g) when a is direct, b / a otherwise
    a_direct = ~ra
    num = tuple(np.where(a_direct, x, y) for x, y in zip((a0, a1, a2), (b0, b1, b2)))
    den = tuple(np.where(a_direct, y, x) for x, y in zip((a0, a1, a2), (b0, b1, b2)))
    small = np.abs(num[0]) <= np.abs(den[0])
    q_direct = _div(num, den)
    q_recip = _div(den, num)
    mixed = ra != rb
    out_r = np.where(mixed, ~small, ra)
    outs = []
    for k in range(3):
        qk = np.where(small, q_direct[k], q_recip[k])
        outs.append(np.where(mixed, qk, p[k]))
    return normalize(out_r, *outs)


def jet_scale(jets, c, k):
    """Jets of ``c * f(zeta)`` with ``d zeta / dz = k`` (constants c, k)."""
    r, g0, g1, g2 = jets
    r = np.asarray(r, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        cc = np.where(r, 1.0 / c, c)
    return normalize(r, cc * g0, cc * k * g1, cc * k * k * g2)


def jet_compose(jets, w1, w2):
    """Chain rule: jets of f(w(z)) from jets of f at w and w', w''."""
    r, g0, g1, g2 = jets
    return r, g0, g1 * w1, g2 * w1 * w1 + g1 * w2


def jet_derivative(jets):
    """Order-one jets of f' from order-two jets of f; the second slot is NaN."""
    r, g0, g1, g2 = jets
    r = np.asarray(r, dtype=bool)
    nan = np.full_like(g0, complex("nan"))
    with np.errstate(divide="ignore", invalid="ignore"):
        # reciprocal input: f = 1/g, f' = -g1/g0^2, so 1/f' = -g0^2/g1
        inv_fp = -g0 * g0 / g1
        d_inv_fp = -g0 * (2.0 * g1 * g1 - g0 * g2) / (g1 * g1)
    degenerate = (g1 == 0) & (g0 == 0)
    inv_fp = np.where(degenerate, 0.0, inv_fp)
    d_inv_fp = np.where(degenerate, 0.0, d_inv_fp)
    out_r = r.copy()
    out0 = np.where(r, inv_fp, g1)
    out1 = np.where(r, d_inv_fp, g2)
    return normalize(out_r, out0, out1, nan)


def as_sphere_points(values: Iterable[complex]) -> list[SpherePoint]:
    return [SpherePoint.of(v) for v in values]
