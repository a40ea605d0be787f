"""Weierstrass elliptic functions on a period lattice.

Evaluation reduces the argument into the fundamental cell and sums the
rapidly convergent row series

    P(z) = (pi/w1)^2 [ sum_n csc^2(pi(z/w1 + n tau)) - 1/3 - sum_{n!=0} csc^2(pi n tau) ],

obtained by summing the lattice series along rows with
``sum_m (x+m)^-2 = pi^2 csc^2(pi x)``.  Rows decay like exp(-2 pi |n| Im tau)
and the basis is Gauss-reduced so that Im tau >= sqrt(3)/2.  The invariants
come from the analogous row sums of ``(x+m)^-4`` and ``(x+m)^-6``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = ["Lattice", "DegenerateLatticeError", "lemniscatic_lattice"]

_ROW_DECAY_TARGET = 40.0  # rows kept until exp(-this) is negligible
_LAURENT_RADIUS = 1e-3
_CHUNK = 65536  # points per row-sum block, bounds memory


class DegenerateLatticeError(ValueError):
    pass


def _csc2(x):
    s = np.sin(x)
    return 1.0 / (s * s)


@dataclass(frozen=True)
class Lattice:
    """Period lattice generated by ``omega1`` and ``omega2`` (full periods)."""

    omega1: complex
    omega2: complex
    _basis: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        w1, w2 = complex(self.omega1), complex(self.omega2)
        if w1 == 0 or w2 == 0 or abs((w2 / w1).imag) < 1e-12:
            raise DegenerateLatticeError(f"periods {w1}, {w2} do not span a lattice")
        if (w2 / w1).imag < 0:
            raise DegenerateLatticeError("require Im(omega2/omega1) > 0")
        object.__setattr__(self, "omega1", w1)
        object.__setattr__(self, "omega2", w2)
        object.__setattr__(self, "_basis", _gauss_reduce(w1, w2))

    # -- reduced basis ---------------------------------------------------
    @property
    def w1(self) -> complex:
        return self._basis[0]

    @property
    def w2(self) -> complex:
        return self._basis[1]

    @property
    def tau(self) -> complex:
        return self.w2 / self.w1

    @cached_property
    def _rows(self) -> np.ndarray:
        n = int(math.ceil(_ROW_DECAY_TARGET / (2 * math.pi * self.tau.imag))) + 1
        return np.arange(-n, n + 1)

    @cached_property
    def _row_constant(self) -> complex:
        nz = self._rows[self._rows != 0]
        return 1.0 / 3.0 + complex(np.sum(_csc2(np.pi * nz * self.tau)))

    @cached_property
    def g2(self) -> complex:
        """60 * sum' w^-4 via row sums."""
        tau = self.tau
        nz = self._rows[self._rows != 0]
        c2 = _csc2(np.pi * nz * tau)
        rows = np.sum(np.pi**4 * (c2 * c2 - 2.0 / 3.0 * c2))
        g4 = (2 * math.pi**4 / 90 + rows) / self.w1**4
        return complex(60 * g4)

    @cached_property
    def g3(self) -> complex:
        """140 * sum' w^-6 via row sums."""
        tau = self.tau
        nz = self._rows[self._rows != 0]
        c2 = _csc2(np.pi * nz * tau)
        rows = np.sum(np.pi**6 * (c2**3 - c2**2 + 2.0 / 15.0 * c2))
        g6 = (2 * math.pi**6 / 945 + rows) / self.w1**6
        return complex(140 * g6)

    # -- geometry ----------------------------------------------------------
    def coordinates(self, z):
        """Real coordinates (x, y) with z = x*w1 + y*w2 in the reduced basis."""
        z = np.asarray(z, dtype=complex)
        u = z / self.w1
        y = u.imag / self.tau.imag
        x = u.real - y * self.tau.real
        return x, y

    def reduce(self, z):
        """Representative of z modulo the lattice, plus the removed lattice point."""
        z = np.asarray(z, dtype=complex)
        x, y = self.coordinates(z)
        m, n = np.round(x), np.round(y)
        shift = m * self.w1 + n * self.w2
        return z - shift, shift

    def points(self, radius: float, center: complex = 0.0) -> np.ndarray:
        """All lattice points (shifted by ``center``) with modulus < radius."""
        w1, w2 = self.w1, self.w2
        area = abs((np.conj(w1) * w2).imag)
        hmin = area / max(abs(w1), abs(w2))
        k = int(math.ceil(radius / hmin)) + 2
        m, n = np.meshgrid(np.arange(-k, k + 1), np.arange(-k, k + 1), indexing="ij")
        pts = (m * w1 + n * w2).ravel() + center
        pts = pts[np.abs(pts) < radius]
        return pts

    def half_periods(self) -> tuple[complex, complex, complex]:
        return self.w1 / 2, self.w2 / 2, (self.w1 + self.w2) / 2

    # -- evaluation ----------------------------------------------------------
    def wp_values(self, z):
        """(P, P') at z (z should already be reduced for accuracy)."""
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        p = np.empty(flat.shape, dtype=complex)
        dp = np.empty(flat.shape, dtype=complex)
        k = np.pi / self.w1
        shift = self._rows * self.tau
        for i in range(0, flat.size, _CHUNK):
            v = np.pi * (flat[i : i + _CHUNK, None] / self.w1 + shift)
            s = np.sin(v)
            inv_s2 = 1.0 / (s * s)
            p[i : i + _CHUNK] = k * k * (np.sum(inv_s2, axis=-1) - self._row_constant)
            dp[i : i + _CHUNK] = k**3 * np.sum(-2.0 * np.cos(v) * inv_s2 / s, axis=-1)
        return p.reshape(z.shape), dp.reshape(z.shape)

    def wp_jets(self, z):
        """Normalised (recip, g0, g1, g2) jets of P at arbitrary z."""
        u, _ = self.reduce(z)
        u = np.atleast_1d(u)
        near = np.abs(u) < _LAURENT_RADIUS
        far = ~near
        recip = np.zeros(u.shape, dtype=bool)
        g0 = np.zeros(u.shape, dtype=complex)
        g1 = np.zeros(u.shape, dtype=complex)
        g2 = np.zeros(u.shape, dtype=complex)
        if np.any(far):
            p, dp = self.wp_values(u[far])
            d2 = 6.0 * p * p - self.g2 / 2.0
            big = np.abs(p) > 1.0
            with np.errstate(divide="ignore", invalid="ignore"):
                q = 1.0 / p
                r0 = q
                r1 = -dp * q * q
                r2 = (2.0 * dp * dp - p * d2) * q**3
            recip[far] = big
            g0[far] = np.where(big, r0, p)
            g1[far] = np.where(big, r1, dp)
            g2[far] = np.where(big, r2, d2)
        if np.any(near):
            # 1/P = u^2 / (1 + a u^4 + b u^6) + O(u^10)
            w = u[near]
            a, b = self.g2 / 20.0, self.g3 / 28.0
            den = 1.0 + a * w**4 + b * w**6
            dden = 4 * a * w**3 + 6 * b * w**5
            d2den = 12 * a * w**2 + 30 * b * w**4
            q0 = w * w / den
            q1 = (2 * w - q0 * dden) / den
            q2 = (2.0 - 2 * q1 * dden - q0 * d2den) / den
            recip[near] = True
            g0[near], g1[near], g2[near] = q0, q1, q2
        return recip, g0, g1, g2

    def wp_prime_jets(self, z):
        """Normalised jets of P' (P'' = 6P^2 - g2/2, P''' = 12 P P')."""
        u, _ = self.reduce(z)
        u = np.atleast_1d(u)
        near = np.abs(u) < _LAURENT_RADIUS
        far = ~near
        recip = np.zeros(u.shape, dtype=bool)
        g0 = np.zeros(u.shape, dtype=complex)
        g1 = np.zeros(u.shape, dtype=complex)
        g2 = np.zeros(u.shape, dtype=complex)
        if np.any(far):
            p, dp = self.wp_values(u[far])
            d2 = 6.0 * p * p - self.g2 / 2.0
            d3 = 12.0 * p * dp
            big = np.abs(dp) > 1.0
            with np.errstate(divide="ignore", invalid="ignore"):
                q = 1.0 / dp
                r1 = -d2 * q * q
                r2 = (2.0 * d2 * d2 - dp * d3) * q**3
            recip[far] = big
            g0[far] = np.where(big, q, dp)
            g1[far] = np.where(big, r1, d2)
            g2[far] = np.where(big, r2, d3)
        if np.any(near):
            # P' = -2u^-3 (1 - (g2/20) u^4 - (g3/14) u^6) + O(u^7)
            w = u[near]
            a, b = -self.g2 / 20.0, -self.g3 / 14.0
            den = 1.0 + a * w**4 + b * w**6
            dden = 4 * a * w**3 + 6 * b * w**5
            d2den = 12 * a * w**2 + 30 * b * w**4
            n0, n1, n2 = -0.5 * w**3, -1.5 * w**2, -3.0 * w
            q0 = n0 / den
            q1 = (n1 - q0 * dden) / den
            q2 = (n2 - 2 * q1 * dden - q0 * d2den) / den
            recip[near] = True
            g0[near], g1[near], g2[near] = q0, q1, q2
        return recip, g0, g1, g2


def _gauss_reduce(w1: complex, w2: complex) -> tuple[complex, complex]:
    """Lagrange-Gauss reduction keeping orientation Im(w2/w1) > 0."""
    for _ in range(200):
        if abs(w2) < abs(w1):
            w1, w2 = -w2, w1
        mu = round((w2 / w1).real)
        if mu == 0:
            break
        w2 = w2 - mu * w1
    if (w2 / w1).imag < 0:
        w2 = -w2
    return w1, w2


def lemniscatic_lattice() -> Lattice:
    """The square lattice pi*(Z + iZ)."""
    return Lattice(math.pi, 1j * math.pi)
