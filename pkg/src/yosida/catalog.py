"""Evaluable meromorphic test functions and the closure operations on them.

Every :class:`MeromorphicMap` wraps a vectorised evaluator returning
normalised jets (see :mod:`yosida.sphere`).  Constructors mirror the
operations under which the generalised Yosida classes are closed:
reciprocal, products, ``z^a f(z^b)`` and differentiation.  Claimed classes
are bookkeeping only; nothing here proves membership.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .elliptic import Lattice, lemniscatic_lattice
from .sphere import (
    Jet,
    JetArray,
    ScalingParams,
    jet_compose,
    jet_derivative,
    jet_product,
    normalize,
)

__all__ = [
    "KnownPoint",
    "MeromorphicMap",
    "CapabilityError",
    "weierstrass_p",
    "weierstrass_p_prime",
    "rational_map",
    "rational_from_roots",
    "transform_power",
    "reciprocal_map",
    "product_map",
    "derivative_map",
    "shift_map",
    "recentre_map",
    "bank_kaufman",
    "elementary_controls",
    "exp_map",
    "tan_map",
    "squared_pole_pairs",
    "build",
    "load_manifest",
    "DEFAULT_MANIFEST",
]

Evaluator = Callable[[np.ndarray], tuple]


class CapabilityError(RuntimeError):
    """A map lacks a capability (e.g. second-order jets) an operation needs."""


@dataclass(frozen=True, order=True)
class KnownPoint:
    position: complex = field(compare=False)
    kind: str  # "zero" | "pole"
    multiplicity: int

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "pole"):
            raise ValueError(self.kind)
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be positive")


KnownPoints = Callable[[float], list[KnownPoint]]


@dataclass(frozen=True)
class MeromorphicMap:
    """A meromorphic function with pole-aware jets.

    ``evaluator(z)`` takes a complex array and returns ``(recip, g0, g1, g2)``.
    ``known_points(R)`` lists oracle zeros/poles with ``|z| < R`` when the
    structure is known in closed form.
    """

    name: str
    evaluator: Evaluator = field(repr=False)
    order: int = 2
    log_derivative_fn: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)
    claimed: Optional[ScalingParams] = None
    conditional: bool = False
    known_points: Optional[KnownPoints] = field(default=None, repr=False)
    derivative_factory: Optional[Callable[[], "MeromorphicMap"]] = field(default=None, repr=False)
    params: tuple = ()

    def evaluate(self, z) -> JetArray:
        z = np.asarray(z, dtype=complex)
        shape = z.shape
        flat = np.ravel(z)
        r, g0, g1, g2 = self.evaluator(flat)
        r, g0, g1, g2 = normalize(r, g0, g1, g2)
        return JetArray(
            z,
            np.reshape(r, shape),
            np.reshape(g0, shape),
            np.reshape(g1, shape),
            np.reshape(g2, shape),
        )

    def jet(self, z: complex) -> Jet:
        return self.evaluate(np.array([complex(z)]))[0]

    def __call__(self, z):
        return self.evaluate(z).values()

    def sharp(self, z) -> np.ndarray:
        return self.evaluate(z).sharp()

    def log_derivative(self, z) -> np.ndarray:
        if self.log_derivative_fn is not None:
            return self.log_derivative_fn(np.asarray(z, dtype=complex))
        return self.evaluate(z).log_derivative()

    @property
    def has_exact_log_derivative(self) -> bool:
        return self.log_derivative_fn is not None

    def points(self, radius: float, kind: Optional[str] = None) -> list[KnownPoint]:
        if self.known_points is None:
            raise CapabilityError(f"{self.name} has no closed-form special points")
        pts = self.known_points(radius)
        if kind is not None:
            pts = [p for p in pts if p.kind == kind]
        return pts


def _sorted_points(pts: Sequence[KnownPoint]) -> list[KnownPoint]:
    return sorted(pts, key=lambda p: (abs(p.position), math.atan2(p.position.imag, p.position.real), p.kind))


def _net_points(pts: Sequence[KnownPoint], tol: float = 1e-9) -> list[KnownPoint]:
    """Merge coincident points, cancelling zeros against poles."""
    merged: list[list] = []
    for p in pts:
        sign = 1 if p.kind == "zero" else -1
        for entry in merged:
            if abs(entry[0] - p.position) <= tol * max(1.0, abs(p.position)):
                entry[1] += sign * p.multiplicity
                break
        else:
            merged.append([p.position, sign * p.multiplicity])
    out = [KnownPoint(z, "zero" if m > 0 else "pole", abs(m)) for z, m in merged if m != 0]
    return _sorted_points(out)


# ---------------------------------------------------------------- Weierstrass

def _wp_points(lattice: Lattice) -> KnownPoints:
    w1, w2, w3 = lattice.half_periods()
    # zeros of P: solve P(z) = 0 in the cell by Newton from the half-period
    # where |P| is smallest; for the square lattice it is the double zero w3
    e_vals = lattice.wp_values(np.array([w1, w2, w3]))[0]
    zeros = _wp_zeros(lattice, e_vals)

    def pts(radius: float) -> list[KnownPoint]:
        out = [KnownPoint(complex(p), "pole", 2) for p in lattice.points(radius)]
        for q, mult in zeros:
            for s in lattice.points(radius + 2 * abs(lattice.w1) + 2 * abs(lattice.w2)):
                z = complex(s + q)
                if abs(z) < radius:
                    out.append(KnownPoint(z, "zero", mult))
        return _sorted_points(out)

    return pts


def _wp_zeros(lattice: Lattice, e_vals) -> list[tuple[complex, int]]:
    w = lattice.half_periods()
    k = int(np.argmin(np.abs(e_vals)))
    if abs(e_vals[k]) < 1e-12 * max(1.0, abs(lattice.g2) ** 0.5):
        return [(complex(w[k]), 2)]
    # generic lattice: two simple zeros +-z0; Newton from a point near the cell middle
    seeds = [0.3 * lattice.w1 + 0.4 * lattice.w2, 0.6 * lattice.w1 + 0.5 * lattice.w2]
    found: list[complex] = []
    for z in seeds:
        z = complex(z)
        for _ in range(100):
            p, dp = lattice.wp_values(np.array([z]))
            step = complex(p[0] / dp[0])
            z -= step
            if abs(step) < 1e-15 * abs(lattice.w1):
                break
        red = complex(lattice.reduce(np.array([z]))[0][0])
        if all(abs(complex(lattice.reduce(np.array([red - f]))[0][0])) > 1e-8 for f in found):
            found.append(red)
    if len(found) == 1:
        found.append(complex(lattice.reduce(np.array([-found[0]]))[0][0]))
    return [(f, 1) for f in found[:2]]


def weierstrass_p(lattice: Optional[Lattice] = None) -> MeromorphicMap:
    """Weierstrass P for ``lattice`` (default: the square lattice pi(Z+iZ))."""
    lat = lattice if lattice is not None else lemniscatic_lattice()

    def logder(z):
        red, _ = lat.reduce(z)
        p, dp = lat.wp_values(np.atleast_1d(red))
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.reshape(dp / p, np.shape(z))

    return MeromorphicMap(
        name="weierstrass",
        evaluator=lat.wp_jets,
        order=2,
        log_derivative_fn=logder,
        claimed=ScalingParams(0.0, 0.0),
        known_points=_wp_points(lat),
        derivative_factory=lambda: weierstrass_p_prime(lat),
        params=(("omega1", lat.omega1), ("omega2", lat.omega2)),
    )


def weierstrass_p_prime(lattice: Optional[Lattice] = None) -> MeromorphicMap:
    lat = lattice if lattice is not None else lemniscatic_lattice()
    hp = lat.half_periods()

    def pts(radius: float) -> list[KnownPoint]:
        out = [KnownPoint(complex(p), "pole", 3) for p in lat.points(radius)]
        for h in hp:
            for s in lat.points(radius + 2 * abs(lat.w1) + 2 * abs(lat.w2)):
                z = complex(s + h)
                if abs(z) < radius:
                    out.append(KnownPoint(z, "zero", 1))
        return _sorted_points(out)

    return MeromorphicMap(
        name="weierstrass_prime",
        evaluator=lat.wp_prime_jets,
        order=2,
        claimed=ScalingParams(0.0, 0.0),
        conditional=True,
        known_points=pts,
        params=(("omega1", lat.omega1), ("omega2", lat.omega2)),
    )


# ---------------------------------------------------------------- rationals

def _poly_jets(coeffs: np.ndarray, z: np.ndarray):
    d1 = np.polyder(coeffs) if coeffs.size > 1 else np.zeros(1)
    d2 = np.polyder(d1) if d1.size > 1 else np.zeros(1)
    return np.polyval(coeffs, z), np.polyval(d1, z), np.polyval(d2, z)


def _cluster_roots(roots: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    out: list[list] = []
    for r in sorted(roots, key=lambda c: (abs(c), np.angle(c))):
        for entry in out:
            if abs(entry[0] - r) <= tol * max(1.0, abs(r)):
                n = entry[1]
                entry[0] = (entry[0] * n + r) / (n + 1)
                entry[1] += 1
                break
        else:
            out.append([complex(r), 1])
    return [(complex(c), m) for c, m in out]


def rational_from_roots(
    zeros: Sequence[complex] = (),
    poles: Sequence[complex] = (),
    scale: complex = 1.0,
    name: str = "rational",
) -> MeromorphicMap:
    """``scale * prod(z - q) / prod(z - p)``, roots repeated per multiplicity."""
    zeros = [complex(q) for q in zeros]
    poles = [complex(p) for p in poles]
    num = np.atleast_1d(np.poly(zeros) * scale) if zeros else np.array([complex(scale)])
    den = np.atleast_1d(np.poly(poles)) if poles else np.array([1.0 + 0j])
    special = []
    for q, m in _cluster_roots(np.array(zeros), 1e-12):
        special.append(KnownPoint(q, "zero", m))
    for p, m in _cluster_roots(np.array(poles), 1e-12):
        special.append(KnownPoint(p, "pole", m))
    return _rational(num, den, _net_points(special), name)


def rational_map(numerator: Sequence[complex], denominator: Sequence[complex], name: str = "rational") -> MeromorphicMap:
    """Rational function from coefficient lists (highest degree first)."""
    num = np.trim_zeros(np.asarray(numerator, dtype=complex), "f")
    den = np.trim_zeros(np.asarray(denominator, dtype=complex), "f")
    if den.size == 0:
        raise ZeroDivisionError("denominator polynomial is identically zero")
    if num.size == 0:
        num = np.zeros(1, dtype=complex)
    special = []
    if num.size > 1:
        for q, m in _cluster_roots(np.roots(num), 1e-7):
            special.append(KnownPoint(q, "zero", m))
    if den.size > 1:
        for p, m in _cluster_roots(np.roots(den), 1e-7):
            special.append(KnownPoint(p, "pole", m))
    return _rational(num, den, _net_points(special, 1e-7), name)


def _rational(num: np.ndarray, den: np.ndarray, special: list[KnownPoint], name: str) -> MeromorphicMap:
    def evaluator(z):
        n = _poly_jets(num, z)
        d = _poly_jets(den, z)
        return jet_product((np.zeros(z.shape, bool), *n), (np.ones(z.shape, bool), *d))

    def logder(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros(z.shape, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            for p in special:
                s = 1 if p.kind == "zero" else -1
                out = out + s * p.multiplicity / (z - p.position)
        return out

    def pts(radius: float) -> list[KnownPoint]:
        return [p for p in special if abs(p.position) < radius]

    is_zero = np.all(num == 0)
    return MeromorphicMap(
        name=name,
        evaluator=evaluator,
        order=2,
        log_derivative_fn=None if is_zero else logder,
        claimed=None,
        known_points=pts,
        params=(("numerator", tuple(num)), ("denominator", tuple(den))),
    )


# ---------------------------------------------------------------- closure ops

def _power_jets(z: np.ndarray, n: int):
    """Normalised jets of z**n for integer n (reciprocal form when n < 0)."""
    k = abs(n)
    ones = np.ones(z.shape, dtype=complex)
    zeros = np.zeros(z.shape, dtype=complex)
    if k == 0:
        j = (ones, zeros, zeros)
    elif k == 1:
        j = (z.astype(complex), ones, zeros)
    else:
        j = (z**k, k * z ** (k - 1), k * (k - 1) * z ** (k - 2))
    return normalize(np.full(z.shape, n < 0), *j)


def transform_power(f: MeromorphicMap, a: int, b: int) -> MeromorphicMap:
    """``z**a * f(z**b)``; claimed class (a + b alpha, b + b beta - 1)."""
    if int(a) != a or int(b) != b or b < 1:
        raise ValueError("need integer a and positive integer b")
    a, b = int(a), int(b)
    if a == 0 and b == 1:
        return f

    def evaluator(z):
        w = z**b
        w1 = b * z ** (b - 1)
        w2 = b * (b - 1) * z ** (b - 2) if b >= 2 else np.zeros(z.shape, dtype=complex)
        inner = f.evaluate(w)
        comp = jet_compose((inner.recip, inner.g0, inner.g1, inner.g2), w1, w2)
        comp = normalize(*comp)
        return jet_product(_power_jets(z, a), comp)

    claimed = None
    if f.claimed is not None:
        claimed = ScalingParams(a + b * f.claimed.alpha, b + b * f.claimed.beta - 1)

    known = None
    if f.known_points is not None:
        base = f.known_points

        def known(radius: float) -> list[KnownPoint]:
            out: list[KnownPoint] = []
            origin = a
            for p in base(radius**b):
                sgn = 1 if p.kind == "zero" else -1
                if p.position == 0:
                    origin += sgn * b * p.multiplicity
                    continue
                r0 = abs(p.position) ** (1.0 / b)
                th = np.angle(p.position)
                for k in range(b):
                    z = r0 * np.exp(1j * (th + 2 * np.pi * k) / b)
                    if abs(z) < radius:
                        out.append(KnownPoint(complex(z), p.kind, p.multiplicity))
            if origin != 0:
                out.append(KnownPoint(0j, "zero" if origin > 0 else "pole", abs(origin)))
            return _sorted_points(out)

    return MeromorphicMap(
        name=f"z^{a}*{f.name}(z^{b})",
        evaluator=evaluator,
        order=f.order,
        claimed=claimed,
        conditional=f.conditional,
        known_points=known,
        params=(("base", f.name), ("a", a), ("b", b)),
    )


def reciprocal_map(f: MeromorphicMap) -> MeromorphicMap:
    """``1/f``: the jets are reused with the representation flag flipped."""

    def evaluator(z):
        r, g0, g1, g2 = f.evaluator(z)
        return ~np.asarray(r, dtype=bool), g0, g1, g2

    logder = None
    if f.log_derivative_fn is not None:
        base = f.log_derivative_fn
        logder = lambda z: -base(z)  # noqa: E731
    known = None
    if f.known_points is not None:
        base_pts = f.known_points
        swap = {"zero": "pole", "pole": "zero"}
        known = lambda R: _sorted_points(  # noqa: E731
            [KnownPoint(p.position, swap[p.kind], p.multiplicity) for p in base_pts(R)]
        )
    claimed = None if f.claimed is None else ScalingParams(-f.claimed.alpha, f.claimed.beta)
    return MeromorphicMap(
        name=f"1/{f.name}",
        evaluator=evaluator,
        order=f.order,
        log_derivative_fn=logder,
        claimed=claimed,
        conditional=f.conditional,
        known_points=known,
        params=(("base", f.name),),
    )


def product_map(f: MeromorphicMap, g: MeromorphicMap) -> MeromorphicMap:
    """``f*g``; claimed class (alpha+alpha~, beta), flagged conditional."""

    def evaluator(z):
        return jet_product(normalize(*f.evaluator(z)), normalize(*g.evaluator(z)))

    logder = None
    if f.log_derivative_fn is not None and g.log_derivative_fn is not None:
        lf, lg = f.log_derivative_fn, g.log_derivative_fn
        logder = lambda z: lf(z) + lg(z)  # noqa: E731
    known = None
    if f.known_points is not None and g.known_points is not None:
        kf, kg = f.known_points, g.known_points
        known = lambda R: _net_points(kf(R) + kg(R))  # noqa: E731
    claimed = None
    if f.claimed is not None and g.claimed is not None and f.claimed.beta == g.claimed.beta:
        claimed = ScalingParams(f.claimed.alpha + g.claimed.alpha, f.claimed.beta)
    return MeromorphicMap(
        name=f"({f.name})*({g.name})",
        evaluator=evaluator,
        order=min(f.order, g.order),
        log_derivative_fn=logder,
        claimed=claimed,
        conditional=True,
        known_points=known,
        params=(("left", f.name), ("right", g.name)),
    )


def derivative_map(f: MeromorphicMap) -> MeromorphicMap:
    """``f'``; claimed class (alpha+beta, beta), flagged conditional."""
    claimed = None if f.claimed is None else ScalingParams(f.claimed.alpha + f.claimed.beta, f.claimed.beta)
    if f.derivative_factory is not None:
        d = f.derivative_factory()
        return replace(d, claimed=claimed, conditional=True)
    if f.order < 2:
        raise CapabilityError(f"{f.name} exposes only order-{f.order} jets; f' needs order 2")

    def evaluator(z):
        return jet_derivative(normalize(*f.evaluator(z)))

    return MeromorphicMap(
        name=f"({f.name})'",
        evaluator=evaluator,
        order=1,
        claimed=claimed,
        conditional=True,
        params=(("base", f.name),),
    )


def shift_map(f: MeromorphicMap, c: complex, name: Optional[str] = None) -> MeromorphicMap:
    """``f - c`` (c-points of f are the zeros of the result)."""
    c = complex(c)

    def evaluator(z):
        r, g0, g1, g2 = normalize(*f.evaluator(z))
        # direct: f - c;  reciprocal g = 1/f: 1/(f - c) = g / (1 - c g)
        one = np.ones(z.shape, dtype=complex)
        zero = np.zeros(z.shape, dtype=complex)
        direct = (np.zeros(z.shape, bool), g0 - c, g1, g2)
        num = (np.zeros(z.shape, bool), g0, g1, g2)
        den = normalize(np.ones(z.shape, bool), one - c * g0, -c * g1, -c * g2)
        # the product is 1/(f - c) in direct form, so flip it to describe f - c
        pr, p0, p1, p2 = jet_product(num, den)
        via_recip = (~np.asarray(pr, dtype=bool), p0, p1, p2)
        d = normalize(*direct)
        rr = np.asarray(r, dtype=bool)
        return tuple(np.where(rr, x, y) for x, y in zip(via_recip, d))

    return MeromorphicMap(
        name=name or f"{f.name}-({c})",
        evaluator=evaluator,
        order=f.order,
        claimed=f.claimed,
        conditional=f.conditional,
        params=(("base", f.name), ("c", c)),
    )


def recentre_map(f: MeromorphicMap, c: complex) -> MeromorphicMap:
    """``z -> f(z + c)`` with shifted oracle points."""
    c = complex(c)

    def evaluator(z):
        return f.evaluator(z + c)

    logder = None
    if f.log_derivative_fn is not None:
        lf = f.log_derivative_fn
        logder = lambda z: lf(np.asarray(z) + c)  # noqa: E731
    known = None
    if f.known_points is not None:
        kf = f.known_points
        known = lambda R: _sorted_points(  # noqa: E731
            [
                KnownPoint(p.position - c, p.kind, p.multiplicity)
                for p in kf(R + abs(c))
                if abs(p.position - c) < R
            ]
        )
    return MeromorphicMap(
        name=f"{f.name}(z+{c})",
        evaluator=evaluator,
        order=f.order,
        log_derivative_fn=logder,
        claimed=f.claimed,
        conditional=f.conditional,
        known_points=known,
        params=(("base", f.name), ("shift", c)),
    )


# ---------------------------------------------------------------- Bank-Kaufman

class BankKaufman:
    """f with f(sin z) = P(z) on the square lattice pi(Z+iZ).

    Evaluated as P(arcsin w) with the principal branch; the value does not
    depend on the determination because P is even with period pi.  Inside
    ``guard`` of w = +-1 the arcsine chain rule loses digits, so a Taylor
    polynomial about +-1 (coefficients from a Cauchy integral of f on a
    circle of radius 1/2) is used instead.
    """

    taylor_radius = 0.5
    taylor_nodes = 64

    def __init__(self, lattice: Lattice, guard: float = 1e-3, order: int = 6):
        self.lattice = lattice
        self.guard = guard
        self.order = order
        self._taylor = {s: self._taylor_coeffs(s) for s in (1.0, -1.0)}

    def _chain(self, w):
        s = np.arcsin(w)
        # cos(arcsin w) rather than sqrt(1 - w^2): same branch as s on the cuts
        c = np.cos(s)
        inner = normalize(*self.lattice.wp_jets(s))
        with np.errstate(divide="ignore", invalid="ignore"):
            s1 = 1.0 / c
            s2 = w / (c * c * c)
        return normalize(*jet_compose(inner, s1, s2))

    def _taylor_coeffs(self, centre: float) -> np.ndarray:
        n = self.taylor_nodes
        w = centre + self.taylor_radius * np.exp(2j * np.pi * np.arange(n) / n)
        vals = JetArray(w, *self._chain(w)).values()
        c = np.fft.fft(vals) / n
        return c[: self.order + 1] / self.taylor_radius ** np.arange(self.order + 1)

    def __call__(self, w):
        w = np.asarray(w, dtype=complex)
        r, g0, g1, g2 = self._chain(w)
        r, g0, g1, g2 = np.array(r), np.array(g0), np.array(g1), np.array(g2)
        for centre, coeffs in self._taylor.items():
            near = np.abs(w - centre) < self.guard
            if not np.any(near):
                continue
            u = w[near] - centre
            k = np.arange(coeffs.size)
            p0 = np.polyval(coeffs[::-1], u)
            d1 = (coeffs * k)[1:]
            p1 = np.polyval(d1[::-1], u)
            d2 = (coeffs * k * (k - 1))[2:]
            p2 = np.polyval(d2[::-1], u)
            rr, a0, a1, a2 = normalize(np.zeros(u.shape, bool), p0, p1, p2)
            r[near], g0[near], g1[near], g2[near] = rr, a0, a1, a2
        return r, g0, g1, g2


def bank_kaufman(lattice: Optional[Lattice] = None, guard: float = 1e-3) -> MeromorphicMap:
    """The Bank-Kaufman function f(w) = P(arcsin w), claimed class (0, -1)."""
    lat = lattice if lattice is not None else lemniscatic_lattice()
    if abs(lat.g3) > 1e-10 * max(1.0, abs(lat.g2) ** 1.5):
        raise ValueError("bank_kaufman needs a lemniscatic lattice (g3 = 0)")
    ev = BankKaufman(lat, guard=guard)

    def known(radius: float) -> list[KnownPoint]:
        out = [KnownPoint(0j, "pole", 2)] if radius > 0 else []
        k = 1
        while math.sinh(math.pi * k) < radius:
            y = math.sinh(math.pi * k)
            out += [KnownPoint(complex(0, y), "pole", 2), KnownPoint(complex(0, -y), "pole", 2)]
            k += 1
        k = 0
        while math.cosh(math.pi * (k + 0.5)) < radius:
            x = math.cosh(math.pi * (k + 0.5))
            out += [KnownPoint(complex(x, 0), "zero", 2), KnownPoint(complex(-x, 0), "zero", 2)]
            k += 1
        return _sorted_points(out)

    return MeromorphicMap(
        name="bank_kaufman",
        evaluator=ev,
        order=2,
        claimed=ScalingParams(0.0, -1.0),
        known_points=known,
        params=(("guard", guard),),
    )


# ---------------------------------------------------------------- controls

def exp_map() -> MeromorphicMap:
    def evaluator(z):
        big = z.real > 0
        e = np.exp(np.where(big, -z, z))
        return big, e, np.where(big, -e, e), e

    return MeromorphicMap(
        name="exp",
        evaluator=evaluator,
        order=2,
        log_derivative_fn=lambda z: np.ones(np.shape(z), dtype=complex),
        claimed=None,
        known_points=lambda R: [],
    )


def tan_map() -> MeromorphicMap:
    def evaluator(z):
        s, c = np.sin(z), np.cos(z)
        sj = (np.zeros(z.shape, bool), s, c, -s)
        cj = (np.ones(z.shape, bool), c, -s, -c)
        return jet_product(normalize(*sj), normalize(*cj))

    def known(radius: float) -> list[KnownPoint]:
        out = []
        k = 0
        while k * math.pi < radius:
            for s in {k, -k}:
                out.append(KnownPoint(complex(s * math.pi), "zero", 1))
            k += 1
        k = 0
        while (k + 0.5) * math.pi < radius:
            for s in (k + 0.5, -(k + 0.5)):
                out.append(KnownPoint(complex(s * math.pi), "pole", 1))
            k += 1
        return _sorted_points(out)

    return MeromorphicMap(
        name="tan",
        evaluator=evaluator,
        order=2,
        log_derivative_fn=lambda z: 1.0 / (np.sin(z) * np.cos(z)),
        claimed=None,
        known_points=known,
    )


def elementary_controls() -> list[MeromorphicMap]:
    """exp and tan: bounded spherical derivative, not Yosida functions."""
    return [exp_map(), tan_map()]


def squared_pole_pairs(kmax: int) -> MeromorphicMap:
    """Truncation of sum_k 1/((z - k^2)^2 - k^-2): pole pairs k^2 +- 1/k."""
    poles = []
    for k in range(1, kmax + 1):
        poles += [k * k + 1.0 / k, k * k - 1.0 / k]

    def evaluator(z):
        acc = None
        for k in range(1, kmax + 1):
            u = z - k * k
            d = (np.ones(z.shape, bool), u * u - 1.0 / (k * k), 2 * u, 2 * np.ones(z.shape, complex))
            term = normalize(*d)
            f0, f1, f2 = _direct_values(term)
            acc = (f0, f1, f2) if acc is None else tuple(x + y for x, y in zip(acc, (f0, f1, f2)))
        return np.zeros(z.shape, bool), acc[0], acc[1], acc[2]

    def known(radius: float) -> list[KnownPoint]:
        return _sorted_points([KnownPoint(complex(p), "pole", 1) for p in poles if abs(p) < radius])

    return MeromorphicMap(
        name=f"pole_pairs_{kmax}",
        evaluator=evaluator,
        order=2,
        claimed=None,
        known_points=known,
        params=(("kmax", kmax),),
    )


def _direct_values(jets):
    r, g0, g1, g2 = jets
    with np.errstate(divide="ignore", invalid="ignore"):
        f0 = 1.0 / g0
        f1 = -g1 * f0 * f0
        f2 = (2 * g1 * g1 - g0 * g2) * f0**3
    return (
        np.where(r, f0, g0),
        np.where(r, f1, g1),
        np.where(r, f2, g2),
    )


# ---------------------------------------------------------------- manifest

DEFAULT_MANIFEST = """\
# name = constructor and parameters for the experiment runner
[weierstrass]
constructor = weierstrass_p
omega1 = 3.141592653589793
omega2 = 3.141592653589793j

[weierstrass_prime]
constructor = weierstrass_p_prime
omega1 = 3.141592653589793
omega2 = 3.141592653589793j

[bank_kaufman]
constructor = bank_kaufman
guard = 1e-3

[exp]
constructor = exp

[tan]
constructor = tan

[mobius]
constructor = rational
numerator = 1, -1
denominator = 1, 1

[pole_pairs]
constructor = pole_pairs
kmax = 10
"""


def _complex_list(text: str) -> list[complex]:
    return [complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip()]


def load_manifest(source: Optional[str] = None) -> dict[str, dict[str, str]]:
    """Parse a manifest (path or text; default: the built-in one)."""
    cp = configparser.ConfigParser()
    if source is None:
        cp.read_string(DEFAULT_MANIFEST)
    elif "\n" in source or source.lstrip().startswith("["):
        cp.read_string(source)
    else:
        with open(source, encoding="utf-8") as fh:
            cp.read_file(fh)
    return {s: dict(cp[s]) for s in cp.sections()}


_ALLOWED = {
    "weierstrass_p": {"omega1", "omega2"},
    "weierstrass_p_prime": {"omega1", "omega2"},
    "bank_kaufman": {"guard"},
    "exp": set(),
    "tan": set(),
    "rational": {"numerator", "denominator"},
    "pole_pairs": {"kmax"},
}


def build(name: str, manifest: Optional[dict[str, dict[str, str]]] = None) -> MeromorphicMap:
    """Instantiate a catalog entry by manifest name."""
    manifest = manifest if manifest is not None else load_manifest()
    if name not in manifest:
        raise KeyError(f"unknown function {name!r}; known: {', '.join(sorted(manifest))}")
    spec = dict(manifest[name])
    ctor = spec.pop("constructor", name)
    if ctor not in _ALLOWED:
        raise KeyError(f"unknown constructor {ctor!r}")
    extra = set(spec) - _ALLOWED[ctor]
    if extra:
        raise ValueError(f"unknown keys for {ctor}: {sorted(extra)}")
    if ctor in ("weierstrass_p", "weierstrass_p_prime"):
        lat = Lattice(complex(spec.get("omega1", math.pi)), complex(spec.get("omega2", 1j * math.pi)))
        f = weierstrass_p(lat) if ctor == "weierstrass_p" else weierstrass_p_prime(lat)
    elif ctor == "bank_kaufman":
        f = bank_kaufman(guard=float(spec.get("guard", 1e-3)))
    elif ctor == "exp":
        f = exp_map()
    elif ctor == "tan":
        f = tan_map()
    elif ctor == "rational":
        f = rational_map(_complex_list(spec["numerator"]), _complex_list(spec["denominator"]), name=name)
    else:
        f = squared_pole_pairs(int(spec.get("kmax", 10)))
    return replace(f, name=name)


def manifest_text(manifest: dict[str, dict[str, str]]) -> str:
    cp = configparser.ConfigParser()
    for k, v in manifest.items():
        cp[k] = v
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
