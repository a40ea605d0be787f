"""Zeros and poles by argument-principle counting on subdivided cells.

Cells live in a coordinate plane xi that is either the z-plane itself or the
log-polar plane ``z = c + exp(xi)`` (used for annuli, where features are
evenly spaced in log|z|).  Every cell edge is integrated once, batched over
all edges, for

    J_k = int_edge s^k f'/f dz,   s in [-1, 1] the edge parameter, k = 0..4,

so a cell's winding number and its moments ``sum m_j (xi_j - c)^k`` follow
by signed sums over its four edges.  Neighbouring cells share edges, which
makes winding numbers exactly additive.  A cell is certified when its
moments are those of a single point (nonzero winding) or of nothing (zero
winding); otherwise it is split in four at a jittered interior point.
Symmetric configurations can mimic a single point in low moments (four
double poles at the corners of a square around a double zero have vanishing
central moments up to order three), so every certified point is also
verified by Newton polishing and by its local order on small circles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .catalog import MeromorphicMap, derivative_map, shift_map
from .quadrature import integrate_paths

__all__ = [
    "Rect",
    "AnnulusSector",
    "Disc",
    "LocatedPoint",
    "PointSet",
    "ContourError",
    "winding_count",
    "cell_windings",
    "locate_in_region",
    "local_order",
    "SeparationReport",
    "beta_separation",
    "DistributionReport",
    "equal_distribution_scan",
    "DerivativeConditionReport",
    "derivative_condition_check",
    "CPointReport",
    "c_point_proximity",
]

_INT_TOL = 0.1  # |winding - round(winding)| accepted
_VAR_TOL = 1e-6  # normalised moment tolerance for single-point cells
_RES_TOL = 1e-6  # |f| (zeros) or |1/f| (poles) at a verified point
_MAX_TRIES = 6
_CHECK_ROUND = 1e-13  # rounding allowance on log|f| differences


class ContourError(RuntimeError):
    """A contour passes through (or numerically too near) a zero or pole."""


# ---------------------------------------------------------------- regions

@dataclass(frozen=True)
class Rect:
    center: complex
    hw: float
    hh: float

    def __post_init__(self) -> None:
        if not (self.hw > 0 and self.hh > 0):
            raise ValueError("rectangle must have positive measure")
        object.__setattr__(self, "center", complex(self.center))

    def contains(self, z) -> np.ndarray:
        d = np.asarray(z) - self.center
        return (np.abs(d.real) < self.hw) & (np.abs(d.imag) < self.hh)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        c = self.center
        return c.real - self.hw, c.real + self.hw, c.imag - self.hh, c.imag + self.hh


@dataclass(frozen=True)
class AnnulusSector:
    r1: float
    r2: float
    th1: float = 0.0
    th2: float = 2 * math.pi
    center: complex = 0j

    def __post_init__(self) -> None:
        if not (0 < self.r1 < self.r2 and self.th1 < self.th2 and self.th2 - self.th1 <= 2 * math.pi + 1e-15):
            raise ValueError("annulus sector must have positive measure")
        object.__setattr__(self, "center", complex(self.center))

    def contains(self, z) -> np.ndarray:
        d = np.asarray(z) - self.center
        r = np.abs(d)
        th = np.mod(np.angle(d) - self.th1, 2 * math.pi)
        full = self.th2 - self.th1 >= 2 * math.pi - 1e-15
        return (r > self.r1) & (r < self.r2) & (full | (th < self.th2 - self.th1))


@dataclass(frozen=True)
class Disc:
    center: complex
    radius: float

    def __post_init__(self) -> None:
        if not self.radius > 0:
            raise ValueError("disc must have positive radius")
        object.__setattr__(self, "center", complex(self.center))

    def contains(self, z) -> np.ndarray:
        return np.abs(np.asarray(z) - self.center) < self.radius


Region = Union[Rect, AnnulusSector, Disc]


# ---------------------------------------------------------------- points

@dataclass(frozen=True)
class LocatedPoint:
    position: complex
    kind: str
    multiplicity: int
    cell: Region = field(compare=False)
    residual: float = field(compare=False, default=0.0)

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "pole"):
            raise ValueError(self.kind)
        if self.multiplicity < 1:
            raise ValueError("multiplicity must be >= 1")


def _order_key(z: complex) -> tuple[float, float]:
    a = math.atan2(z.imag, z.real)
    return (round(abs(z), 12), a)


@dataclass
class PointSet:
    function_id: str
    region: Region
    tol: float
    points: list[LocatedPoint]
    complete: bool = True

    def __post_init__(self) -> None:
        self.points = sorted(self.points, key=lambda p: _order_key(p.position))

    def of_kind(self, kind: str) -> "PointSet":
        return PointSet(self.function_id, self.region, self.tol, [p for p in self.points if p.kind == kind], self.complete)

    def zeros(self) -> "PointSet":
        return self.of_kind("zero")

    def poles(self) -> "PointSet":
        return self.of_kind("pole")

    @property
    def positions(self) -> np.ndarray:
        return np.array([p.position for p in self.points], dtype=complex)

    @property
    def multiplicities(self) -> np.ndarray:
        return np.array([p.multiplicity for p in self.points], dtype=int)

    def count(self, r: float, kind: Optional[str] = None, center: complex = 0j) -> int:
        """Multiplicity-weighted count in |z - center| < r."""
        return int(sum(p.multiplicity for p in self.points if (kind is None or p.kind == kind) and abs(p.position - center) < r))

    def __len__(self) -> int:
        return len(self.points)


# ---------------------------------------------------------------- frames

@dataclass(frozen=True)
class _Frame:
    polar: bool = False
    center: complex = 0j

    def z(self, xi):
        return self.center + np.exp(xi) if self.polar else xi

    def dz(self, xi):
        return np.exp(xi) if self.polar else np.ones_like(xi)

    def xi(self, z):
        return np.log(np.asarray(z) - self.center) if self.polar else np.asarray(z)

    def cell_region(self, x0, x1, y0, y1) -> Region:
        if self.polar:
            return AnnulusSector(math.exp(x0), math.exp(x1), y0, y1, self.center)
        return Rect(complex(0.5 * (x0 + x1), 0.5 * (y0 + y1)), 0.5 * (x1 - x0), 0.5 * (y1 - y0))


def _logder(f: MeromorphicMap):
    if f.log_derivative_fn is not None:
        return f.log_derivative_fn
    return lambda z: f.evaluate(z).log_derivative()


# ---------------------------------------------------------------- edge integrals

def _edge_integrals(f: MeromorphicMap, frame: _Frame, a: np.ndarray, b: np.ndarray, tol: float):
    """J_k, k=0..4, for straight xi-edges a -> b; returns (J (5, n), ok (n,))."""
    n = a.size
    if n == 0:
        return np.zeros((5, 0), dtype=complex), np.zeros(0, dtype=bool)
    L = _logder(f)
    span = b - a

    def fun(ids, t):
        xi = a[ids] + t * span[ids]
        z = frame.z(xi)
        with np.errstate(all="ignore"):
            v = L(z) * frame.dz(xi) * span[ids]
        s = 2.0 * t - 1.0
        s2 = s * s
        return np.stack([v, v * s, v * s2, v * s2 * s, v * s2 * s2])

    def check(ids, ta, tb, halves):
        za = frame.z(a[ids] + ta * span[ids])
        zb = frame.z(a[ids] + tb * span[ids])
        la = f.evaluate(za).log_abs()
        lb = f.evaluate(zb).log_abs()
        with np.errstate(invalid="ignore"):
            e = np.abs(halves[0].real - (lb - la))
            e = np.maximum(e - _CHECK_ROUND * (np.abs(la) + np.abs(lb) + 1.0), 0.0)
        return np.where(np.isfinite(e), e, np.inf)

    res = integrate_paths(fun, n, tol, n=8, init_panels=2, max_level=30, check=check, max_panels=400_000, max_path_panels=1024)
    ok = res.converged & np.all(np.isfinite(res.values), axis=0)
    return res.values, ok


@dataclass
class _Batch:
    """Cells of several small grids sharing one edge integration."""

    x0: np.ndarray
    x1: np.ndarray
    y0: np.ndarray
    y1: np.ndarray
    edges: np.ndarray  # (ncell, 4) edge indices: bottom, right, top, left
    signs: np.ndarray  # (ncell, 4)
    a: np.ndarray
    b: np.ndarray
    block: np.ndarray  # (ncell,) index of the grid the cell came from


def _build_batch(grids: Sequence[tuple[np.ndarray, np.ndarray]]) -> _Batch:
    xs0, xs1, ys0, ys1, eidx, sg, A, B, blk = [], [], [], [], [], [], [], [], []
    base = 0
    for gi, (xn, yn) in enumerate(grids):
        nx, ny = xn.size - 1, yn.size - 1
        # horizontal edges h[j, i]: (xn[i], yn[j]) -> (xn[i+1], yn[j])
        hx0, hy = np.meshgrid(xn[:-1], yn, indexing="xy")
        hx1, _ = np.meshgrid(xn[1:], yn, indexing="xy")
        ha = (hx0 + 1j * hy).ravel()
        hb = (hx1 + 1j * hy).ravel()
        # vertical edges v[j, i]: (xn[i], yn[j]) -> (xn[i], yn[j+1])
        vx, vy0 = np.meshgrid(xn, yn[:-1], indexing="xy")
        _, vy1 = np.meshgrid(xn, yn[1:], indexing="xy")
        va = (vx + 1j * vy0).ravel()
        vb = (vx + 1j * vy1).ravel()
        nh = ha.size
        A += [ha, va]
        B += [hb, vb]
        jj, ii = np.meshgrid(np.arange(ny), np.arange(nx), indexing="ij")
        jj, ii = jj.ravel(), ii.ravel()
        bottom = base + jj * nx + ii
        top = base + (jj + 1) * nx + ii
        left = base + nh + jj * (nx + 1) + ii
        right = base + nh + jj * (nx + 1) + ii + 1
        eidx.append(np.stack([bottom, right, top, left], axis=1))
        sg.append(np.tile(np.array([1, 1, -1, -1]), (ii.size, 1)))
        xs0.append(xn[ii])
        xs1.append(xn[ii + 1])
        ys0.append(yn[jj])
        ys1.append(yn[jj + 1])
        blk.append(np.full(ii.size, gi))
        base += nh + va.size
    cat = np.concatenate
    return _Batch(cat(xs0), cat(xs1), cat(ys0), cat(ys1), cat(eidx), cat(sg), cat(A), cat(B), cat(blk))


@dataclass
class _CellStats:
    winding: np.ndarray  # (ncell,) complex
    mu: np.ndarray  # (4, ncell) normalised moments about the centre, k=1..4
    rho: np.ndarray  # (ncell,) normalisation radius
    center: np.ndarray
    ok: np.ndarray


def _cell_stats(batch: _Batch, J: np.ndarray, eok: np.ndarray) -> _CellStats:
    c = 0.5 * (batch.x0 + batch.x1) + 0.5j * (batch.y0 + batch.y1)
    rho = 0.5 * np.hypot(batch.x1 - batch.x0, batch.y1 - batch.y0)
    M = np.zeros((5, c.size), dtype=complex)
    for s in range(4):
        e = batch.edges[:, s]
        sign = batch.signs[:, s]
        half = 0.5 * (batch.b[e] - batch.a[e]) / rho
        delta = (0.5 * (batch.a[e] + batch.b[e]) - c) / rho
        Je = J[:, e]
        for k in range(5):
            acc = 0
            for j in range(k + 1):
                acc = acc + math.comb(k, j) * half**j * delta ** (k - j) * Je[j]
            M[k] += sign * acc
    M /= 2j * math.pi
    ok = np.all(eok[batch.edges], axis=1)
    return _CellStats(M[0], M[1:], rho, c, ok)


def _classify(st: _CellStats, var_tol: float):
    """(status, n): status 0 empty, 1 single point, 2 split, -1 bad contour."""
    w = st.winding
    n = np.round(w.real).astype(int)
    bad = (~st.ok) | (np.abs(w - n) > _INT_TOL) | ~np.isfinite(w)
    status = np.full(n.shape, 2)
    nz = n != 0
    with np.errstate(all="ignore"):
        nn = np.where(nz, n, 1)
        d = st.mu[0] / nn
        v2 = st.mu[1] / nn - d * d
        v3 = st.mu[2] / nn - d**3
        v4 = st.mu[3] / nn - d**4
    single = nz & (np.abs(v2) <= var_tol) & (np.abs(v3) <= var_tol) & (np.abs(v4) <= var_tol) & (np.abs(d) < 1.0)
    empty = (~nz) & np.all(np.abs(st.mu) <= var_tol, axis=0)
    status[single] = 1
    status[empty] = 0
    status[bad] = -1
    return status, n


# ---------------------------------------------------------------- winding

def _boundary_edges(region: Region):
    """(frame, a, b) for the positively oriented boundary of ``region``."""
    if isinstance(region, Rect):
        x0, x1, y0, y1 = region.bounds
        c = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
        return _Frame(), np.array(c), np.array(c[1:] + c[:1])
    if isinstance(region, AnnulusSector):
        x0, x1 = math.log(region.r1), math.log(region.r2)
        c = [complex(x0, region.th1), complex(x1, region.th1), complex(x1, region.th2), complex(x0, region.th2)]
        return _Frame(True, region.center), np.array(c), np.array(c[1:] + c[:1])
    if isinstance(region, Disc):
        x = math.log(region.radius)
        return _Frame(True, region.center), np.array([complex(x, 0.0)]), np.array([complex(x, 2 * math.pi)])
    raise TypeError(region)


def _jittered(region: Region, k: int) -> Region:
    eps = 1e-7 * (k + 1) * (1 + 0.37 * k)
    if isinstance(region, Rect):
        return Rect(region.center, region.hw * (1 + eps), region.hh * (1 + 1.3 * eps))
    if isinstance(region, AnnulusSector):
        return AnnulusSector(region.r1 * (1 - eps), region.r2 * (1 + eps), region.th1, region.th2, region.center)
    return Disc(region.center, region.radius * (1 + eps))


def winding_count(f: MeromorphicMap, region: Region, tol: float = 1e-8) -> int:
    """(zeros - poles) inside ``region``, counted with multiplicity.

    If the boundary meets a zero or pole the contour is pushed outward by a
    relative 1e-7 and retried; a persistent failure raises ContourError.
    """
    for k in range(_MAX_TRIES):
        reg = region if k == 0 else _jittered(region, k)
        frame, a, b = _boundary_edges(reg)
        J, ok = _edge_integrals(f, frame, a, b, tol)
        w = complex(np.sum(J[0])) / (2j * math.pi)
        n = round(w.real)
        if np.all(ok) and abs(w - n) <= _INT_TOL:
            return int(n)
    raise ContourError(f"non-integer winding {w:.6g} on the boundary of {region}")


def cell_windings(f: MeromorphicMap, xnodes: Sequence[float], ynodes: Sequence[float], tol: float = 1e-8):
    """Winding numbers of all cells of a rectangular grid (shared edges).

    Returns ``(W, total)`` where ``W[j, i]`` is the cell [x_i, x_i+1] x
    [y_j, y_j+1] and ``total`` the winding over the outer boundary computed
    from the same edge integrals.
    """
    xn = np.asarray(xnodes, dtype=float)
    yn = np.asarray(ynodes, dtype=float)
    batch = _build_batch([(xn, yn)])
    J, ok = _edge_integrals(f, _Frame(), batch.a, batch.b, tol)
    if not np.all(ok):
        raise ContourError("a grid edge meets a zero or pole")
    st = _cell_stats(batch, J, ok)
    W = st.winding.reshape(yn.size - 1, xn.size - 1)
    n = np.round(W.real).astype(int)
    if np.any(np.abs(W - n) > _INT_TOL):
        raise ContourError("non-integer cell winding")
    nx, ny = xn.size - 1, yn.size - 1
    nh = (ny + 1) * nx
    outer = np.sum(J[0, :nx]) - np.sum(J[0, ny * nx : (ny + 1) * nx])  # bottom - top
    outer += np.sum(J[0, nh + nx :: nx + 1][:ny]) - np.sum(J[0, nh :: nx + 1][:ny])  # right - left
    total = outer / (2j * math.pi)
    return n, int(round(total.real))


# ---------------------------------------------------------------- polishing

def _polish(f: MeromorphicMap, z: complex, m: int, kind: str, radius: float) -> tuple[complex, float, bool]:
    """Newton with known multiplicity on f'/f; keeps the iterate of least |g|."""
    L = _logder(f)
    sgn = 1.0 if kind == "zero" else -1.0
    z0 = z
    best_z, best_r = z, _residual(f, z, kind)
    prev = math.inf
    for it in range(60):
        with np.errstate(all="ignore"):
            l = complex(L(np.array([z]))[0])
        if l == 0 or not np.isfinite(l):
            break
        step = sgn * m / l
        if it > 2 and abs(step) > 2.0 * prev:
            break  # rounding floor reached
        prev = abs(step)
        z = z - step
        if abs(z - z0) > radius:
            break
        r = _residual(f, z, kind)
        if r <= best_r:
            best_z, best_r = z, r
        if abs(step) <= 4e-16 * max(1.0, abs(z)):
            break
    return best_z, best_r, math.isfinite(best_r)


def local_order(f: MeromorphicMap, point: complex, kind: str, radius: float) -> float:
    """Order of vanishing of f (zero) or 1/f (pole) from |g| on two small circles.

    By Jensen's formula the circle mean of log|g| grows exactly like
    ``order * log r`` while no other zero or pole lies within ``radius``.
    """
    th = 2 * math.pi * (np.arange(16) + 0.5) / 16
    r1, r2 = 0.5 * radius, radius
    vals = []
    for r in (r1, r2):
        j = f.evaluate(point + r * np.exp(1j * th))
        la = j.log_abs()
        vals.append(np.mean(la if kind == "zero" else -la))
    return float((vals[1] - vals[0]) / math.log(r2 / r1))


# ---------------------------------------------------------------- locate

def _initial_grid(region: Region, cell: Optional[float], rng: np.random.Generator, polar_inner: Optional[float]):
    """List of (frame, xnodes, ynodes, filter region) covering ``region``."""
    out = []
    if isinstance(region, Rect):
        x0, x1, y0, y1 = region.bounds
        size = max(x1 - x0, y1 - y0)
        h = cell if cell is not None else size / 8
        ox, oy = rng.uniform(0.1, 0.4, 2) * h
        xn = np.arange(x0 - ox, x1 + h, h)
        yn = np.arange(y0 - oy, y1 + h, h)
        out.append((_Frame(), xn, yn, region))
    elif isinstance(region, AnnulusSector):
        out.append(_polar_grid(region, cell, rng, region))
    elif isinstance(region, Disc):
        if polar_inner is None:
            r = region.radius
            sq = Rect(region.center, r, r)
            out += [(fr, xn, yn, region) for fr, xn, yn, _ in _initial_grid(sq, cell, rng, None)]
        else:
            r1 = polar_inner
            sq = Rect(region.center, r1, r1)
            inner = Disc(region.center, r1)
            out += [(fr, xn, yn, inner) for fr, xn, yn, _ in _initial_grid(sq, cell, rng, None)]
            ann = AnnulusSector(r1, region.radius, 0.0, 2 * math.pi, region.center)
            fr, xn, yn, _ = _polar_grid(ann, None, rng, ann)
            out.append((fr, xn, yn, _AnnulusFilter(region.center, r1, region.radius)))
    else:
        raise TypeError(region)
    return out


@dataclass(frozen=True)
class _AnnulusFilter:
    center: complex
    r1: float
    r2: float

    def contains(self, z):
        r = np.abs(np.asarray(z) - self.center)
        return (r >= self.r1) & (r < self.r2)


def _polar_grid(region: AnnulusSector, cell: Optional[float], rng, filt):
    x0, x1 = math.log(region.r1), math.log(region.r2)
    full = region.th2 - region.th1 >= 2 * math.pi - 1e-15
    h = cell if cell is not None else 0.5
    nx = max(1, int(math.ceil((x1 - x0) / h)))
    xn = np.linspace(x0, x1, nx + 1)
    ny = max(4, int(math.ceil((region.th2 - region.th1) / h)))
    if full:
        off = rng.uniform(0.05, 0.45) * (2 * math.pi / ny)
        yn = region.th1 + off + np.linspace(0.0, 2 * math.pi, ny + 1)
    else:
        yn = np.linspace(region.th1, region.th2, ny + 1)
    return _Frame(True, region.center), xn, yn, filt


def locate_in_region(
    f: MeromorphicMap,
    region: Region,
    tol: float = 1e-9,
    *,
    cell: Optional[float] = None,
    polar_inner: Optional[float] = None,
    max_depth: int = 30,
    seed: int = 0,
    var_tol: float = _VAR_TOL,
) -> PointSet:
    """All zeros and poles of ``f`` in ``region``.

    ``cell`` sets the initial grid spacing (z units for rectangles, log-polar
    units for annuli).  For a :class:`Disc`, ``polar_inner`` switches to a
    square of that half-width plus a log-polar annulus outside it.
    """
    rng = np.random.default_rng(seed)
    found: list[LocatedPoint] = []
    complete = True
    for frame, xn, yn, filt in _initial_grid(region, cell, rng, polar_inner):
        pts, ok = _locate_grid(f, frame, xn, yn, tol, max_depth, rng, var_tol)
        complete &= ok
        found += [p for p in pts if bool(filt.contains(p.position))]
    return PointSet(f.name, region, tol, found, complete)


def _locate_grid(f, frame, xn, yn, tol, max_depth, rng, var_tol):
    # initial grid, re-jittered if any edge meets a special point
    for attempt in range(_MAX_TRIES):
        batch = _build_batch([(xn, yn)])
        J, eok = _edge_integrals(f, frame, batch.a, batch.b, tol)
        st = _cell_stats(batch, J, eok)
        status, n = _classify(st, var_tol)
        if not np.any(status == -1):
            break
        sh = rng.uniform(0.05, 0.2) * min(np.diff(xn).min(), np.diff(yn).min())
        if frame.polar:
            yn = yn + sh  # rotate; radial limits stay put
        else:
            xn, yn = xn - sh, yn - 0.7 * sh
    else:
        return [], False

    points: list[LocatedPoint] = []
    complete = True
    cells = (batch.x0, batch.x1, batch.y0, batch.y1)
    depth = 0
    while True:
        pts, failed = _emit(f, frame, cells, st, status, n)
        points += pts
        split = status == 2
        split[failed] = True
        if not np.any(split):
            break
        depth += 1
        if depth > max_depth:
            complete = False
            break
        x0, x1, y0, y1 = (c[split] for c in cells)
        cells, st, status, n, lost = _subdivide(f, frame, x0, x1, y0, y1, tol, rng, var_tol)
        if lost:
            complete = False
    return points, complete


def _subdivide(f, frame, x0, x1, y0, y1, tol, rng, var_tol):
    """Split every parent into four at a jittered point; re-split on failure."""
    m = x0.size
    fx = rng.uniform(0.42, 0.58, m)
    fy = rng.uniform(0.42, 0.58, m)
    pending = np.arange(m)
    out_cells = [[], [], [], []]
    out_st = []
    lost = False
    for attempt in range(_MAX_TRIES):
        if pending.size == 0:
            break
        grids = [
            (
                np.array([x0[i], x0[i] + fx[i] * (x1[i] - x0[i]), x1[i]]),
                np.array([y0[i], y0[i] + fy[i] * (y1[i] - y0[i]), y1[i]]),
            )
            for i in pending
        ]
        batch = _build_batch(grids)
        J, eok = _edge_integrals(f, frame, batch.a, batch.b, tol)
        st = _cell_stats(batch, J, eok)
        status, n = _classify(st, var_tol)
        bad_parent = np.zeros(pending.size, dtype=bool)
        bad_parent[np.unique(batch.block[status == -1])] = True
        good = ~bad_parent[batch.block]
        for k, arr in enumerate((batch.x0, batch.x1, batch.y0, batch.y1)):
            out_cells[k].append(arr[good])
        out_st.append((st, status, n, good))
        pending = pending[bad_parent]
        fx[pending] = rng.uniform(0.3, 0.7, pending.size)
        fy[pending] = rng.uniform(0.3, 0.7, pending.size)
    if pending.size:
        lost = True
    cells = tuple(np.concatenate(c) if c else np.zeros(0) for c in out_cells)
    w = np.concatenate([s.winding[g] for s, _, _, g in out_st]) if out_st else np.zeros(0, complex)
    mu = np.concatenate([s.mu[:, g] for s, _, _, g in out_st], axis=1) if out_st else np.zeros((4, 0), complex)
    rho = np.concatenate([s.rho[g] for s, _, _, g in out_st]) if out_st else np.zeros(0)
    cen = np.concatenate([s.center[g] for s, _, _, g in out_st]) if out_st else np.zeros(0, complex)
    okc = np.concatenate([s.ok[g] for s, _, _, g in out_st]) if out_st else np.zeros(0, bool)
    status = np.concatenate([s_[g] for _, s_, _, g in out_st]) if out_st else np.zeros(0, int)
    n = np.concatenate([n_[g] for _, _, n_, g in out_st]) if out_st else np.zeros(0, int)
    return cells, _CellStats(w, mu, rho, cen, okc), status, n, lost


def _emit(f, frame, cells, st, status, n):
    """Verified points from single-point cells, plus the indices that failed."""
    out = []
    failed = []
    x0, x1, y0, y1 = cells
    for i in np.flatnonzero(status == 1):
        xi = st.center[i] + st.rho[i] * st.mu[0, i] / n[i]
        z = complex(frame.z(xi))
        kind = "zero" if n[i] > 0 else "pole"
        m = abs(int(n[i]))
        reg = frame.cell_region(x0[i], x1[i], y0[i], y1[i])
        jac = abs(z - frame.center) if frame.polar else 1.0
        zp, res, ok = _polish(f, z, m, kind, st.rho[i] * jac)
        if not ok or not bool(reg.contains(zp)) or res > _RES_TOL:
            failed.append(i)
            continue
        xp = complex(frame.xi(zp))
        if frame.polar:
            mid = 0.5 * (y0[i] + y1[i])
            xp += 2j * math.pi * round((mid - xp.imag) / (2 * math.pi))
        gap = min(xp.real - x0[i], x1[i] - xp.real, xp.imag - y0[i], y1[i] - xp.imag) * jac
        order = local_order(f, zp, kind, 0.5 * gap) if gap > 0 else math.nan
        if not abs(order - m) < 0.25:
            failed.append(i)
            continue
        out.append(LocatedPoint(complex(zp), kind, m, reg, float(res)))
    return out, np.array(failed, dtype=int)


def _residual(f, z, kind):
    j = f.evaluate(np.array([z]))
    return abs(complex(j.g0[0])) if bool(j.recip[0]) == (kind == "pole") else float("inf")


# ---------------------------------------------------------------- statistics

def _inf_distance(src: np.ndarray, dst: np.ndarray, beta: float, exclude_self: bool = False):
    if src.size == 0 or dst.size == 0:
        return math.inf, None
    D = np.abs(src[:, None] - dst[None, :])
    if exclude_self:
        D = np.where(D == 0, np.inf, D)
    k = np.argmin(D, axis=1)
    vals = D[np.arange(src.size), k] * np.abs(src) ** beta
    i = int(np.argmin(vals))
    if not np.isfinite(vals[i]):
        return math.inf, None
    return float(vals[i]), (complex(src[i]), complex(dst[k[i]]))


@dataclass(frozen=True)
class SeparationReport:
    zero_to_pole: float  # inf_q dist(q, P) |q|^beta
    zero_pair: Optional[tuple[complex, complex]]
    pole_to_zero: float  # inf_p dist(p, Q) |p|^beta
    pole_pair: Optional[tuple[complex, complex]]
    n_zeros: int
    n_poles: int


def beta_separation(zeros: PointSet, poles: PointSet, beta: float, min_modulus: float = 1.0) -> SeparationReport:
    """Weighted zero-pole separation over points with |z| >= ``min_modulus``."""
    q = zeros.zeros().positions if zeros.points and zeros.points[0].kind == "zero" else zeros.positions
    p = poles.poles().positions if poles.points and poles.points[0].kind == "pole" else poles.positions
    if q.size == 0 or p.size == 0:
        raise ValueError("beta_separation needs nonempty zero and pole sets")
    q = q[np.abs(q) >= min_modulus]
    p = p[np.abs(p) >= min_modulus]
    if q.size == 0 or p.size == 0:
        raise ValueError("no points with |z| >= min_modulus")
    a, pa = _inf_distance(q, p, beta)
    b, pb = _inf_distance(p, q, beta)
    return SeparationReport(a, pa, b, pb, int(q.size), int(p.size))


@dataclass(frozen=True)
class DistributionReport:
    worst_eta: float  # max over probes of the smallest eta with both kinds in D_eta
    eta_per_probe: np.ndarray
    inconclusive: bool
    crowd: dict  # eps -> (zero count with multiplicity, zero locations, pole count, pole locations)


def equal_distribution_scan(
    ps: PointSet,
    beta: float,
    probes: Sequence[complex],
    eps_grid: Sequence[float] = (0.05, 0.1, 0.2),
    region: Optional[Region] = None,
) -> DistributionReport:
    """Both-kind presence and crowding in the discs D_eta(z0) = {|z - z0| < eta |z0|^-beta}.

    The smallest admissible eta at a probe is computed exactly as
    ``max(dist(z0, Q), dist(z0, P)) * |z0|^beta``.  The result is
    inconclusive when some needed disc leaves ``region`` (default: the point
    set's region) or when a kind is missing altogether.
    """
    probes = np.asarray(probes, dtype=complex)
    reg = region if region is not None else ps.region
    q = ps.zeros().positions
    p = ps.poles().positions
    scale = np.maximum(np.abs(probes), 1e-300) ** (-beta)
    inconclusive = q.size == 0 or p.size == 0
    if inconclusive:
        eta = np.full(probes.shape, np.inf)
    else:
        dq = np.min(np.abs(probes[:, None] - q[None, :]), axis=1)
        dp = np.min(np.abs(probes[:, None] - p[None, :]), axis=1)
        eta = np.maximum(dq, dp) / scale
        rad = eta * scale
        th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
        rim = probes[:, None] + rad[:, None] * np.exp(1j * th)[None, :]
        if not np.all(reg.contains(rim)):
            inconclusive = True
    crowd = {}
    centers = np.concatenate([probes, ps.positions]) if len(ps) else probes
    mult = ps.multiplicities
    kinds = np.array([pt.kind for pt in ps.points])
    cs = np.maximum(np.abs(centers), 1e-300) ** (-beta)
    for eps in eps_grid:
        if len(ps) == 0:
            crowd[float(eps)] = (0, 0, 0, 0)
            continue
        inside = np.abs(centers[:, None] - ps.positions[None, :]) < eps * cs[:, None]
        zq = inside & (kinds == "zero")[None, :]
        zp = inside & (kinds == "pole")[None, :]
        crowd[float(eps)] = (
            int(np.max(zq @ mult)),
            int(np.max(zq.sum(axis=1))),
            int(np.max(zp @ mult)),
            int(np.max(zp.sum(axis=1))),
        )
    return DistributionReport(float(np.max(eta)) if eta.size else math.inf, eta, bool(inconclusive), crowd)


@dataclass(frozen=True)
class DerivativeConditionReport:
    pole_separation: float  # inf_p |p|^beta dist(p, P \ {p})
    pole_pair: Optional[tuple[complex, complex]]
    critical_separation: float  # inf_c |c|^beta dist(c, P)
    critical_pair: Optional[tuple[complex, complex]]
    poles: PointSet
    critical_points: PointSet


def derivative_condition_check(
    f: MeromorphicMap,
    beta: float,
    region: Region,
    tol: float = 1e-9,
    min_modulus: float = 0.0,
    **locate_kw,
) -> DerivativeConditionReport:
    """Pole-pole and critical-point-to-pole separations, weighted by |z|^beta.

    Critical points are the zeros of f' located with the same machinery.  An
    empty comparison set gives the +inf sentinel.
    """
    ps = locate_in_region(f, region, tol, **locate_kw)
    fp = derivative_map(f)
    cps = locate_in_region(fp, region, tol, **locate_kw)
    P = ps.poles().positions
    P = P[np.abs(P) >= min_modulus]
    C = cps.zeros().positions
    C = C[np.abs(C) >= min_modulus]
    a, pa = _inf_distance(P, P, beta, exclude_self=True)
    b, pb = _inf_distance(C, P, beta)
    return DerivativeConditionReport(a, pa, b, pb, ps.poles(), cps.zeros())


@dataclass(frozen=True)
class CPointReport:
    c: complex
    c_points: np.ndarray  # ordered by modulus
    to_zeros: np.ndarray  # |zeta|^beta dist(zeta, Q)
    to_poles: np.ndarray  # |zeta|^beta dist(zeta, P)
    zero_trend: float  # slope of log(to_zeros) against log|zeta| (nan if < 3 points)
    inf_to_poles: float


def c_point_proximity(
    f: MeromorphicMap,
    c: complex,
    zeros: PointSet,
    poles: PointSet,
    beta: float,
    region: Region,
    tol: float = 1e-9,
    **locate_kw,
) -> CPointReport:
    """Where the c-points of f sit relative to its zeros and poles."""
    if c == 0:
        raise ValueError("c must be nonzero")
    cp = locate_in_region(shift_map(f, c), region, tol, **locate_kw).zeros()
    zeta = cp.positions
    Q = zeros.positions
    P = poles.positions
    if zeta.size == 0:
        return CPointReport(complex(c), zeta, np.zeros(0), np.zeros(0), math.nan, math.inf)
    w = np.abs(zeta) ** beta
    dq = np.min(np.abs(zeta[:, None] - Q[None, :]), axis=1) * w if Q.size else np.full(zeta.shape, np.inf)
    dp = np.min(np.abs(zeta[:, None] - P[None, :]), axis=1) * w if P.size else np.full(zeta.shape, np.inf)
    trend = math.nan
    m = (np.abs(zeta) > 1) & (dq > 0) & np.isfinite(dq)
    if np.count_nonzero(m) >= 3:
        trend = float(np.polyfit(np.log(np.abs(zeta[m])), np.log(dq[m]), 1)[0])
    return CPointReport(complex(c), zeta, dq, dp, trend, float(np.min(dp)))
