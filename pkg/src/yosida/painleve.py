"""Painleve I along rays, with Laurent pass-through at poles.

Solutions of ``w'' = c0 + c1 z + 6 w^2`` (Painleve I is ``c0=0, c1=1``; the
autonomous ``c0=c1=0`` case serves as a harness check) are integrated along a
ray ``z = z0 + t d``.  When ``|w|`` reaches the blow-up threshold the pole is
fitted by its Laurent expansion

    w = u^-2 + sum_{k>=2} a_k u^k,   u = z - p,   a_4 = h free,

and integration restarts at the mirror image of the entry point on the far
side of the pole.  ``W = ((c0 + c1 z) w + 2 w^3 - w'^2 / 2)`` satisfies
``W' = c1 w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import least_squares

from .catalog import MeromorphicMap
from .quadrature import integrate_interval
from .sphere import ScalingParams, normalize

__all__ = [
    "PInitialData",
    "PoleRecord",
    "Trajectory",
    "ContinuationError",
    "StiffnessError",
    "GuardedPointError",
    "laurent_seed",
    "laurent_eval",
    "laurent_residual",
    "integrate_ray",
    "first_integral",
    "first_integral_map",
    "first_integral_jumps",
    "first_integral_drift",
    "pole_free_arcs",
    "trajectory_map",
    "roundtrip_errors",
    "recheck_from",
    "zero_sphericality_probe",
    "pole_field",
    "preset_initial_data",
    "PAINLEVE_PARAMS",
    "FIRST_INTEGRAL_PARAMS",
]

PAINLEVE_PARAMS = ScalingParams(0.5, 0.25)
FIRST_INTEGRAL_PARAMS = ScalingParams(0.25, 0.25)

BLOWUP = 1e3
FIT_SAMPLES = 8
FIT_ORDER = 6
SEED_ORDER = 10
DETOUR_RADIUS = 0.3
STEP_MARGIN = 30.0


class ContinuationError(RuntimeError):
    def __init__(self, message: str, partial: Optional["Trajectory"] = None):
        super().__init__(message)
        self.partial = partial


class StiffnessError(ContinuationError):
    pass


class GuardedPointError(ValueError):
    pass


@dataclass(frozen=True)
class PInitialData:
    z0: complex
    w0: complex
    w0p: complex

    def __post_init__(self) -> None:
        for v in (self.z0, self.w0, self.w0p):
            if not np.isfinite(complex(v)):
                raise ValueError("initial data must be finite")


@dataclass(frozen=True)
class PoleRecord:
    p: complex
    h: complex
    incoming_residual: float
    outgoing_residual: float
    t_entry: float
    t_exit: float


@dataclass
class Trajectory:
    origin: complex
    direction: complex
    span: tuple[float, float]
    t: np.ndarray
    z: np.ndarray
    w: np.ndarray
    wp: np.ndarray
    poles: list[PoleRecord]
    W0: complex
    forcing: tuple[float, float] = (0.0, 1.0)
    tol: float = 1e-10
    segments: list = field(default_factory=list, repr=False)

    def guard_intervals(self) -> np.ndarray:
        if not self.poles:
            return np.zeros((0, 2))
        return np.array([(p.t_entry, p.t_exit) for p in self.poles])

    def in_guard(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=bool)
        for a, b in self.guard_intervals():
            out |= (t > a) & (t < b)
        return out

    def state(self, t) -> tuple[np.ndarray, np.ndarray]:
        """(w, w') at ray parameters ``t``; Laurent series inside guard discs."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        w = np.full(t.shape, np.nan + 0j)
        wp = np.full(t.shape, np.nan + 0j)
        for a, b, sol in self.segments:
            m = (t >= a) & (t <= b)
            if np.any(m):
                y = sol(t[m])
                w[m], wp[m] = y[0], y[1]
        c0, c1 = self.forcing
        for rec in self.poles:
            m = (t > rec.t_entry) & (t < rec.t_exit)
            if np.any(m):
                coeffs = laurent_seed(rec.p, rec.h, SEED_ORDER, forcing=(c0, c1))
                w[m], wp[m] = laurent_eval(coeffs, self.origin + t[m] * self.direction - rec.p)
        return w, wp


# ---------------------------------------------------------------- Laurent series

def laurent_seed(p: complex, h: complex, order: int, forcing: tuple[float, float] = (0.0, 1.0)) -> np.ndarray:
    """Coefficients ``c`` with ``w = sum_j c[j] u^(j-2)``, through ``u^order``.

    ``c[0] = 1`` is the leading ``u^-2`` term and ``c[k+2] = a_k``.  Matching
    powers of ``u^(k-2)`` in ``w'' = c0 + c1 (p + u) + 6 w^2`` gives
    ``(k-4)(k+3) a_k = [k=2](c0 + c1 p) + [k=3] c1 + 6 sum_{i+j=k-2} a_i a_j``.
    """
    if not (4 <= order <= 12):
        raise ValueError(f"order must be in [4, 12], got {order}")
    c0, c1 = forcing
    a = np.zeros(order + 1, dtype=complex)
    for k in range(2, order + 1):
        rhs = 0j
        if k == 2:
            rhs += c0 + c1 * p
        if k == 3:
            rhs += c1
        for i in range(2, k - 3):
            j = k - 2 - i
            if j >= 2:
                rhs += 6.0 * a[i] * a[j]
        if k == 4:
            a[k] = h
        else:
            a[k] = rhs / ((k - 4) * (k + 3))
    out = np.zeros(order + 3, dtype=complex)
    out[0] = 1.0
    out[4:] = a[2:]
    return out


def laurent_eval(coeffs: np.ndarray, u) -> tuple[np.ndarray, np.ndarray]:
    """(w, w') of the Laurent series at offsets ``u`` from the pole."""
    u = np.asarray(u, dtype=complex)
    w = np.zeros(u.shape, dtype=complex)
    wp = np.zeros(u.shape, dtype=complex)
    for j in range(coeffs.size - 1, -1, -1):
        c = coeffs[j]
        if c == 0:
            continue
        e = j - 2
        w = w + c * u**e
        wp = wp + c * e * u ** (e - 1)
    return w, wp


def laurent_residual(coeffs: np.ndarray, forcing=(0.0, 1.0), p: complex = 0j) -> np.ndarray:
    """Coefficients of ``w'' - 6 w^2 - c0 - c1 (p+u)`` through the truncation order."""
    c0, c1 = forcing
    n = coeffs.size
    # index j <-> power u^(j-4) in the products below
    wpp = np.zeros(n + 2, dtype=complex)
    for j in range(n):
        e = j - 2
        if e * (e - 1) != 0:
            wpp[e - 2 + 4] += coeffs[j] * e * (e - 1)
    sq = np.convolve(coeffs, coeffs)[: n + 2]  # power u^(j-4)
    res = wpp - 6.0 * sq
    res[4] -= c0 + c1 * p
    res[5] -= c1
    # the truncated series is only valid through u^(order-2)
    return res[: n]


# ---------------------------------------------------------------- integration

def _rhs(direction: complex, forcing: tuple[float, float], z0: complex):
    c0, c1 = forcing

    def f(t, y):
        z = z0 + t * direction
        return np.array([direction * y[1], direction * (c0 + c1 * z + 6.0 * y[0] * y[0])])

    return f


def _ray_end(z0: complex, d: complex, r_max: float) -> float:
    # |z0 + t d| = r_max, positive root
    b = (z0 * np.conj(d)).real
    c = abs(z0) ** 2 - r_max**2
    disc = b * b - c
    if disc < 0:
        raise ValueError("ray never reaches r_max")
    t = -b + math.sqrt(disc)
    if t <= 0:
        raise ValueError("r_max must exceed |z0| along the ray")
    return t


def _fit_pole(zs, ws, wps, forcing, order):
    z_e, w_e, wp_e = zs[-1], ws[-1], wps[-1]
    p0 = z_e + 2.0 * w_e / wp_e

    def split(x):
        return complex(x[0], x[1]), complex(x[2], x[3])

    def resid(x):
        p, h = split(x)
        c = laurent_seed(p, h, order, forcing)
        sw, swp = laurent_eval(c, zs - p)
        r = np.concatenate([(sw - ws) / ws, (swp - wps) / wps])
        return np.concatenate([r.real, r.imag])

    # h enters linearly: start from its least-squares value at p0
    c = laurent_seed(p0, 0.0, order, forcing)
    sw, _ = laurent_eval(c, zs - p0)
    basis = (zs - p0) ** 4
    h0 = complex(np.linalg.lstsq(basis[:, None] / ws[:, None], (ws - sw) / ws, rcond=None)[0][0])
    best = None
    for x0 in ([p0.real, p0.imag, h0.real, h0.imag], [p0.real, p0.imag, 0.0, 0.0]):
        sol = least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15, method="lm")
        rms = float(np.sqrt(np.mean(sol.fun**2)))
        if best is None or rms < best[2]:
            best = (*split(sol.x), rms)
    return best


def integrate_ray(
    init: PInitialData,
    direction: complex,
    r_max: float,
    tol: float = 1e-10,
    *,
    forcing: tuple[float, float] = (0.0, 1.0),
    spacing: float = 0.02,
    blowup: float = BLOWUP,
    fit_order: int = FIT_ORDER,
    fit_tol: Optional[float] = None,
    t_max: Optional[float] = None,
    max_poles: int = 100000,
) -> Trajectory:
    """Continue a solution from ``init`` along ``z0 + t*direction`` up to |z| = r_max.

    ``t_max`` overrides the ray length (needed for rays that do not leave
    the disc of radius r_max, e.g. backward rays).
    """
    if not (1e-12 <= tol <= 1e-6):
        raise ValueError("tol must lie in [1e-12, 1e-6]")
    d = complex(direction)
    if abs(abs(d) - 1.0) > 1e-12:
        raise ValueError("direction must be a unit complex number")
    d = d / abs(d)
    z0 = complex(init.z0)
    t_end = t_max if t_max is not None else _ray_end(z0, d, r_max)
    fit_tol = fit_tol if fit_tol is not None else max(1e4 * tol, 1e-7)
    rhs = _rhs(d, forcing, z0)
    c0, c1 = forcing
    # local error control per step; the global error along an arc runs a few
    # tens of steps' worth above it, so steps are held well below ``tol``
    step_tol = max(tol / STEP_MARGIN, 2.5e-14)

    def event(t, y):
        return abs(y[0]) - blowup

    event.terminal = True
    event.direction = 1

    y = np.array([complex(init.w0), complex(init.w0p)])
    t = 0.0
    segments = []
    poles: list[PoleRecord] = []
    W0 = complex(first_integral(z0, complex(init.w0), complex(init.w0p), forcing))

    def partial():
        return _assemble(z0, d, (0.0, t_end), segments, poles, W0, forcing, tol, spacing)

    while t < t_end:
        sol = solve_ivp(
            rhs, (t, t_end), y, method="DOP853", rtol=step_tol, atol=step_tol, dense_output=True, events=event
        )
        if sol.status == -1:
            raise StiffnessError(f"integration failed at t={sol.t[-1]:.6g}: {sol.message}", partial())
        t_stop = float(sol.t[-1])
        if sol.status == 0:
            segments.append((t, t_stop, sol.sol))
            break
        if len(poles) >= max_poles:
            raise ContinuationError("too many poles", partial())
        # pole: fit on dense samples approaching the blow-up point
        ye = sol.y_events[0][0]
        te = float(sol.t_events[0][0])
        ze = z0 + te * d
        u_e = abs(2.0 * ye[0] / ye[1])
        span = min(0.8 * u_e, te - t)
        ts = np.linspace(te - span, te, FIT_SAMPLES)
        ys = sol.sol(ts)
        zs = z0 + ts * d
        p, h, rin = _fit_pole(zs, ys[0], ys[1], forcing, fit_order)
        if not np.isfinite(rin) or rin > fit_tol:
            raise ContinuationError(f"pole fit residual {rin:.3g} near z={ze:.6g}", partial())
        # continue round the circle about p starting where |w| is still
        # moderate: a restart close to the pole would amplify the step error
        # into the free coefficient h like |w|^3.  The guard disc itself stays
        # the blow-up region, the ray between it and the circle is integrated
        # backward from the far side.
        off = (p - ze) * np.conj(d)
        foot = te + off.real
        dperp = abs(off.imag)
        t_exit = te + max(2.0 * off.real, 0.0)
        rho = max(DETOUR_RADIUS * max(abs(p), 1.0) ** -0.25, abs(ze - p))
        rho = max(min(rho, 0.9 * math.hypot(foot - t, dperp)), abs(ze - p))
        half_chord = math.sqrt(max(rho * rho - dperp * dperp, 0.0))
        t_in = min(foot - half_chord, te)
        t_out = max(foot + half_chord, t_exit)
        segments.append((t, te, sol.sol))
        y = _detour(sol.sol(t_in), z0 + t_in * d, z0 + t_out * d, p, forcing, step_tol)
        if y is None:
            raise ContinuationError(f"detour around p={p:.6g} failed", partial())
        if t_out > t_exit:
            back = solve_ivp(
                rhs, (t_out, t_exit), y, method="DOP853", rtol=step_tol, atol=step_tol, dense_output=True
            )
            if back.status != 0:
                raise ContinuationError(f"backward leg near p={p:.6g} failed", partial())
            segments.append((t_exit, t_out, back.sol))
        y_exit = segments[-1][2](t_exit) if t_out > t_exit else y
        coeffs = laurent_seed(p, h, SEED_ORDER, forcing)
        rout = _outgoing_check(rhs, t_exit, y_exit, coeffs, p, z0, d, span, tol)
        poles.append(PoleRecord(complex(p), complex(h), rin, rout, te, t_exit))
        if rout > fit_tol:
            raise ContinuationError(f"pole pass-through mismatch {rout:.3g} at p={p:.6g}", partial())
        t = t_out
        if t >= t_end:
            break
    return _assemble(z0, d, (0.0, t_end), segments, poles, W0, forcing, tol, spacing)


def _detour(y, z_a, z_b, p, forcing, tol):
    """Carry (w, w') from z_a to z_b along the shorter arc of the circle about p."""
    c0, c1 = forcing
    rho = abs(z_a - p)
    th_a = np.angle(z_a - p)
    sweep = float(np.angle((z_b - p) / (z_a - p)))
    if sweep == 0.0:
        return np.asarray(y, dtype=complex)

    def f(s, v):
        z = p + rho * np.exp(1j * (th_a + s))
        dz = 1j * (z - p)
        return np.array([v[1] * dz, (c0 + c1 * z + 6.0 * v[0] * v[0]) * dz])

    sol = solve_ivp(f, (0.0, sweep), np.asarray(y, dtype=complex), method="DOP853", rtol=tol, atol=tol)
    if sol.status != 0:
        return None
    # the chord end sits at radius |z_b - p|, equal to rho up to the fit error
    w, wp = sol.y[0, -1], sol.y[1, -1]
    z_end = p + rho * np.exp(1j * (th_a + sweep))
    dz = z_b - z_end
    return np.array([w + wp * dz, wp + (c0 + c1 * z_end + 6.0 * w * w) * dz])


def _outgoing_check(rhs, t_exit, y, coeffs, p, z0, d, span, tol) -> float:
    # integrate a short way out and compare with the series prediction
    ts = np.linspace(t_exit, t_exit + span, FIT_SAMPLES)
    s = solve_ivp(rhs, (t_exit, ts[-1]), y, method="DOP853", rtol=tol, atol=tol, t_eval=ts)
    if s.status != 0:
        return float("inf")
    w, _ = laurent_eval(coeffs, z0 + ts * d - p)
    return float(np.sqrt(np.mean(np.abs((s.y[0] - w) / w) ** 2)))


def _assemble(z0, d, span, segments, poles, W0, forcing, tol, spacing) -> Trajectory:
    ts = []
    for a, b, _ in segments:
        if b <= a:
            continue
        n = max(2, int(math.ceil((b - a) / spacing)) + 1)
        ts.append(np.linspace(a, b, n))
    t = np.unique(np.concatenate(ts)) if ts else np.zeros(0)
    t = t[t <= span[1]]
    w = np.zeros(t.shape, dtype=complex)
    wp = np.zeros(t.shape, dtype=complex)
    for a, b, sol in segments:
        m = (t >= a) & (t <= b)
        if np.any(m):
            y = sol(t[m])
            w[m], wp[m] = y[0], y[1]
    # pole entry points sit on the threshold itself; rounding may put them above
    keep = np.abs(w) <= BLOWUP
    t, w, wp = t[keep], w[keep], wp[keep]
    return Trajectory(
        origin=z0,
        direction=d,
        span=span,
        t=t,
        z=z0 + t * d,
        w=w,
        wp=wp,
        poles=list(poles),
        W0=W0,
        forcing=tuple(forcing),
        tol=tol,
        segments=list(segments),
    )


# ---------------------------------------------------------------- first integral

def first_integral(z, w, wp, forcing=(0.0, 1.0)):
    """``W = (c0 + c1 z) w + 2 w^3 - w'^2 / 2``; W' = c1 w along solutions."""
    c0, c1 = forcing
    return (c0 + c1 * z) * w + 2.0 * w**3 - 0.5 * wp * wp


def first_integral_map(traj: Trajectory):
    """W as a function of ray points; raises inside pole guard discs."""

    def W(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        t = ((z - traj.origin) * np.conj(traj.direction)).real
        if np.any(traj.in_guard(t)):
            raise GuardedPointError("W evaluated inside a pole guard disc")
        w, wp = traj.state(t)
        return first_integral(traj.origin + t * traj.direction, w, wp, traj.forcing)

    return W


def first_integral_jumps(traj: Trajectory, reach: float = 0.15) -> list[float]:
    """Relative mismatch of the W increment across each pole.

    W is compared between points ``reach * |p|^(-1/4)`` outside the guard
    disc (near the pole W suffers cancellation between 2w^3 and w'^2/2).
    The prediction integrates w by quadrature on the regular stretches and
    the Laurent series termwise across the guard disc, where
    ``int w = -1/u + sum a_k u^(k+1)/(k+1)``.
    """
    out = []
    c0, c1 = traj.forcing
    d = traj.direction
    for k, rec in enumerate(traj.poles):
        coeffs = laurent_seed(rec.p, rec.h, SEED_ORDER, traj.forcing)
        L = reach * max(abs(rec.p), 1.0) ** -0.25
        ta = max(rec.t_entry - L, traj.span[0])
        tb = min(rec.t_exit + L, traj.span[1])
        if k > 0:
            ta = max(ta, traj.poles[k - 1].t_exit)
        if k + 1 < len(traj.poles):
            tb = min(tb, traj.poles[k + 1].t_entry)

        def prim(t):
            u = traj.origin + t * d - rec.p
            acc = -1.0 / u
            for j in range(4, coeffs.size):
                kk = j - 2
                acc += coeffs[j] * u ** (kk + 1) / (kk + 1)
            return acc

        def w_on(t):
            return traj.state(t)[0][None, :] * d

        qtol = 1e-12 * max(abs(prim(rec.t_entry)), 1.0)
        left = integrate_interval(w_on, ta, rec.t_entry, qtol)[0] if rec.t_entry > ta else 0.0
        right = integrate_interval(w_on, rec.t_exit, tb, qtol)[0] if tb > rec.t_exit else 0.0
        pred = c1 * (left + prim(rec.t_exit) - prim(rec.t_entry) + right)
        w, wp = traj.state(np.array([ta, tb]))
        Wa, Wb = first_integral(traj.origin + np.array([ta, tb]) * d, w, wp, traj.forcing)
        scale = max(abs(Wa), abs(Wb), 1.0)
        out.append(float(abs((Wb - Wa) - pred) / scale))
    return out


def first_integral_drift(traj: Trajectory, t_a: float, t_b: float) -> float:
    """|W(b) - W(a) - c1 int_a^b w dz| / (b - a) on a pole-free stretch."""
    if np.any(traj.in_guard(np.linspace(t_a, t_b, 64))) or any(
        t_a < r.t_exit and r.t_entry < t_b for r in traj.poles
    ):
        raise GuardedPointError("stretch meets a pole guard disc")
    d = traj.direction
    w, wp = traj.state(np.array([t_a, t_b]))
    qtol = 1e-12 * (t_b - t_a) * max(1.0, float(np.max(np.abs(w))))
    I = integrate_interval(lambda t: traj.state(t)[0][None, :] * d, t_a, t_b, qtol)[0]
    Wa, Wb = first_integral(traj.origin + np.array([t_a, t_b]) * d, w, wp, traj.forcing)
    return float(abs(Wb - Wa - traj.forcing[1] * I) / (t_b - t_a))


def pole_free_arcs(traj: Trajectory, inset: float = 0.25, min_length: float = 0.05) -> list[tuple[float, float]]:
    """Ray stretches between consecutive guard discs, shrunk by ``inset`` of
    their length at both ends.

    The stretch after the last recorded pole is left out: it can run into a
    pole just beyond the span, where w is large but no guard was drawn.
    """
    edges = [traj.span[0]] + [x for ab in traj.guard_intervals() for x in ab]
    arcs = []
    for a, b in zip(edges[0::2], edges[1::2]):
        L = b - a
        if L >= min_length:
            arcs.append((a + inset * L, b - inset * L))
    return arcs


# ---------------------------------------------------------------- checks

def recheck_from(traj: Trajectory, index: int, upto: Optional[float] = None) -> float:
    """Re-integrate from checkpoint ``index``; max relative deviation at later checkpoints."""
    init = PInitialData(traj.z[index], traj.w[index], traj.wp[index])
    t0 = traj.t[index]
    t1 = traj.span[1] if upto is None else upto
    again = integrate_ray(
        init, traj.direction, 0.0, traj.tol, forcing=traj.forcing, t_max=t1 - t0
    )
    later = (traj.t > t0) & (traj.t <= t1) & ~traj.in_guard(traj.t)
    tt = traj.t[later]
    tt = tt[~again.in_guard(tt - t0)]
    w1, _ = again.state(tt - t0)
    w0, _ = traj.state(tt)
    return float(np.max(np.abs(w1 - w0) / np.maximum(np.abs(w0), 1.0))) if tt.size else 0.0


def roundtrip_errors(traj: Trajectory, back: float = 0.2) -> list[float]:
    """Backward re-integration across each recorded pole.

    Start ``back`` past the exit point, integrate backward through the pole
    with the same machinery and compare (w, w') with the forward solution at
    ``back`` before the entry point.
    """
    errs = []
    d = traj.direction
    for k, rec in enumerate(traj.poles):
        lo = rec.t_entry - back
        hi = rec.t_exit + back
        if k > 0:
            lo = max(lo, 0.5 * (traj.poles[k - 1].t_exit + rec.t_entry))
        if k + 1 < len(traj.poles):
            hi = min(hi, 0.5 * (rec.t_exit + traj.poles[k + 1].t_entry))
        lo = max(lo, traj.span[0])
        hi = min(hi, traj.span[1])
        wa, wpa = traj.state(np.array([lo]))
        wb, wpb = traj.state(np.array([hi]))
        init = PInitialData(traj.origin + hi * d, wb[0], wpb[0])
        rev = integrate_ray(init, -d, 0.0, traj.tol, forcing=traj.forcing, t_max=hi - lo)
        w, wp = rev.state(np.array([hi - lo]))
        e = max(abs(w[0] - wa[0]) / abs(wa[0]), abs(wp[0] - wpa[0]) / abs(wpa[0]))
        errs.append(float(e))
    return errs


def trajectory_map(traj: Trajectory, name: str = "painleve_I", ray_tol: float = 1e-9) -> MeromorphicMap:
    """The trace of w on its ray as a map; off-ray arguments are rejected."""
    d = traj.direction

    def evaluator(z):
        t = ((z - traj.origin) * np.conj(d)).real
        off = np.abs(((z - traj.origin) * np.conj(d)).imag)
        if np.any(off > ray_tol * np.maximum(1.0, np.abs(z))):
            raise ValueError("trajectory maps can only be evaluated on their ray")
        if np.any((t < traj.span[0] - 1e-12) | (t > traj.span[1] + 1e-12)):
            raise ValueError("point outside the integrated span")
        w, wp = traj.state(t)
        wpp = traj.forcing[0] + traj.forcing[1] * (traj.origin + t * d) + 6.0 * w * w
        inside = traj.in_guard(t)
        r, g0, g1, g2 = normalize(np.zeros(t.shape, bool), w, wp, wpp)
        if np.any(inside):
            # exact reciprocal jets from the Laurent series near the pole
            for rec in traj.poles:
                m = (t > rec.t_entry) & (t < rec.t_exit)
                if not np.any(m):
                    continue
                coeffs = laurent_seed(rec.p, rec.h, SEED_ORDER, traj.forcing)
                u = traj.origin + t[m] * d - rec.p
                q0, q1, q2 = _reciprocal_laurent(coeffs, u)
                r[m], g0[m], g1[m], g2[m] = True, q0, q1, q2
        return r, g0, g1, g2

    return MeromorphicMap(
        name=name,
        evaluator=evaluator,
        order=2,
        claimed=PAINLEVE_PARAMS,
        params=(("origin", traj.origin), ("direction", d)),
    )


def _reciprocal_laurent(coeffs: np.ndarray, u: np.ndarray):
    # 1/w = u^2 / s(u) with s = sum_j c_j u^j (the series times u^2)
    s = np.zeros(u.shape, dtype=complex)
    s1 = np.zeros(u.shape, dtype=complex)
    s2 = np.zeros(u.shape, dtype=complex)
    for j in range(coeffs.size):
        c = coeffs[j]
        if c == 0:
            continue
        s = s + c * u**j
        if j >= 1:
            s1 = s1 + c * j * u ** (j - 1)
        if j >= 2:
            s2 = s2 + c * j * (j - 1) * u ** (j - 2)
    n0, n1, n2 = u * u, 2 * u, 2.0 * np.ones(u.shape)
    q0 = n0 / s
    q1 = (n1 - q0 * s1) / s
    q2 = (n2 - 2 * q1 * s1 - q0 * s2) / s
    return q0, q1, q2


# ---------------------------------------------------------------- zeros

@dataclass(frozen=True)
class ZeroSample:
    q: complex
    sharp: float
    ratio: float


def _local_state(traj: Trajectory, z_target: complex):
    """(w, w') at an off-ray point by integrating straight from the nearest checkpoint."""
    i = int(np.argmin(np.abs(traj.z - z_target) + 1e9 * traj.in_guard(traj.t)))
    za = traj.z[i]
    seg = z_target - za
    L = abs(seg)
    if L == 0:
        return traj.w[i], traj.wp[i]
    d = seg / L
    rhs = _rhs(d, traj.forcing, za)
    s = solve_ivp(
        rhs, (0.0, L), np.array([traj.w[i], traj.wp[i]]), method="DOP853", rtol=traj.tol, atol=traj.tol
    )
    if s.status != 0:
        return np.nan, np.nan
    return s.y[0, -1], s.y[1, -1]


def zero_sphericality_probe(
    traj: Trajectory, r_range: Optional[tuple[float, float]] = None, max_offset: float = 0.5
) -> list[ZeroSample]:
    """Zeros of w on or next to the ray, with w^#(q) = |w'(q)| and its ratio to |q|^(3/4).

    Candidates are local minima of the Newton distance |w/w'| along the
    checkpoints; each is polished by Newton iteration with off-ray values
    obtained from short local integrations.  Zeros farther than
    ``max_offset * |q|^(-1/4)`` from the ray are ignored.
    """
    ok = ~traj.in_guard(traj.t)
    with np.errstate(divide="ignore", invalid="ignore"):
        dist = np.abs(traj.w / traj.wp)
    dist = np.where(ok, dist, np.inf)
    idx = [
        i
        for i in range(1, dist.size - 1)
        if dist[i] <= dist[i - 1] and dist[i] < dist[i + 1]
        and dist[i] < max_offset * max(abs(traj.z[i]), 1.0) ** -0.25
    ]
    found: list[complex] = []
    out: list[ZeroSample] = []
    for i in idx:
        q = traj.z[i] - traj.w[i] / traj.wp[i]
        w, wp = traj.w[i], traj.wp[i]
        converged = False
        for _ in range(30):
            w, wp = _local_state(traj, q)
            if not np.isfinite(w):
                break
            step = w / wp
            q = q - step
            if abs(step) < 1e-13 * max(1.0, abs(q)):
                w, wp = _local_state(traj, q)
                converged = True
                break
        if not converged:
            continue
        off = abs(((q - traj.origin) * np.conj(traj.direction)).imag)
        if off > max_offset * max(abs(q), 1.0) ** -0.25:
            continue
        if any(abs(q - f) < 1e-8 * max(1.0, abs(q)) for f in found):
            continue
        if r_range is not None and not (r_range[0] <= abs(q) <= r_range[1]):
            continue
        found.append(q)
        sharp = abs(wp) / (1.0 + abs(w) ** 2)
        out.append(ZeroSample(complex(q), float(sharp), float(sharp / abs(q) ** 0.75)))
    out.sort(key=lambda s: (abs(s.q), math.atan2(s.q.imag, s.q.real)))
    return out


# ---------------------------------------------------------------- batches

def preset_initial_data(z0: complex = 0j) -> list[PInitialData]:
    """Initial values and slopes from {0, +-1, +-i} at ``z0``."""
    vals = [0, 1, -1, 1j, -1j]
    return [PInitialData(z0, a, b) for a in vals for b in vals]


def pole_field(
    init: PInitialData,
    angles: Sequence[float],
    r_max: float,
    tol: float = 1e-10,
    **kw,
) -> tuple[list[Trajectory], list[complex]]:
    """Fan of rays from ``init.z0``; poles from adjacent rays are merged.

    Each ray is started with the same (w, w') at z0, so the rays trace the
    same solution.  Duplicate poles (closer than half the restart offset)
    are merged.
    """
    trajs = []
    poles: list[complex] = []
    for th in angles:
        d = complex(math.cos(th), math.sin(th))
        dinit = PInitialData(init.z0, init.w0, init.w0p)
        tr = integrate_ray(dinit, d, r_max, tol, **kw)
        trajs.append(tr)
        for rec in tr.poles:
            delta = 0.05 * max(abs(rec.p), 1.0) ** -0.25
            if all(abs(rec.p - q) >= delta / 2 for q in poles):
                poles.append(rec.p)
    poles.sort(key=lambda p: (abs(p), math.atan2(p.imag, p.real)))
    return trajs, poles
