import math

import numpy as np
import pytest

from yosida import catalog
from yosida.catalog import rational_from_roots, reciprocal_map, shift_map
from yosida.locate import Disc, LocatedPoint, PointSet, locate_in_region
from yosida.nevanlinna import (
    GROWTH_COLUMNS,
    ahlfors_shimizu_T,
    circle_means,
    counting_N,
    disc_energy,
    doubly_exponential_radii,
    geometric_radii,
    growth_table,
    m_over_fprime,
    order_fit,
    proximity_m,
    schmiegung_sum,
)
from yosida.sphere import ScalingParams

CONST = rational_from_roots([], [], scale=3.0)
IDENT = rational_from_roots([0.0])


def _poles(*ps):
    pts = [LocatedPoint(complex(p), "pole", 1, Disc(complex(p), 0.1)) for p in ps]
    return PointSet("synthetic", Disc(0j, 100.0), 1e-9, pts)


def test_exp_proximity():
    f = catalog.build("exp")
    for r in (2.0, 7.5, 20.0):
        assert proximity_m(f, r).m_f == pytest.approx(r / math.pi, rel=1e-9)


def test_constant_function():
    p = proximity_m(CONST, 4.0)
    assert p.m_f == pytest.approx(math.log(3), rel=1e-12)
    assert p.m_recip == pytest.approx(0.0, abs=1e-14)
    assert schmiegung_sum(CONST, 4.0).value == pytest.approx(math.log(3), rel=1e-12)
    assert ahlfors_shimizu_T(CONST, 4.0) == pytest.approx(0.0, abs=1e-14)
    e = disc_energy(CONST, 5.0, 1.0, ScalingParams(0.0, 0.0))
    assert e.energy == 0.0 and e.sup == 0.0


def test_polynomial_proximity_ratio():
    # 5 (z - 1)(z - 2i)(z + 1.5): m(r, f) = log 5 + 3 log r once r exceeds the roots
    f = rational_from_roots([1.0, 2j, -1.5], scale=5.0)
    ratios = [proximity_m(f, r).m_f / math.log(r) for r in (1e2, 1e4, 1e6)]
    assert abs(ratios[-1] - 3) < abs(ratios[0] - 3)
    assert ratios[-1] == pytest.approx(3.0 + math.log(5) / math.log(1e6), rel=1e-10)


def test_identity_function():
    assert ahlfors_shimizu_T(IDENT, 1.0) == pytest.approx(0.5 * math.log(2), rel=1e-6)
    for r in (0.5, 3.0, 40.0):
        assert ahlfors_shimizu_T(IDENT, r) == pytest.approx(0.5 * math.log1p(r * r), rel=1e-6)
    fm = m_over_fprime(IDENT, 3.0)
    assert fm.m_recip_fprime == pytest.approx(0.0, abs=1e-14)
    assert fm.neg_log_sharp == pytest.approx(math.log(10.0), rel=1e-12)


def test_counting_function():
    assert counting_N(_poles(1.0), 5.0).value == pytest.approx(math.log(5.0))
    e = math.e
    assert counting_N(_poles(e, e * 1j), e * e).value == pytest.approx(2.0)


def test_counting_exact_on_rational():
    zs, ps = [0.5, 2 + 1j, -3j], [1.5j, -2.0]
    f = rational_from_roots(zs, ps)
    located = locate_in_region(f, Disc(0j, 5.0))
    for r in (1.0, 2.5, 4.0):
        ref = sum(math.log(r / abs(p)) for p in ps if abs(p) < r)
        assert counting_N(located, r, kind="pole").value == pytest.approx(ref, abs=1e-12)


def test_schmiegung_identity(wp):
    radii = geometric_radii(3.0, 30.0, 6) + 0.013
    vals, ok = circle_means(wp, radii, ("schmiegung", "m_f", "m_recip"), 1e-9)
    assert np.all(ok)
    assert np.max(np.abs(vals[0] - vals[1] - vals[2])) < 1e-9


def test_wp_counting_constant(wp):
    # N(r, wp) ~ (pi r^2 / area) * double pole / 2 = r^2 / pi for the square lattice of area pi^2
    ps = locate_in_region(wp, Disc(0j, 41.0))
    n = [counting_N(ps, r, kind="pole").value / r**2 for r in (20.0, 30.0, 40.0)]
    assert n[-1] == pytest.approx(1 / math.pi, rel=0.05)


def test_wp_characteristics(wp):
    ps = locate_in_region(wp, Disc(0j, 26.0))
    radii = [5.3, 9.1, 14.7, 19.9, 25.3]
    rows = growth_table(wp, radii, ps, with_T_as=True)
    Tn = np.array([r.T_nev for r in rows])
    Ta = np.array([r.T_as for r in rows])
    N = np.array([r.N_f for r in rows])
    assert np.all(np.diff(Tn) > 0) and np.all(np.diff(Ta) > 0) and np.all(np.diff(N) > 0)
    # T_as - N and T_as - T_nev stay O(log r)
    assert np.max(np.abs(Ta - N) / np.log(radii)) < 3.0
    assert np.max(np.abs(Ta - Tn) / np.log(radii)) < 3.0
    assert list(rows[0].as_dict()) == list(GROWTH_COLUMNS)


def test_first_main_theorem_on_rational():
    f = rational_from_roots([1.0, -2j], [0.5 + 0.5j, 3.0])
    c = 2.0 - 1.0j
    g = reciprocal_map(shift_map(f, c))
    pf = locate_in_region(f, Disc(0j, 41.0))
    pg = locate_in_region(g, Disc(0j, 41.0))
    radii = [2.0, 5.0, 10.0, 20.0, 40.0]
    tf = [r.T_nev for r in growth_table(f, radii, pf, with_T_as=False, with_fprime=False)]
    tg = [r.T_nev for r in growth_table(g, radii, pg, with_T_as=False, with_fprime=False)]
    bound = 2 * math.log(max(abs(c), 1.0)) + 1 + 1e-6
    assert max(abs(a - b) for a, b in zip(tf, tg)) <= bound


def test_wp_log_bounds(wp):
    radii = np.geomspace(5, 40, 6)
    vals, ok = circle_means(wp, radii, ("m_recip_fprime",), 1e-9)
    assert np.all(ok)
    ratio = vals[0] / np.log(radii)
    assert np.max(ratio) < 1.0


def test_disc_energy_monotone_in_eps(wp):
    prm = ScalingParams(0.0, 0.0)
    for h in (3.0 + 1j, 12.0 - 7j):
        a = disc_energy(wp, h, 0.5, prm)
        b = disc_energy(wp, h, 1.0, prm)
        assert b.energy >= a.energy - 1e-9 and b.sup >= a.sup * (1 - 1e-12)
        assert a.energy > 0


def test_order_fit_models():
    r = np.geomspace(2, 200, 9)
    assert order_fit(list(zip(r, r**2.5)), "x", "power").coefficient == pytest.approx(2.5, abs=1e-12)
    fit = order_fit(list(zip(r, 3 * np.log(r) + 1)), "x", "log")
    assert fit.coefficient == pytest.approx(3.0) and fit.intercept == pytest.approx(1.0)
    assert order_fit(list(zip(r, 2 * np.log(r) ** 2)), "x", "log-squared").coefficient == pytest.approx(2.0)
    with pytest.raises(ValueError):
        order_fit(list(zip(r[:4], r[:4])), "x")
    with pytest.raises(ValueError):
        order_fit(list(zip(r, r)), "x", "cubic")


def test_radius_grids():
    assert np.allclose(doubly_exponential_radii(3), np.exp([2.0, 4.0, 8.0]))
    g = geometric_radii(1.0, 100.0, 4)
    assert g.size == 9 and g[0] == 1.0 and g[-1] == pytest.approx(100.0)


def test_small_radius_rejected(wp):
    with pytest.raises(ValueError):
        proximity_m(wp, 0.5)
