import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yosida import catalog
from yosida.catalog import rational_from_roots, rational_map, recentre_map
from yosida.expansion import (
    ExpansionConfig,
    MultiplicityError,
    ProximityError,
    convergence_report,
    fit_exponential_factor,
    hadamard_log,
    hadamard_product,
    mittag_leffler_logderiv,
    prime_factor,
    residue_at,
    simple_pole_expansion,
    symmetric_power_sum,
    taylor_logderiv,
)
from yosida.locate import Disc, locate_in_region

MOB = rational_map([1, -1], [1, 1])
ZT = np.array([0.3 + 0.4j, -2.5 + 1j, 4.0 - 3.0j, 1.7j, -0.9])


@pytest.fixture(scope="module")
def wp_recentred():
    # exact lattice data; locate is checked against the same oracle elsewhere
    g = recentre_map(catalog.build("weierstrass"), 1 / 3)
    pts = g.points(90.0)
    zeros = [p.position for p in pts if p.kind == "zero" for _ in range(p.multiplicity)]
    poles = [p.position for p in pts if p.kind == "pole" for _ in range(p.multiplicity)]
    return g, zeros, poles


def test_prime_factor_values():
    for g in range(6):
        assert prime_factor(0.0, g) == 1.0
    u = np.array([0.2 + 0.1j, -3.0, 2j])
    assert np.allclose(prime_factor(u, 0), 1 - u)
    assert prime_factor(0.5, 1) == pytest.approx(0.5 * math.exp(0.5)) == pytest.approx(0.82436, abs=1e-5)
    with pytest.raises(ValueError):
        prime_factor(0.5, 21)


def test_mittag_leffler_rational():
    for R in (2.0, 5.0, 100.0):
        ml = mittag_leffler_logderiv([1.0], [-1.0], ExpansionConfig(1, R, (-2.0,)), ZT)
        assert np.allclose(ml, 1 / (ZT - 1) - 1 / (ZT + 1), rtol=1e-14)
    assert mittag_leffler_logderiv([1.0], [-1.0], ExpansionConfig(1, 2.0, (-2.0,)), np.array([0j]))[0] == -2.0


def test_mittag_leffler_rejects_near_points():
    with pytest.raises(ProximityError):
        mittag_leffler_logderiv([1.0], [-1.0], ExpansionConfig(1, 2.0, (-2.0,)), np.array([1.0 + 1e-12]))


def test_taylor_logderiv():
    assert taylor_logderiv(MOB, 1, radius=0.5)[0] == pytest.approx(-2.0, abs=1e-13)
    e = catalog.build("exp")
    c = taylor_logderiv(e, 4, radius=1.0)
    assert c[0] == pytest.approx(1.0, abs=1e-13) and np.max(np.abs(c[1:])) < 1e-13
    f = rational_from_roots([1.0, 2j], [-1.5])
    a, b = taylor_logderiv(f, 3, radius=0.6), taylor_logderiv(f, 3, radius=0.3)
    assert np.max(np.abs(a - b)) < 1e-9


def test_hadamard_rational():
    S, resid = fit_exponential_factor(MOB, [1.0], [-1.0], 0, 2.0)
    assert resid < 1e-12
    assert abs(np.exp(S[0]) - MOB(np.array([0j]))[0]) < 1e-14
    v = hadamard_product([1.0], [-1.0], ExpansionConfig(0, 2.0, S=tuple(S)), ZT)
    assert np.allclose(v, MOB(ZT), rtol=1e-13)
    assert hadamard_product([1.0], [-1.0], ExpansionConfig(0, 2.0, S=tuple(S)), np.array([0j]))[0] == pytest.approx(-1.0)


def test_simple_pole_expansion_rational():
    z = np.array([0.5, 1 + 1j, -3.0, 0j])
    v = simple_pole_expansion([2.0], [1.0], 1, [-0.5], z)
    assert np.allclose(v, 1 / (z - 2), rtol=1e-15)
    assert v[-1] == -0.5


def test_simple_pole_expansion_cotangent_tail():
    # pi cot(pi z) - 1/z: simple poles at the nonzero integers, residues 1, value 0 at 0
    k = np.arange(1, 400)
    poles = np.concatenate([k, -k]).astype(complex)
    z = np.array([0.3 + 0.2j, -0.45 + 0.1j])
    exact = np.pi / np.tan(np.pi * z) - 1 / z
    errs = [np.max(np.abs(simple_pole_expansion(poles, np.ones(poles.size), 1, [0.0], z, R=R) - exact)) for R in (10, 40, 160)]
    assert errs[0] > errs[1] > errs[2]


def test_residues():
    f = rational_from_roots([], [2.0])
    assert residue_at(f, 2.0, radius=0.5) == pytest.approx(1.0, abs=1e-12)
    g = rational_from_roots([], [1 - 1j], scale=3 + 2j)
    assert residue_at(g, 1 - 1j, radius=0.5) == pytest.approx(3 + 2j, abs=1e-12)
    t = catalog.build("tan")
    a, b = residue_at(t, math.pi / 2, radius=0.4), residue_at(t, math.pi / 2, radius=0.2)
    assert a == pytest.approx(-1.0, abs=1e-12) and abs(a - b) < 1e-9
    with pytest.raises(MultiplicityError):
        residue_at(catalog.build("weierstrass"), 0.0, radius=0.5)


def test_wp_reconstruction(wp_recentred):
    g, zeros, poles = wp_recentred
    z = np.array([0.5 + 0.6j, -0.8 + 0.3j, 0.2 - 1.1j, 1.2 + 0.1j])
    rep = convergence_report(g, zeros, poles, 2, list(np.geomspace(10, 80, 8)), z)
    # the cutoff sums converge conditionally, so single steps may go up; the trend may not
    assert rep.ml_slope < 0 and rep.product_slope < 0
    assert rep.ml_max[-1] < 1e-3 and rep.product_max[-1] < 1e-3
    diffs = np.abs(np.diff(rep.symmetric_sums))
    assert diffs[-1] < 1e-2 * diffs[0]
    assert rep.rows()[0][0] == pytest.approx(10.0)


def test_located_points_give_same_sum(wp_recentred):
    g, zeros, poles = wp_recentred
    ps = locate_in_region(g, Disc(0j, 16.0))
    cfg = ExpansionConfig(2, 15.0, tuple(taylor_logderiv(g, 2)))
    z = np.array([0.5 + 0.6j, -0.8 + 0.3j])
    a = mittag_leffler_logderiv(ps.zeros(), ps.poles(), cfg, z)
    b = mittag_leffler_logderiv(zeros, poles, cfg, z)
    assert np.max(np.abs(a - b) / np.abs(b)) < 1e-8


def test_symmetric_sum_rational():
    assert symmetric_power_sum([2.0], [-1.0], 2, 5.0) == pytest.approx((-1.0) ** -2 - 2.0**-2)


_pts = st.lists(st.complex_numbers(min_magnitude=0.5, max_magnitude=4.0), min_size=1, max_size=6)


@settings(max_examples=40, deadline=None)
@given(_pts, _pts, st.complex_numbers(min_magnitude=0.5, max_magnitude=3.0), st.randoms(use_true_random=False))
def test_cancellation_and_permutation(zeros, poles, extra, rnd):
    z = np.array([5.5 + 0.5j, -6.0 - 2j])
    cfg = ExpansionConfig(2, 10.0, (0.3, -0.1))
    base = mittag_leffler_logderiv(zeros, poles, cfg, z)
    with_pair = mittag_leffler_logderiv(zeros + [extra], poles + [extra], cfg, z)
    assert np.array_equal(base, with_pair)
    zs, ps = list(zeros), list(poles)
    rnd.shuffle(zs)
    rnd.shuffle(ps)
    assert np.array_equal(base, mittag_leffler_logderiv(zs, ps, cfg, z))
    hcfg = ExpansionConfig(2, 10.0, S=(0.1,))
    a = hadamard_log(zeros, poles, hcfg, z).value
    b = hadamard_log(zs + [extra], ps + [extra], hcfg, z).value
    assert np.array_equal(a, b)


@settings(max_examples=25, deadline=None)
@given(_pts, _pts, st.complex_numbers(min_magnitude=4.5, max_magnitude=7.0))
def test_product_sum_link(zeros, poles, z0):
    S = (0.2 - 0.1j, 0.3, -0.05j)
    cfg = ExpansionConfig(2, 10.0, S=S)
    h = 1e-5
    d = (hadamard_log(zeros, poles, cfg, np.array([z0 + h])).value - hadamard_log(zeros, poles, cfg, np.array([z0 - h])).value) / (2 * h)
    link = mittag_leffler_logderiv(zeros, poles, ExpansionConfig(2, 10.0), np.array([z0])) + S[1] + 2 * S[2] * z0
    assert abs(d[0] - link[0]) <= 1e-6 * max(abs(link[0]), 1.0)
