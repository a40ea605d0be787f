import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yosida import catalog
from yosida.catalog import rational_from_roots, rational_map
from yosida.locate import (
    AnnulusSector,
    Disc,
    LocatedPoint,
    PointSet,
    Rect,
    beta_separation,
    c_point_proximity,
    derivative_condition_check,
    equal_distribution_scan,
    locate_in_region,
    winding_count,
)

WP = catalog.build("weierstrass")


def _pset(zeros=(), poles=()):
    pts = [LocatedPoint(complex(q), "zero", 1, Disc(complex(q), 0.1)) for q in zeros]
    pts += [LocatedPoint(complex(p), "pole", 1, Disc(complex(p), 0.1)) for p in poles]
    return PointSet("synthetic", Disc(0j, 100.0), 1e-9, pts)


def _signature(ps):
    return sorted((p.kind, p.multiplicity, round(p.position.real, 6), round(p.position.imag, 6)) for p in ps.points)


def _oracle(f, radius):
    return sorted((p.kind, p.multiplicity, round(p.position.real, 6), round(p.position.imag, 6)) for p in f.points(radius))


def test_winding_reference_values():
    z = rational_from_roots([0.0])
    assert winding_count(z, Disc(0j, 1.0)) == 1
    f = rational_map([1, -1], [1, 2, 1])
    assert winding_count(f, Disc(0j, 2.0)) == -1


def test_wp_cell_winding_is_zero():
    cell = Rect(complex(0.3, 0.2) + (math.pi + 1j * math.pi) / 2, math.pi / 2, math.pi / 2)
    assert winding_count(WP, cell) == 0


def test_wp_cell_at_origin():
    ps = locate_in_region(WP, Rect(0j, math.pi / 2 - 0.01, math.pi / 2 - 0.01))
    assert [(p.kind, p.multiplicity) for p in ps.points] == [("pole", 2)]
    assert abs(ps.points[0].position) < 1e-9


def test_rational_locate():
    ps = locate_in_region(rational_map([1, -1], [1, 1]), Disc(0j, 3.0))
    assert _signature(ps) == [("pole", 1, -1.0, 0.0), ("zero", 1, 1.0, 0.0)]


def test_wp_completeness():
    ps = locate_in_region(WP, Disc(0j, 12.0))
    assert ps.complete
    assert _signature(ps) == _oracle(WP, 12.0)


def test_bank_kaufman_disc_100():
    bk = catalog.build("bank_kaufman")
    for kw in ({}, {"polar_inner": 1.5}):
        ps = locate_in_region(bk, Disc(0j, 100.0), **kw)
        assert len({p.position for p in ps.poles().points}) == 3
        assert len({p.position for p in ps.zeros().points}) == 4
        assert _signature(ps) == _oracle(bk, 100.0)


def test_annulus_sector_region():
    ps = locate_in_region(WP, AnnulusSector(2.0, 9.0, 0.1, 1.4))
    ref = [p for p in WP.points(9.0) if abs(p.position) > 2.0 and 0.1 < math.atan2(p.position.imag, p.position.real) < 1.4]
    assert len(ps) == len(ref)


def test_jitter_invariance():
    a = locate_in_region(WP, Disc(0j, 10.0), seed=0)
    b = locate_in_region(WP, Disc(0j, 10.0), seed=7)
    assert _signature(a) == _signature(b)


def test_multiplicity_matches_local_order():
    from yosida.locate import local_order

    for p in locate_in_region(WP, Disc(0j, 5.0)).points:
        assert round(local_order(WP, p.position, p.kind, 0.3)) == p.multiplicity


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 0.95), st.booleans(), st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_winding_additivity(s, vertical, cx, cy):
    lo = complex(cx, cy) - (2.0 + 1.5j)
    hi = complex(cx, cy) + (2.0 + 1.5j)
    rect = lambda a, b: Rect(0.5 * (a + b), 0.5 * (b - a).real, 0.5 * (b - a).imag)  # noqa: E731
    if vertical:
        x = lo.real + s * (hi - lo).real
        parts = [rect(lo, complex(x, hi.imag)), rect(complex(x, lo.imag), hi)]
    else:
        y = lo.imag + s * (hi - lo).imag
        parts = [rect(lo, complex(hi.real, y)), rect(complex(lo.real, y), hi)]
    assert winding_count(WP, rect(lo, hi)) == sum(winding_count(WP, r) for r in parts)


def test_beta_separation_synthetic():
    rep = beta_separation(_pset(zeros=[4.0]), _pset(poles=[5.0]), 1.0)
    assert rep.zero_to_pole == pytest.approx(4.0)


def test_beta_separation_bank_kaufman_pair():
    q, p = math.cosh(math.pi / 2), 1j * math.sinh(math.pi)
    rep = beta_separation(_pset(zeros=[q]), _pset(poles=[p]), -1.0)
    assert rep.zero_to_pole == pytest.approx(abs(q - p) / q, rel=1e-12)
    assert rep.zero_to_pole == pytest.approx(4.71, abs=0.01)


def test_equal_distribution_one_point():
    rep = equal_distribution_scan(_pset(zeros=[1.0]), 0.0, [0.5, 2.0])
    assert rep.inconclusive
    assert rep.worst_eta == math.inf
    assert rep.crowd[0.05][1] == 1


def test_derivative_condition_sentinel_and_lattice():
    one = rational_map([1], [1, -2])
    rep = derivative_condition_check(one, 0.0, Disc(0j, 5.0))
    assert rep.pole_separation == math.inf
    rep = derivative_condition_check(WP, 0.0, Disc(0j, 8.0))
    assert rep.pole_separation == pytest.approx(math.pi, rel=1e-8)


def test_c_points_at_critical_value():
    g2 = WP.params and 1.9410171896916126
    c = math.sqrt(g2) / 2
    ps = locate_in_region(WP, Disc(0j, 8.0))
    rep = c_point_proximity(WP, c, ps.zeros(), ps.poles(), 0.0, Disc(0j, 8.0))
    # c-points are the real half periods pi/2 + pi k + i pi l (double)
    half = np.array([math.pi / 2 + math.pi * k + 1j * math.pi * l for k in range(-4, 4) for l in range(-3, 3)])
    d = np.min(np.abs(rep.c_points[:, None] - half[None, :]), axis=1)
    assert np.max(d) < 1e-6
    assert rep.inf_to_poles == pytest.approx(math.pi / 2, rel=1e-6)
