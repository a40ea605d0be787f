import math

import numpy as np
import pytest
from scipy.special import gamma

from yosida import catalog
from yosida.catalog import (
    CapabilityError,
    derivative_map,
    product_map,
    rational_from_roots,
    rational_map,
    reciprocal_map,
    transform_power,
)
from yosida.elliptic import DegenerateLatticeError, Lattice, lemniscatic_lattice
from yosida.sphere import ScalingParams


def _eisenstein_g2_brute(n=400):
    # 60 * sum' w^-4 over w = pi(m + i k), |m|,|k| <= n; tail of the square shells is O(n^-2)
    m = np.arange(-n, n + 1)
    M, K = np.meshgrid(m, m)
    w = math.pi * (M + 1j * K)
    w = w[(M != 0) | (K != 0)]
    return 60 * np.sum(w**-4.0)


def test_g2_matches_eisenstein_sum():
    lat = lemniscatic_lattice()
    closed = 60 / math.pi**4 * gamma(0.25) ** 8 / (960 * math.pi**2)
    a, b = _eisenstein_g2_brute(200), _eisenstein_g2_brute(400)
    richardson = b + (b - a) / 3  # O(n^-2) tail
    assert abs(richardson - closed) < 1e-8
    assert lat.g2.real == pytest.approx(closed, rel=1e-13)
    assert abs(lat.g3) < 1e-12


def test_half_period_values(wp):
    g2 = lemniscatic_lattice().g2.real
    hp = np.array([math.pi / 2, 1j * math.pi / 2, (1 + 1j) * math.pi / 2])
    v = wp(hp)
    assert v[0] == pytest.approx(math.sqrt(g2) / 2, rel=1e-12)
    assert v[1] == pytest.approx(-math.sqrt(g2) / 2, rel=1e-12)
    assert abs(v[2]) < 1e-12


def test_wp_even_and_differential_equation(wp, rng):
    z = rng.uniform(-10, 10, 200) + 1j * rng.uniform(-10, 10, 200)
    assert np.allclose(wp(-z), wp(z), rtol=1e-11)
    j = wp.evaluate(z)
    lat = lemniscatic_lattice()
    p, dp = wp(z), wp.log_derivative(z) * wp(z)
    lhs = dp**2
    rhs = 4 * p**3 - lat.g2 * p - lat.g3
    assert np.max(np.abs(lhs - rhs) / np.abs(rhs)) < 1e-8
    assert not np.any(np.isnan(j.g0))


def test_degenerate_lattice_rejected():
    with pytest.raises(DegenerateLatticeError):
        Lattice(1.0, 2.0)


def test_log_derivative_matches_jets(rng):
    names = ["weierstrass", "weierstrass_prime", "exp", "tan", "mobius"]
    for name in names:
        f = catalog.build(name)
        z = rng.uniform(-6, 6, 1000) + 1j * rng.uniform(-6, 6, 1000)
        try:
            sp = np.array([p.position for p in f.points(20.0)])
        except CapabilityError:
            sp = np.zeros(0)
        if sp.size:
            z = z[np.min(np.abs(z[:, None] - sp[None, :]), axis=1) > 0.1]
        if not f.has_exact_log_derivative:
            continue
        jr = f.evaluate(z).log_derivative()
        ex = f.log_derivative(z)
        assert np.max(np.abs(jr - ex) / np.abs(ex)) < 1e-9, name


def test_rational_points():
    f = rational_map([1, -1], [1, 1])
    pts = f.points(10)
    assert {(p.kind, round(p.position.real, 12), p.multiplicity) for p in pts} == {("zero", 1.0, 1), ("pole", -1.0, 1)}
    g = rational_map([1], [1, 0, 0])
    assert [(p.kind, p.multiplicity) for p in g.points(1)] == [("pole", 2)]


def test_transform_power_classes(wp):
    assert transform_power(wp, 0, 1) is wp
    assert transform_power(wp, 0, 2).claimed == ScalingParams(0.0, 1.0)
    assert transform_power(wp, -1, 2).claimed == ScalingParams(-1.0, 1.0)


def test_transform_power_composition_metadata(wp):
    # z^a2 (z^b2)^a1 f(z^(b1 b2)) = single transform with a = a2 + b2 a1, b = b1 b2
    for a1, b1, a2, b2 in [(1, 2, 0, 3), (-1, 1, 2, 2), (0, 3, -2, 2)]:
        two = transform_power(transform_power(wp, a1, b1), a2, b2)
        one = transform_power(wp, a2 + b2 * a1, b1 * b2)
        assert two.claimed == one.claimed


def test_transform_power_values(wp, rng):
    f = transform_power(wp, 1, 2)
    z = rng.uniform(-2, 2, 50) + 1j * rng.uniform(-2, 2, 50)
    assert np.allclose(f(z), z * wp(z**2), rtol=1e-10)


def test_reciprocal_product_derivative(wp, rng):
    z = rng.uniform(-3, 3, 100) + 1j * rng.uniform(-3, 3, 100)
    rr = reciprocal_map(reciprocal_map(wp))
    assert np.allclose(rr(z), wp(z), rtol=1e-13)
    assert product_map(wp, wp).claimed == ScalingParams(0.0, 0.0)
    pw = catalog.build("weierstrass", None)
    painleve_like = derivative_map(rational_from_roots([1.0], [2.0]))
    assert painleve_like.claimed is None
    from dataclasses import replace

    assert derivative_map(replace(pw, claimed=ScalingParams(0.5, 0.25))).claimed == ScalingParams(0.75, 0.25)


def test_bank_kaufman_points(bk):
    poles = {complex(round(p.position.real, 6), round(p.position.imag, 6)) for p in bk.points(100, "pole")}
    zeros = sorted(round(p.position.real, 3) for p in bk.points(100, "zero"))
    s = round(math.sinh(math.pi), 6)
    assert poles == {0j, complex(0, s), complex(0, -s)}
    assert zeros == [-55.663, -2.509, 2.509, 55.663]
    assert bk.jet(0).reciprocal and abs(bk.jet(0).f0) < 1e-300 + 1e-12


def test_bank_kaufman_composition(bk, wp, rng):
    z = rng.uniform(-1.2, 1.2, 200) + 1j * rng.uniform(-1.2, 1.2, 200)
    lat_pts = lemniscatic_lattice().points(10.0)
    z = z[np.min(np.abs(z[:, None] - lat_pts[None, :]), axis=1) > 0.2]
    a, b = bk(np.sin(z)), wp(z)
    assert np.max(np.abs(a - b) / np.maximum(1, np.abs(b))) < 1e-8


def test_elementary_controls():
    exp_f, tan_f = catalog.elementary_controls()
    x = np.linspace(-5, 5, 101)
    s = exp_f.sharp(x)
    assert np.allclose(s, np.exp(x) / (1 + np.exp(2 * x)), rtol=1e-13)
    assert np.max(s) <= 0.5 + 1e-15
    assert np.allclose(tan_f.sharp(x + 0j), 1.0, rtol=1e-12)
    assert np.max(np.abs(exp_f(-np.arange(10, 40) + 0.3j))) < 1e-4


def test_manifest_build_and_errors():
    man = catalog.load_manifest()
    assert {"weierstrass", "bank_kaufman", "exp", "tan"} <= set(man)
    with pytest.raises(KeyError):
        catalog.build("nope")
    bad = catalog.load_manifest("[w]\nconstructor = weierstrass_p\ncolour = red\n")
    with pytest.raises(ValueError):
        catalog.build("w", bad)


def test_shift_map_near_poles(wp):
    from yosida.catalog import shift_map

    c = 0.7 - 0.2j
    g = shift_map(wp, c)
    z = np.array([1e-3 + 2e-3j, 0.05, 0.3 + 0.1j, math.pi + 0.01j, 1.3 + 0.9j])
    assert np.allclose(g(z), wp(z) - c, rtol=1e-13)
    direct = wp.evaluate(z)
    fz = wp(z)
    assert np.allclose(g.evaluate(z).log_derivative(), direct.log_derivative() * fz / (fz - c), rtol=1e-12)


def test_recentre_map_points(wp):
    from yosida.catalog import recentre_map

    g = recentre_map(wp, 1 / 3)
    assert np.allclose(g(np.array([0.1, 1j])), wp(np.array([0.1 + 1 / 3, 1j + 1 / 3])))
    assert all(abs(wp(np.array([p.position + 1 / 3]))[0]) in (0.0, np.inf) or p.kind == "zero" for p in g.points(5))
    assert min(abs(p.position + 1 / 3) for p in g.points(5, "pole")) < 1e-15
