import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yosida import catalog
from yosida.catalog import rational_from_roots, reciprocal_map
from yosida.locate import Disc, locate_in_region
from yosida.painleve import PInitialData, integrate_ray, trajectory_map
from yosida.rescale import (
    FamilyMember,
    circle_sampler,
    limit_probe,
    marty_scan,
    modulus_profile,
    predicted_sharp,
    ray_h_samples,
    rescaled_jet,
    sphericalbound_fit,
    unit_grid,
    yosida_criterion,
)
from yosida.sphere import ScalingParams

P00 = ScalingParams(0.0, 0.0)
IDENT = rational_from_roots([0.0])


def test_translation_family(wp, rng):
    h = 7.3 - 2.1j
    z = rng.uniform(-1, 1, 50) + 1j * rng.uniform(-1, 1, 50)
    assert np.allclose(rescaled_jet(wp, P00, h, z).values(), wp(h + z), rtol=1e-13)


def test_painleve_style_scaling(wp, rng):
    prm = ScalingParams(0.5, 0.25)
    h = 40.0 + 9.0j
    z = rng.uniform(-1, 1, 20) + 1j * rng.uniform(-1, 1, 20)
    direct = h**-0.5 * wp(h + h**-0.25 * z)
    assert np.allclose(rescaled_jet(wp, prm, h, z).values(), direct, rtol=1e-12)
    m = FamilyMember("weierstrass", prm, h)
    assert m.value_factor == pytest.approx(h**-0.5) and m.argument_factor == pytest.approx(h**-0.25)
    with pytest.raises(ValueError):
        FamilyMember("weierstrass", prm, 0.5)


_moduli = st.floats(1.001, 1e3)
_angles = st.floats(-math.pi, math.pi)
_alphas = st.floats(-1.5, 1.5)
_betas = st.floats(-1.0, 1.0)


@settings(max_examples=60, deadline=None)
@given(_moduli, _angles, _alphas, _betas, st.complex_numbers(max_magnitude=1.0))
def test_sharp_identity(mod, ang, a, b, z):
    wp = catalog.build("weierstrass")
    prm = ScalingParams(a, b)
    h = mod * complex(math.cos(ang), math.sin(ang))
    s = rescaled_jet(wp, prm, h, z).sharp()
    ref = predicted_sharp(wp, prm, h, z)
    assert abs(s - ref) <= 1e-10 * ref + 1e-300


@settings(max_examples=60, deadline=None)
@given(_moduli, _angles, st.floats(0.0, 1.5), _betas)
def test_sharp_lower_bound_for_nonnegative_alpha(mod, ang, a, b):
    wp = catalog.build("weierstrass")
    h = mod * complex(math.cos(ang), math.sin(ang))
    lhs = rescaled_jet(wp, ScalingParams(a, b), h, 0.0).sharp()
    rhs = mod ** (-a - b) * wp.sharp(np.array([h]))[0]
    assert lhs >= rhs * (1 - 1e-12)


def test_marty_scan_controls(wp):
    hs = ray_h_samples(2.0, 100.0, 6, 4)
    rep = marty_scan(wp, P00, hs)
    assert rep.first_category and rep.sups_bounded and rep.nonconstant
    e = marty_scan(catalog.build("exp"), P00, -np.geomspace(5, 60, 8))
    assert e.sups_bounded and not e.nonconstant and not e.first_category
    assert set(rep.as_dict()) >= {"sups", "diameters", "first_category"}


def test_marty_scan_periodic(wp):
    base = np.array([2.3 + 1.1j, -4.2 + 3.3j])
    shifted = base + math.pi * (3 - 2j)
    a = marty_scan(wp, P00, base)
    b = marty_scan(wp, P00, shifted)
    assert np.allclose(a.sups, b.sups, rtol=1e-9)


def test_unit_grid_density():
    with pytest.raises(ValueError):
        unit_grid(1.0, 8)
    g = unit_grid(1.0, 16)
    assert np.max(np.abs(g)) <= 1.0 + 1e-12 and 0j in g


def test_spherical_bound_identity_function():
    r = np.geomspace(10, 1000, 6)
    fit = sphericalbound_fit(IDENT, ScalingParams(1.0, 0.0), r)
    exact = np.polyfit(np.log(r), -np.log1p(r * r), 1)[0]  # sup of 1/(1+|z|^2) on |z| = r
    assert fit.exponent == pytest.approx(exact, rel=1e-12)
    assert fit.exponent == pytest.approx(-2.0, abs=2e-3)


def test_spherical_bound_wp(wp):
    ps = locate_in_region(wp, Disc(0j, 41.0))
    fit = sphericalbound_fit(wp, P00, np.geomspace(5, 40, 8), ps)
    assert abs(fit.exponent) < 0.1
    assert not fit.flagged


def test_yosida_criterion_members_and_controls(wp):
    radii = np.geomspace(5, 60, 8)
    hs = ray_h_samples(2.0, 100.0, 8, 4, offset=0.3)
    assert yosida_criterion(wp, 0.0, 1.0, hs, radii).passes
    ve = yosida_criterion(catalog.build("exp"), 0.0, 1.0, -np.geomspace(2, 100, 12), radii)
    assert ve.bound_holds and not ve.liminf_positive


def test_yosida_criterion_bank_kaufman(bk):
    hs = ray_h_samples(5.0, 1e4, 8, 4, offset=math.pi / 4)
    v = yosida_criterion(bk, -1.0, 1.0, hs, np.geomspace(5, 1e6, 12), sampler=circle_sampler(0, 4096))
    assert v.passes


def test_limit_probe(wp):
    lattice = math.pi * np.arange(1, 7) * (1 + 1j)
    rep = limit_probe(wp, P00, lattice)
    assert np.max(rep.distances) < 1e-9 and rep.a0_verdict
    gen = limit_probe(wp, P00, (math.pi / 3 + 1e-5) * np.arange(3, 21))
    assert gen.a0_verdict and max(len(b) for b in gen.blocks) >= 2
    e = limit_probe(catalog.build("exp"), P00, -np.arange(20.0, 26.0))
    assert not e.a0_verdict
    with pytest.raises(ValueError):
        limit_probe(wp, P00, [2.0, 3.0])


def test_modulus_profile(wp, rng):
    ps = locate_in_region(wp, Disc(0j, 12.0))
    z = rng.uniform(-8, 8, 4000) + 1j * rng.uniform(-8, 8, 4000)
    prof = modulus_profile(wp, P00, z, ps)
    assert prof.bounded and prof.minimum > 0
    ident = modulus_profile(IDENT, ScalingParams(1.0, 0.0), z[np.abs(z) > 1], None)
    assert ident.minimum == pytest.approx(1.0) and ident.maximum == pytest.approx(1.0)
    inv = modulus_profile(reciprocal_map(wp), P00, z, ps)
    assert inv.maximum == pytest.approx(1 / prof.minimum, rel=1e-12)
    assert inv.minimum == pytest.approx(1 / prof.maximum, rel=1e-12)


def test_painleve_family_bounded():
    traj = integrate_ray(PInitialData(0j, 0j, 0j), 1.0, 60.5, 1e-9)
    w = trajectory_map(traj)
    hs = np.linspace(10.0, 60.0, 12) + 0j
    grid = np.linspace(-0.3, 0.3, 41) + 0j
    rep = marty_scan(w, ScalingParams(0.5, 0.25), hs, grid=grid)
    assert rep.sups_bounded
