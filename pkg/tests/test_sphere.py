import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yosida.sphere import (
    Jet,
    ScalingParams,
    SpherePoint,
    chordal_distance,
    spherical_derivative,
    spherical_diameter,
)

finite = st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False)


def test_chordal_distance_reference_values():
    assert chordal_distance(1, 1) == 0.0
    assert chordal_distance(SpherePoint.of(0), SpherePoint.infinity()) == pytest.approx(1.0, abs=1e-15)
    assert chordal_distance(0, 1) == pytest.approx(1 / math.sqrt(2), abs=1e-15)


def test_distance_to_infinity():
    a = 3 - 4j
    assert chordal_distance(a, SpherePoint.infinity()) == pytest.approx(1 / math.sqrt(1 + 25), rel=1e-14)


def test_spherical_derivative_reference_values():
    assert spherical_derivative(Jet.direct(0, 0, 1)) == pytest.approx(1.0)
    assert spherical_derivative(Jet.direct(1.0, 5.0, 0.0)) == 0.0
    x = 0.7
    t = math.tan(x)
    assert spherical_derivative(Jet.direct(x, t, 1 + t * t)) == pytest.approx(1.0, rel=1e-14)


def test_spherical_diameter_reference_values():
    assert spherical_diameter([1, 1, 1]) == 0.0
    assert spherical_diameter([SpherePoint.of(0), SpherePoint.infinity()]) == pytest.approx(1.0)
    brute = max(chordal_distance(a, b) for a in (0, 1, 1j) for b in (0, 1, 1j))
    assert spherical_diameter([0, 1, 1j]) == pytest.approx(brute) == pytest.approx(1 / math.sqrt(2))


def test_scaling_params_rejects_small_beta():
    with pytest.raises(ValueError):
        ScalingParams(0.0, -1.5)
    assert ScalingParams(0.5, -1.0).beta == -1.0


@given(finite)
def test_reciprocal_point_roundtrip(a):
    p = SpherePoint.of(a)
    assert chordal_distance(p.invert().invert(), p) <= 1e-12


@given(finite, finite, finite)
def test_triangle_inequality(a, b, c):
    assert chordal_distance(a, c) <= chordal_distance(a, b) + chordal_distance(b, c) + 1e-12


@given(finite, finite)
def test_distance_symmetric_and_bounded(a, b):
    d = chordal_distance(a, b)
    assert 0.0 <= d <= 1.0 + 1e-15
    assert d == pytest.approx(chordal_distance(b, a), abs=1e-15)


@settings(max_examples=200)
@given(finite.filter(lambda v: abs(v) > 1e-3 and abs(abs(v) - 1) > 1e-3), finite, finite)
def test_representation_switch_keeps_sharp(f0, f1, f2):
    j = Jet.direct(0.3, f0, f1, f2)
    s = spherical_derivative(j)
    s2 = spherical_derivative(j.switched())
    assert s2 == pytest.approx(s, rel=1e-12, abs=1e-300)


@given(finite.filter(lambda v: 1e-6 < abs(v) < 1e6), st.complex_numbers(max_magnitude=1e3, allow_nan=False))
def test_reciprocal_has_same_sharp(f0, f1):
    # (1/f)' = -f'/f^2, evaluated directly rather than through the flag
    j = Jet.direct(0.0, f0, f1, 0)
    jr = Jet.direct(0.0, 1 / f0, -f1 / f0**2, 0)
    assert spherical_derivative(jr) == pytest.approx(spherical_derivative(j), rel=1e-12, abs=1e-300)
