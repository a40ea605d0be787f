import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from yosida import build
from yosida.io import (
    ChecksumError,
    FormatError,
    PointSetCache,
    csv_text,
    decode_region,
    encode_region,
    json_text,
    parse_pointset,
    parse_trajectory,
    pointset_text,
    read_pointset,
    trajectory_text,
)
from yosida.locate import AnnulusSector, Disc, Rect, locate_in_region
from yosida.painleve import PInitialData, integrate_ray

finite = st.floats(-1e6, 1e6, allow_nan=False)
positive = st.floats(1e-3, 1e6, allow_nan=False)


@pytest.fixture(scope="module")
def pointset():
    return locate_in_region(build("weierstrass"), Disc(0j, 6.0))


@given(finite, finite, positive)
def test_disc_encoding_roundtrip(x, y, r):
    d = Disc(complex(x, y), r)
    assert decode_region(encode_region(d)) == d


@given(finite, finite, positive, positive)
def test_rect_encoding_roundtrip(x, y, a, b):
    r = Rect(complex(x, y), a, b)
    assert decode_region(encode_region(r)) == r


def test_annulus_encoding_and_garbage():
    a = AnnulusSector(1.5, 4.0, 0.1, 2.0, 1 + 1j)
    assert decode_region(encode_region(a)) == a
    with pytest.raises(FormatError):
        decode_region("hexagon 1 2 3")


def test_pointset_roundtrip_is_byte_identical(pointset):
    text = pointset_text(pointset)
    back = parse_pointset(text)
    assert pointset_text(back) == text
    assert [p.position for p in back.points] == [p.position for p in pointset.points]
    assert [p.multiplicity for p in back.points] == [p.multiplicity for p in pointset.points]


def test_pointset_damage_detected(pointset):
    text = pointset_text(pointset)
    lines = text.splitlines()
    i = next(k for k, ln in enumerate(lines) if not ln.startswith("#"))
    lines[i] = lines[i].replace("pole", "zero", 1)
    with pytest.raises(ChecksumError):
        parse_pointset("\n".join(lines) + "\n")
    with pytest.raises(FormatError):
        parse_pointset("# something else\n")


def test_cache_recomputes_damaged_entry(tmp_path, pointset):
    cache = PointSetCache(tmp_path)
    key = cache.key("weierstrass", pointset.region, pointset.tol)
    calls = []

    def compute():
        calls.append(1)
        return pointset

    _, hit = cache.fetch(key, compute)
    assert not hit
    _, hit = cache.fetch(key, compute)
    assert hit and len(calls) == 1
    path = cache.path(key)
    path.write_text(path.read_text().replace("0", "1", 5))
    ps, hit = cache.fetch(key, compute)
    assert not hit and len(calls) == 2
    assert pointset_text(read_pointset(path)) == pointset_text(ps)


def test_cache_key_separates_inputs():
    k = PointSetCache.key
    d = Disc(0j, 5.0)
    keys = {k("weierstrass", d, 1e-9), k("exp", d, 1e-9), k("weierstrass", d, 1e-8), k("weierstrass", d, 1e-9, 1)}
    assert len(keys) == 4


def test_trajectory_roundtrip():
    traj = integrate_ray(PInitialData(0j, 0j, 0j), 1.0, 8.5, 1e-9)
    text = trajectory_text(traj)
    back = parse_trajectory(text)
    assert trajectory_text(back) == text
    assert np.array_equal(back.w, traj.w)
    assert [p.p for p in back.poles] == [p.p for p in traj.poles]
    with pytest.raises(ChecksumError):
        parse_trajectory(text.replace("checkpoint 0", "checkpoint 1", 1))


def test_reports_are_deterministic_and_json_ready():
    payload = {"z": 1 + 2j, "x": np.float64(0.5), "bad": math.nan, "arr": np.arange(3)}
    a = json_text(payload, "test/v1")
    assert a == json_text(payload, "test/v1")
    data = json.loads(a)
    assert data["z"] == [1.0, 2.0] and data["bad"] is None and data["arr"] == [0, 1, 2]
    c = csv_text(["r", "v"], [(1.0, 2.0), (3.0, 4.5)], "test/v1")
    assert c.splitlines()[0].startswith("#") and c == csv_text(["r", "v"], [(1.0, 2.0), (3.0, 4.5)], "test/v1")
