import math

import pytest
from hypothesis import given, settings, strategies as st

from softexo import geometry as geo
from softexo.errors import ConfigError, DomainError, GeometryError


def test_fill_factor_reproduces_reference_volume():
    cfg = geo.calibrated_config()
    assert geo.inflated_volume(geo.UCAA, cfg) == pytest.approx(555.0, rel=1e-12)


def test_uniform_volume_closed_form():
    # tube of radius (w - 2 ws)/pi over length L
    p = geo.SpindleProfile(lu=100, lp=50, w1=60, w2=60, w3=60)
    r = (60 - 15) / math.pi
    expect = math.pi * r * r * 150 * 1e-3
    assert geo.inflated_volume(p) == pytest.approx(expect, rel=1e-12)


def test_frozen_ssaa_volume():
    v = geo.inflated_volume(geo.SSAA, geo.calibrated_config())
    assert v == pytest.approx(333.613182674, rel=1e-9)
    assert geo.volume_reduction(555.0, v) == pytest.approx(39.8895, abs=1e-3)


def test_numeric_matches_frustum():
    cfg = geo.VolumeModelConfig(0.9, 0.25)
    a = geo.inflated_volume(geo.SSAA, cfg, "frustum")
    b = geo.inflated_volume(geo.SSAA, cfg, "numeric")
    assert b == pytest.approx(a, rel=1e-4)


def test_width_at_vertices():
    assert geo.width_at(geo.SSAA, 0) == 52
    assert geo.width_at(geo.SSAA, 162) == 90
    assert geo.width_at(geo.SSAA, 354) == pytest.approx(56.5)
    with pytest.raises(DomainError):
        geo.width_at(geo.SSAA, 400)


def test_profile_validation():
    with pytest.raises(GeometryError):
        geo.SpindleProfile(lu=10, lp=10, w1=100, w2=90, w3=50)
    with pytest.raises(GeometryError):
        geo.inflated_volume(geo.SpindleProfile(lu=10, lp=10, w1=15, w2=90, w3=50))


def test_pouch_geometry_rejects_overlapping_caps():
    with pytest.raises(GeometryError):
        geo.PouchGeometry(l4=118, l5=88, ld=60)


def test_profile_mapping_roundtrip(tmp_path):
    m = geo.profile_to_mapping(geo.SSAA)
    assert geo.profile_from_mapping(m) == geo.SSAA
    f = tmp_path / "p.json"
    import json
    f.write_text(json.dumps(m))
    assert geo.load_profile(str(f)) == geo.SSAA
    with pytest.raises(ConfigError):
        geo.profile_from_mapping({**m, "colour": "red"})
    with pytest.raises(ConfigError):
        geo.load_profile("nope")


@settings(max_examples=200, deadline=None)
@given(w1=st.floats(20, 90), w3=st.floats(20, 90), shrink=st.floats(0.1, 5))
def test_narrowing_ends_never_adds_volume(w1, w3, shrink):
    p = geo.SpindleProfile(lu=162, lp=192, w1=w1, w2=90, w3=w3)
    q = p.replace(w1=max(w1 - shrink, 16), w3=max(w3 - shrink, 16))
    assert geo.inflated_volume(q) <= geo.inflated_volume(p) + 1e-12


@settings(max_examples=100, deadline=None)
@given(k=st.floats(0.01, 1.0))
def test_volume_linear_in_fill_factor(k):
    base = geo.inflated_volume(geo.SSAA, geo.VolumeModelConfig(1.0))
    assert geo.inflated_volume(geo.SSAA, geo.VolumeModelConfig(k)) == pytest.approx(k * base,
                                                                                    rel=1e-12)
