import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softexo import biomech as bm
from softexo.errors import ConfigError, DataError, DomainError

ARM = bm.anthropometric_arm(65.4, 166.9)


def test_reference_subject_frozen():
    assert ARM.arm_mass == pytest.approx(3.27)
    assert ARM.arm_length == pytest.approx(0.554108, abs=1e-6)
    # m g (com fraction) L at 90 deg
    assert bm.gravity_torque(ARM, 90) == pytest.approx(3.27 * 9.81 * 0.53 * 0.554108, rel=1e-5)
    assert bm.gravity_torque(ARM, 90) == pytest.approx(9.4208, abs=1e-4)


def test_load_adds_moment():
    loaded = bm.anthropometric_arm(65.4, 166.9, bm.LOAD_PRESETS_KG["loaded"])
    extra = bm.gravity_torque(loaded, 90) - bm.gravity_torque(ARM, 90)
    assert extra == pytest.approx(1.56 * 9.81 * loaded.load_lever)


def test_gravity_zero_at_rest_and_bounds():
    assert bm.gravity_torque(ARM, 0) == 0
    with pytest.raises(DomainError):
        bm.gravity_torque(ARM, 190)
    with pytest.raises(ConfigError):
        bm.anthropometric_arm(70, 170, coeffs={"bogus": 1})


def test_protocol_shape():
    assert bm.PROTOCOL_DURATION == 18
    assert [bm.protocol_trajectory(t) for t in (0, 5, 7, 9, 12, 16, 18)] == \
        [0, 0, 45, 90, 90, 45, 0]
    s = bm.protocol_schedule(80)
    assert (s(4.99), s(5.0), s(13.99), s(14.0)) == (0, 80, 80, 0)


def test_schedule_validation(tmp_path):
    with pytest.raises(DataError):
        bm.PressureSchedule((0, 0), (1, 2))
    f = tmp_path / "s.csv"
    f.write_text("t_s,pressure_kpa\n0,0\n1,50\n")
    s = bm.PressureSchedule.read_csv(f)
    assert s(1.5) == 50
    f.write_text("time,p\n0,0\n")
    with pytest.raises(DataError):
        bm.PressureSchedule.read_csv(f)


def test_surface_bilinear_exact_on_bilinear_data():
    ang = np.array([0.0, 90.0, 180.0])
    pre = np.array([0.0, 50.0, 100.0])
    m = np.add.outer(0.01 * ang, 0.02 * pre) + 1e-4 * np.outer(ang, pre)
    s = bm.MomentSurface(ang, pre, m)
    for a, p in ((10, 20), (135, 75), (90, 50), (180, 100)):
        assert s(a, p) == pytest.approx(0.01 * a + 0.02 * p + 1e-4 * a * p)


def test_surface_domain_and_clamp():
    s = bm.synthetic_surface()
    assert s(90, 90) == pytest.approx(9.7)
    with pytest.raises(DomainError):
        s(90, 120)
    assert s(90, 120, clamp=True) == pytest.approx(9.7)


def test_surface_csv_roundtrip(tmp_path):
    s = bm.synthetic_surface()
    f = tmp_path / "s.csv"
    s.write_csv(f)
    r = bm.MomentSurface.read_csv(f)
    np.testing.assert_allclose(r.moments, s.moments, rtol=1e-11)
    f.write_text("angle_deg,pressure_kpa,moment_nm\n0,0,1\n0,10,1\n10,0,1\n")
    with pytest.raises(DataError):
        bm.MomentSurface.read_csv(f)


def test_bundled_surface_is_labelled_synthetic():
    s = bm.bundled_surface()
    assert s.provenance == "synthetic"
    np.testing.assert_allclose(s.moments, bm.synthetic_surface().moments, rtol=1e-11)


def test_assistance_profile():
    out = bm.assistance_profile(ARM, bm.bundled_surface(), bm.protocol_schedule(80), dt=0.5)
    assert out[0].assist_fraction is None
    hold = [s for s in out if 9 <= s.t < 14]
    assert all(s.m_actuator == pytest.approx(9.7 * 80 / 90) for s in hold)
    assert all(s.residual >= 0 for s in out)


def test_assistance_flags_clamped_queries():
    with pytest.warns(UserWarning):
        out = bm.assistance_profile(ARM, bm.bundled_surface(), bm.protocol_schedule(120), dt=1)
    assert any(s.clamped for s in out)
    with pytest.raises(DomainError):
        bm.assistance_profile(ARM, bm.bundled_surface(), bm.protocol_schedule(120), dt=1,
                              clamp=False)


@settings(max_examples=100, deadline=None)
@given(mass=st.floats(30, 150), height=st.floats(120, 210), theta=st.floats(0, 180))
def test_gravity_torque_bounded_by_horizontal(mass, height, theta):
    a = bm.anthropometric_arm(mass, height)
    g = bm.gravity_torque(a, theta)
    assert 0 <= g <= bm.gravity_torque(a, 90) + 1e-12
    assert g == pytest.approx(bm.gravity_torque(a, 90) * math.sin(math.radians(theta)),
                              abs=1e-12)
