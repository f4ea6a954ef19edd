import math

import pytest
from hypothesis import given, settings, strategies as st

from softexo import haa
from softexo.errors import DomainError
from softexo.geometry import PouchGeometry

A = haa.HaaAssembly()


def test_frozen_reference_torques():
    assert A.l_O1O2 == pytest.approx(88 / math.pi + 7.5)
    assert haa.haa_torque(A, 60, 90) == pytest.approx(38.95, abs=0.01)
    assert haa.haa_torque(A, 120, 90) == pytest.approx(28.68, abs=0.01)
    assert haa.haa_torque(A, 210, 90) == pytest.approx(8.50, abs=0.01)
    assert haa.boundary_angle(A) == pytest.approx(208.29, abs=0.01)


def test_zero_bend_has_zero_height():
    s = haa.bend_kinematics(A, 0)
    assert s.h == 0 and s.l_arm == A.l_O1O2


def test_domain_errors():
    with pytest.raises(DomainError):
        haa.bend_kinematics(A, 360)
    with pytest.raises(DomainError):
        haa.haa_torque(A, 30, 131)
    with pytest.raises(DomainError):
        haa.HaaAssembly(d=-1)


def test_comparison_report_lists_reported_points():
    rows = haa.comparison_report()
    assert [r["beta_deg"] for r in rows] == [60.0, 120.0, 210.0]


def test_table_zero_pressure():
    rows = haa.torque_table(A, 0, 0, 210, 11)
    assert all(r["M_Nm"] == 0 for r in rows)


@settings(max_examples=300, deadline=None)
@given(beta=st.floats(0, 359.999), d=st.floats(0, 30))
def test_pythagorean_identity(beta, d):
    a = haa.HaaAssembly(PouchGeometry(), d)
    s = haa.bend_kinematics(a, beta)
    lhs = s.l_arm ** 2 + (s.h / 2) ** 2
    assert abs(lhs - a.l_O1O2 ** 2) <= 1e-12 * a.l_O1O2 ** 2


@settings(max_examples=200, deadline=None)
@given(beta=st.floats(0, 180), p=st.floats(0, 65), c=st.floats(0, 2))
def test_torque_linear_in_pressure(beta, p, c):
    assert haa.haa_torque(A, beta, c * p) == pytest.approx(c * haa.haa_torque(A, beta, p),
                                                           rel=1e-12, abs=1e-15)
