import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softexo import pneumatics as pn
from softexo.errors import DomainError, IntegrationError


def test_orifice_choked_and_subsonic():
    # choked: independent of downstream pressure
    q1 = pn.orifice_flow(300, 100, 1.0, 0.5, 293.15)
    q2 = pn.orifice_flow(300, 150, 1.0, 0.5, 293.15)
    assert q1 == q2 == pytest.approx(3.0)
    # subsonic: elliptic law, zero at equal pressure
    assert pn.orifice_flow(200, 150, 1.0, 0.5, 293.15) == pytest.approx(2.0 * math.sqrt(0.75))
    assert pn.orifice_flow(200, 200, 1.0) == 0.0
    with pytest.raises(DomainError):
        pn.orifice_flow(100, 200, 1.0)


@settings(max_examples=200, deadline=None)
@given(p_up=st.floats(10, 1000), r=st.floats(0, 1), b=st.floats(0.05, 0.95))
def test_orifice_flow_bounded_and_monotone(p_up, r, b):
    q = pn.orifice_flow(p_up, r * p_up, 1.0, b, 293.15)
    assert 0 <= q <= p_up / 100 + 1e-12
    q_lower = pn.orifice_flow(p_up, max(r - 0.01, 0) * p_up, 1.0, b, 293.15)
    assert q_lower >= q - 1e-12


def test_reference_circuit_calibration():
    c = pn.reference_circuit()
    assert c.v_act == 714.0
    assert c.c_fill == pytest.approx(0.5315972276116581, rel=1e-12)


def test_step_times_frozen():
    c = pn.reference_circuit()
    u = pn.step_response(replace(c, v_act=555.0), 90.0)
    s = pn.step_response(replace(c, v_act=357.0), 90.0)
    assert u.rise_time_10_90 == pytest.approx(0.5111, abs=2e-3)
    assert u.fall_time_90_10 == pytest.approx(0.6219, abs=2e-3)
    assert s.fall_time_90_10 / u.fall_time_90_10 == pytest.approx(357 / 555, rel=5e-3)
    assert u.settled and s.settled


def test_time_scales_with_volume_over_conductance():
    c = replace(pn.reference_circuit(), v_act=400.0)
    a = pn.step_response(c, 60.0, check_convergence=False)
    b = pn.step_response(replace(c.scaled(2.0), v_act=800.0), 60.0, check_convergence=False)
    assert b.rise_time_10_90 == pytest.approx(a.rise_time_10_90, rel=1e-6)


def test_zero_reference_is_degenerate():
    r = pn.step_response(pn.reference_circuit(), 0.0)
    assert r.degenerate and r.rise_time_10_90 is None and not r.p.any()


def test_step_rejects_bad_inputs():
    c = pn.reference_circuit()
    with pytest.raises(DomainError):
        pn.step_response(c, 200.0)
    with pytest.raises(IntegrationError):
        pn.step_response(c, 90.0, dt=0.5)


def test_pressure_never_overshoots_setpoint():
    c = replace(pn.reference_circuit(), v_act=50.0)
    r = pn.step_response(c, 40.0, duration=2.0, dt=2e-4, check_convergence=False)
    assert r.p.max() <= 40.0 + 1e-9 and r.p.min() >= -1e-9


def test_closed_tank_equalises():
    c = replace(pn.reference_circuit(), closed_tank=True, v_tank=0.5, v_act=500.0,
                p_supply=100.0)
    t, p, pt = pn.simulate(c, lambda s: 100.0, 20.0, 1e-3)
    # equal volumes end at the mean gauge pressure, tank never below actuator
    assert p[-1] == pytest.approx(50.0, abs=0.5)
    assert np.all(pt >= p - 1e-9)


def test_cutoff_interpolation():
    resp = [(0.1, -0.5), (1.0, -2.0), (10.0, -6.0)]
    # log-linear between 1 and 10 Hz: -3 dB a quarter of a decade up
    assert pn.cutoff_minus3db(resp) == pytest.approx(10 ** 0.25)
    assert pn.cutoff_minus3db([(0.1, -1.0), (2.0, -3.0), (5.0, -9.0)]) == 2.0
    with pytest.raises(DomainError):
        pn.cutoff_minus3db([(0.1, -0.1), (1.0, -1.0)])


def test_cutoff_consistent_with_sweep():
    c = pn.reference_circuit()
    fc = pn.find_cutoff(c, 20.0, 10.0)
    assert fc == pytest.approx(1.06, rel=2e-3)
    resp = pn.frequency_response(c, 20.0, 10.0, [0.5 * fc, fc, 2 * fc])
    assert resp[1][1] == pytest.approx(-3.0, abs=0.02)
    assert resp[0][1] > -3.0 > resp[2][1]


def test_circuit_mapping_rejects_unknown_keys():
    with pytest.raises(Exception):
        pn.circuit_from_mapping({"v_act_ml": 100, "colour": 1})
