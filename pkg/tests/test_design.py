import pytest

from softexo import design as ds
from softexo.geometry import SSAA, UCAA, calibrated_config, inflated_volume
from softexo.errors import ConfigError

CFG = calibrated_config()


def test_ucaa_has_zero_margin_by_construction():
    c = ds.DesignConstraints()
    assert ds.moment_capacity(UCAA, c.k_eff, 90, c.x_floor) == pytest.approx(9.7, rel=1e-12)
    assert c.k_eff == pytest.approx(287.407, abs=1e-3)


def test_ssaa_capacity_frozen():
    c = ds.DesignConstraints()
    assert ds.moment_capacity(SSAA, c.k_eff, 90, c.x_floor) == pytest.approx(9.548, abs=1e-3)


def test_retention_target_makes_ssaa_feasible():
    c = ds.DesignConstraints(m_target=0.942 * 9.7)
    rep = ds.evaluate_design(SSAA, c)
    assert rep.feasible and rep.torque_margin == pytest.approx(0.411, abs=1e-3)
    opt = ds.optimize_spindle(c)
    assert opt.feasible
    assert opt.volume <= inflated_volume(SSAA, CFG)
    assert opt.profile.w1 == opt.profile.w3 == 50


def test_optimum_dominates_explored_feasible_points():
    c = ds.DesignConstraints(m_target=9.0, w1_bounds=(40, 90), w3_bounds=(40, 90),
                             w_min_end=40)
    opt = ds.optimize_spindle(c)
    feas = [e for e in opt.explored if e["feasible"]]
    assert feas and all(opt.volume <= e["volume"] + 1e-12 for e in feas)


def test_degenerate_bounds_give_uniform_profile():
    c = ds.DesignConstraints(w_min_end=90)
    opt = ds.optimize_spindle(c)
    assert opt.feasible
    assert (opt.profile.w1, opt.profile.w2, opt.profile.w3) == (90, 90, 90)


def test_infeasible_box_reports_without_raising():
    c = ds.DesignConstraints(m_target=50)
    opt = ds.optimize_spindle(c)
    assert not opt.feasible and opt.profile is None
    assert opt.to_dict()["volume_ml"] is None


def test_extrapolative_flag():
    assert ds.DesignConstraints(w2_fixed=None).extrapolative
    assert not ds.DesignConstraints().extrapolative


def test_width_demand_monotone_and_clamped():
    c = ds.DesignConstraints()
    d = ds.required_width_profile(c, (162, 192))
    xs = [0, 5, 10, 50, 100, 200, 400]
    ws = [d(x) for x in xs]
    assert ws == sorted(ws, reverse=True)
    assert ws[0] == 90 and ws[-1] >= c.w_min_end
    assert d(d.plateau_end) == pytest.approx(90)
    assert d(d.floor_start + 1) == c.w_min_end
    with pytest.raises(ds.InfeasibleError):
        ds.required_width_profile(ds.DesignConstraints(m_target=500), (162, 192))


def test_constraint_mapping():
    c = ds.constraints_from_mapping({"m_target_nm": 9.0, "w1_bounds_mm": [90, 40]})
    assert c.w1_bounds == (40.0, 90.0)
    with pytest.raises(ConfigError):
        ds.constraints_from_mapping({"target": 9})
