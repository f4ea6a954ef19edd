import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from softexo.errors import DomainError
from softexo.geometry import PouchGeometry
from softexo.pouch import Regime, contact_area, contact_table, contact_widths, pouch_force

REF = PouchGeometry()


def mc_union_area(w4, w5, lc, la, short, n, rng):
    """Monte-Carlo area of the contact patch laid out as disjoint pieces along x.

    Near cap: disc of diameter w4 on [-w4, 0]. Short contact: triangle of base
    w4 from x=0 to x=lc. Extended contact: trapezoid w4 -> w5 over [0, la]
    followed by a disc of diameter w5.
    """
    x_max = lc if short else la + w5
    x0, x1 = -w4, max(x_max, 1e-12)
    y0, y1 = -w4 / 2, w4 / 2
    x = rng.uniform(x0, x1, n)
    y = rng.uniform(y0, y1, n)
    r4 = w4 / 2
    inside = (x + r4) ** 2 + y ** 2 <= r4 ** 2
    if short:
        half = np.where((x >= 0) & (x <= lc), r4 * (1 - x / lc) if lc > 0 else 0, -1)
        inside |= np.abs(y) <= half
    else:
        half = np.where((x >= 0) & (x <= la), (w4 + (w5 - w4) * x / la) / 2, -1)
        inside |= np.abs(y) <= half
        r5 = w5 / 2
        inside |= (x - la - r5) ** 2 + y ** 2 <= r5 ** 2
    return inside.mean() * (x1 - x0) * (y1 - y0)


def test_reference_values_frozen():
    s = contact_area(REF, 0.0)
    assert s.regime is Regime.EXTENDED
    assert s.w4 == pytest.approx(2 * 118 / math.pi)
    # hand evaluation at h = 0: both caps fully in contact plus the trapezoid
    r4, r5 = 118 / math.pi, 88 / math.pi
    la = 180 - 15 - r4 - r5
    area = math.pi * r4 ** 2 + math.pi * r5 ** 2 + (r4 + r5) * la
    assert pouch_force(REF, 0.0, 90.0) == pytest.approx(0.09 * area, rel=1e-12)
    assert pouch_force(REF, 0.0, 90.0) == pytest.approx(1207.514330655, rel=1e-10)


def test_mc_oracle_reference_heights():
    rng = np.random.default_rng(1)
    for h in (0.0, 20.0, 50.0, 60.0, 70.0):
        s = contact_area(REF, h)
        est = mc_union_area(s.w4, s.w5, s.lc, REF.la, s.regime is Regime.SHORT, 400_000, rng)
        assert est == pytest.approx(s.A, rel=0.01)


def test_regime_switch_at_lower_cap_diameter():
    hb = 2 * REF.R5
    assert contact_area(REF, hb - 1e-6).regime is Regime.EXTENDED
    assert contact_area(REF, hb).regime is Regime.SHORT
    # both branch formulas evaluated at the switch height
    s = contact_area(REF, hb)
    short, extended = s.A1 + s.A2, s.A1 + s.A3 + s.A4
    assert abs(short - extended) / short < 1e-9
    # the area is continuous but has a square-root cusp there
    assert contact_area(REF, hb * (1 - 1e-12)).A == pytest.approx(s.A, rel=1e-5)


def test_height_limits():
    h_max = 2 * REF.R4
    assert contact_area(REF, h_max + 1e-10).h == h_max
    assert contact_area(REF, h_max).A == 0.0
    with pytest.raises(DomainError):
        contact_area(REF, h_max + 1e-6)
    with pytest.raises(DomainError):
        contact_area(REF, -1.0)
    with pytest.raises(DomainError):
        pouch_force(REF, 10.0, -5.0)


def test_untapered_pouch_is_extended():
    g = PouchGeometry(l4=100, l5=100, ld=150)
    s = contact_area(g, 10.0)
    assert math.isinf(s.lc) and s.regime is Regime.EXTENDED
    assert math.isfinite(s.A)


def test_contact_table_columns():
    rows = contact_table(REF, 90, 0, 70, 8)
    assert list(rows[0]) == ["h_mm", "w4_mm", "w5_mm", "lc_mm", "regime", "A_mm2", "F_N"]
    assert {r["regime"] for r in rows} == {"Short", "Extended"}


geoms = st.builds(
    lambda l4, ratio, extra: PouchGeometry(l4=l4, l5=l4 * ratio,
                                           ld=15 + (l4 + l4 * ratio) / math.pi + extra),
    st.floats(20, 200), st.floats(0.2, 0.99), st.floats(5, 300))


@settings(max_examples=200, deadline=None)
@given(g=geoms, u=st.floats(0, 1), v=st.floats(0, 1))
def test_area_nonincreasing_in_height(g, u, v):
    a, b = sorted((u, v))
    h_max = 2 * g.R4
    assert contact_area(g, a * h_max).A >= contact_area(g, b * h_max).A - 1e-9


@settings(max_examples=200, deadline=None)
@given(g=geoms, u=st.floats(0, 1), p=st.floats(0, 200), c=st.floats(0, 10))
def test_force_linear_in_pressure(g, u, p, c):
    h = u * 2 * g.R4
    assert pouch_force(g, h, c * p) == pytest.approx(c * pouch_force(g, h, p), rel=1e-12,
                                                     abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(g=geoms, u=st.floats(0, 1))
def test_widths_bounded_by_cap_diameters(g, u):
    h = u * 2 * g.R4
    w4, w5, _ = contact_widths(g, h)
    assert 0 <= w5 <= w4 <= 2 * g.R4 + 1e-12
