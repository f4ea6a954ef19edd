"""Pouch-motor force model: contact widths, piecewise contact area, force.

Units are fixed to mm, kPa and N; ``0.001 * kPa * mm^2`` is newtons.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .geometry import PouchGeometry

# Requests this far above 2*R4 are clamped instead of rejected.
H_CLAMP_TOL = 1e-9


class Regime(str, Enum):
    SHORT = "Short"
    EXTENDED = "Extended"


@dataclass(frozen=True)
class ContactState:
    h: float
    w4: float
    w5: float
    lc: float
    regime: Regime
    A1: float
    A2: float
    A3: float
    A4: float

    @property
    def A(self) -> float:
        if self.regime is Regime.SHORT:
            return self.A1 + self.A2
        return self.A1 + self.A3 + self.A4


def _check_height(g: PouchGeometry, h: float) -> float:
    h_max = 2.0 * g.R4
    if h < 0 or math.isnan(h):
        raise DomainError(f"compression height must be >= 0, got {h}")
    if h > h_max:
        if h - h_max <= H_CLAMP_TOL:
            return h_max
        raise DomainError(f"h = {h:.6g} mm exceeds 2*R4 = {h_max:.6g} mm")
    return h


def contact_widths(g: PouchGeometry, h: float) -> tuple[float, float, float]:
    """Return ``(w4, w5, lc)`` at compression height ``h``.

    ``lc`` is infinite for an untapered pouch; :func:`contact_area` treats
    that case as an extended contact band.
    """
    h = _check_height(g, h)
    w4 = 2.0 * math.sqrt(max(g.R4 ** 2 - h * h / 4.0, 0.0))
    w5 = 2.0 * math.sqrt(max(g.R5 ** 2 - h * h / 4.0, 0.0)) if h <= 2.0 * g.R5 else 0.0
    if g.alpha == 0.0:
        lc = math.inf
    else:
        lc = abs(g.R4 - h / 2.0) / math.tan(g.alpha)
    return w4, w5, lc


def contact_area(g: PouchGeometry, h: float) -> ContactState:
    h = _check_height(g, h)
    w4, w5, lc = contact_widths(g, h)
    a1 = math.pi * w4 * w4 / 4.0
    a3 = math.pi * w5 * w5 / 4.0
    a4 = (w4 + w5) * g.la / 2.0
    if lc <= g.la:
        regime = Regime.SHORT
        a2 = lc * w4 / 2.0
    else:
        regime = Regime.EXTENDED
        # the triangle is not part of an extended contact; an untapered pouch
        # would otherwise carry an infinite lc into A2
        a2 = 0.0 if math.isinf(lc) else lc * w4 / 2.0
    return ContactState(h, w4, w5, lc, regime, a1, a2, a3, a4)


def _check_pressure(P: float):
    if P < 0 or math.isnan(P):
        raise DomainError(f"pressure must be >= 0 kPa, got {P}")


def pouch_force(g: PouchGeometry, h: float, P: float) -> float:
    """Contact force in N at height ``h`` (mm) and gauge pressure ``P`` (kPa)."""
    _check_pressure(P)
    return 0.001 * P * contact_area(g, h).A


def force_height_curve(g: PouchGeometry, P: float, h_min: float, h_max: float,
                       n: int) -> list[tuple[float, float]]:
    _check_pressure(P)
    if n < 2:
        raise DomainError("need at least two samples")
    if not 0 <= h_min < h_max:
        raise DomainError("require 0 <= h_min < h_max")
    _check_height(g, h_max)
    hs = np.linspace(h_min, h_max, n)
    return [(float(h), pouch_force(g, float(h), P)) for h in hs]


def contact_table(g: PouchGeometry, P: float, h_min: float, h_max: float,
                  n: int) -> list[dict]:
    """Rows of the full contact state along a force-height sweep."""
    rows = []
    for h, force in force_height_curve(g, P, h_min, h_max, n):
        s = contact_area(g, h)
        rows.append({"h_mm": h, "w4_mm": s.w4, "w5_mm": s.w5, "lc_mm": s.lc,
                     "regime": s.regime.value, "A_mm2": s.A, "F_N": force})
    return rows
