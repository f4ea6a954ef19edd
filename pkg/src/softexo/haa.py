"""Torque-angle model of the horizontal adduction actuator (two sewn pouches)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import PouchGeometry
from .pouch import Regime, contact_area

# Supply limit of the reference pneumatic system, kPa.
DEFAULT_MAX_PRESSURE_KPA = 130.0


@dataclass(frozen=True)
class HaaAssembly:
    pouch: PouchGeometry = field(default_factory=PouchGeometry)
    d: float = 7.5
    max_pressure: float = DEFAULT_MAX_PRESSURE_KPA

    def __post_init__(self):
        if self.d < 0:
            raise DomainError("sewing offset d must be >= 0")

    @property
    def l_O1O2(self) -> float:
        """Pouch centre to sewing centre distance (mm)."""
        return self.pouch.R5 + self.d


@dataclass(frozen=True)
class BendState:
    beta: float
    h: float
    l_arm: float


def bend_kinematics(a: HaaAssembly, beta: float) -> BendState:
    if not 0 <= beta < 360:
        raise DomainError(f"beta = {beta} deg outside [0, 360)")
    q = math.radians(beta) / 4.0
    return BendState(beta, 2.0 * a.l_O1O2 * math.sin(q), a.l_O1O2 * math.cos(q))


def boundary_angle(a: HaaAssembly) -> float | None:
    """Bending angle (deg) at which the distal cap separates (h = 2*R5)."""
    ratio = a.pouch.R5 / a.l_O1O2
    if ratio > 1:
        return None
    beta = 4.0 * math.degrees(math.asin(ratio))
    return beta if beta < 360 else None


def _check_pressure(a: HaaAssembly, P: float):
    if not 0 <= P <= a.max_pressure:
        raise DomainError(f"pressure {P} kPa outside [0, {a.max_pressure}] kPa")


def haa_torque(a: HaaAssembly, beta: float, P: float) -> float:
    """Output torque in N*m at bending angle ``beta`` (deg) and pressure ``P`` (kPa)."""
    _check_pressure(a, P)
    s = bend_kinematics(a, beta)
    force = 0.001 * P * contact_area(a.pouch, s.h).A
    return force * s.l_arm * 1e-3


def torque_angle_curve(a: HaaAssembly, P: float, beta_min: float, beta_max: float,
                       n: int) -> list[tuple[float, float]]:
    if n < 2:
        raise DomainError("need at least two samples")
    if not beta_min < beta_max:
        raise DomainError("require beta_min < beta_max")
    betas = np.linspace(beta_min, beta_max, n)
    return [(float(b), haa_torque(a, float(b), P)) for b in betas]


def torque_table(a: HaaAssembly, P: float, beta_min: float, beta_max: float,
                 n: int) -> list[dict]:
    rows = []
    for beta, m in torque_angle_curve(a, P, beta_min, beta_max, n):
        s = bend_kinematics(a, beta)
        c = contact_area(a.pouch, s.h)
        rows.append({"beta_deg": beta, "h_mm": s.h, "l_arm_mm": s.l_arm,
                     "regime": c.regime.value, "F_N": 0.001 * P * c.A, "M_Nm": m})
    return rows


# Values reported for the built HAA at 90 kPa, kept for comparison only.
REPORTED_TORQUE_NM = {60.0: 10.93, 120.0: 4.64, 210.0: 0.0}


def comparison_report(a: HaaAssembly | None = None, P: float = 90.0) -> list[dict]:
    """Literal model output next to the reported torque values."""
    a = a or HaaAssembly()
    out = []
    for beta, reported in REPORTED_TORQUE_NM.items():
        model = haa_torque(a, beta, P)
        out.append({"beta_deg": beta, "model_Nm": model, "reported_Nm": reported,
                    "regime": contact_area(a.pouch, bend_kinematics(a, beta).h).regime.value})
    return out


__all__ = ["HaaAssembly", "BendState", "Regime", "bend_kinematics", "boundary_angle",
           "haa_torque", "torque_angle_curve", "torque_table", "comparison_report"]
