"""Minimum-volume spindle profiles under a moment-arm force demand.

A station at distance ``x`` (mm) from the fold only has to carry the force
``m_target / x``; the width needed for that force at the design pressure is

    w(x) = m_target * 1e6 / (k_eff * p_design * max(x, x_floor)) + 2 * w_seal1

clamped to ``[w_min_end, w2]``. ``k_eff`` (mm) lumps the unknown contact
mechanics into one coefficient, calibrated so the uniform UCAA preset at
90 kPa carries exactly 9.7 N*m.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import UCAA, SpindleProfile, VolumeModelConfig, calibrated_config, inflated_volume
from .pneumatics import PneumaticCircuit, step_response

REFERENCE_MOMENT_NM = 9.7
REFERENCE_PRESSURE_KPA = 90.0
REFERENCE_FOLD_WIDTH_MM = 90.0
X_FLOOR_MM = 5.0
MARGIN_TOL_NM = 1e-9


class InfeasibleError(DomainError):
    code = "infeasible"


def calibrate_k_eff(profile: SpindleProfile = UCAA, moment: float = REFERENCE_MOMENT_NM,
                    pressure: float = REFERENCE_PRESSURE_KPA,
                    x_floor: float = X_FLOOR_MM) -> float:
    """``k_eff`` giving ``profile`` zero moment margin at ``pressure``."""
    cap = moment_capacity(profile, 1.0, pressure, x_floor)
    return moment / cap


@dataclass(frozen=True)
class DesignConstraints:
    m_target: float = REFERENCE_MOMENT_NM
    p_design: float = REFERENCE_PRESSURE_KPA
    w_min_end: float = 50.0
    w2_fixed: float | None = REFERENCE_FOLD_WIDTH_MM
    lu_bounds: tuple[float, float] = (162.0, 162.0)
    lp_bounds: tuple[float, float] = (192.0, 192.0)
    w1_bounds: tuple[float, float] = (50.0, 90.0)
    w3_bounds: tuple[float, float] = (50.0, 90.0)
    w2_bounds: tuple[float, float] = (60.0, 120.0)
    k_eff: float | None = None
    w_seal1: float = 7.5
    x_floor: float = X_FLOOR_MM
    width_step: float = 2.0
    length_step: float = 10.0

    def __post_init__(self):
        for name in ("lu_bounds", "lp_bounds", "w1_bounds", "w3_bounds", "w2_bounds"):
            lo, hi = sorted(float(v) for v in getattr(self, name))
            if lo <= 0:
                raise DomainError(f"{name} must be positive")
            object.__setattr__(self, name, (lo, hi))
        if self.k_eff is None:
            object.__setattr__(self, "k_eff", calibrate_k_eff(x_floor=self.x_floor))
        if not self.m_target > 0:
            raise DomainError("m_target must be positive")
        if not self.p_design > 0:
            raise DomainError("p_design must be positive")
        if not self.w_min_end > 2 * self.w_seal1:
            raise DomainError("w_min_end must exceed twice the seal width")
        if not (self.k_eff > 0 and self.x_floor > 0):
            raise DomainError("k_eff and x_floor must be positive")

    @property
    def extrapolative(self) -> bool:
        """True when the fold width is free or differs from the reference build."""
        return self.w2_fixed is None or self.w2_fixed != REFERENCE_FOLD_WIDTH_MM


_CONSTRAINT_KEYS = {
    "m_target_nm": "m_target", "p_design_kpa": "p_design", "w_min_end_mm": "w_min_end",
    "w2_fixed_mm": "w2_fixed", "lu_bounds_mm": "lu_bounds", "lp_bounds_mm": "lp_bounds",
    "w1_bounds_mm": "w1_bounds", "w3_bounds_mm": "w3_bounds", "w2_bounds_mm": "w2_bounds",
    "k_eff_mm": "k_eff", "w_seal1_mm": "w_seal1", "x_floor_mm": "x_floor",
    "width_step_mm": "width_step", "length_step_mm": "length_step",
}


def constraints_from_mapping(data: dict) -> DesignConstraints:
    unknown = set(data) - set(_CONSTRAINT_KEYS)
    if unknown:
        raise ConfigError(f"unknown design keys: {sorted(unknown)}")
    kw = {}
    for key, value in data.items():
        kw[_CONSTRAINT_KEYS[key]] = tuple(value) if isinstance(value, list) else value
    return DesignConstraints(**kw)


def load_constraints(path) -> DesignConstraints:
    return constraints_from_mapping(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class WidthDemand:
    """Clamped width demand as a function of distance from the fold."""

    m_target: float
    p_design: float
    k_eff: float
    w_seal1: float
    w_min_end: float
    w2: float
    x_floor: float

    def unclamped(self, x):
        x = np.maximum(np.asarray(x, dtype=float), self.x_floor)
        return self.m_target * 1e6 / (self.k_eff * self.p_design * x) + 2 * self.w_seal1

    def __call__(self, x):
        w = np.clip(self.unclamped(x), None, self.w2)
        w = np.maximum(w, self.w_min_end)
        return float(w) if np.ndim(w) == 0 else w

    @property
    def plateau_end(self) -> float:
        """Distance up to which the demand sits at ``w2``."""
        excess = self.w2 - 2 * self.w_seal1
        x = self.m_target * 1e6 / (self.k_eff * self.p_design * excess)
        return x if x > self.x_floor else 0.0

    @property
    def floor_start(self) -> float:
        """Distance beyond which the demand sits at ``w_min_end``."""
        excess = self.w_min_end - 2 * self.w_seal1
        return max(self.m_target * 1e6 / (self.k_eff * self.p_design * excess), self.x_floor)


def required_width_profile(c: DesignConstraints, span: tuple[float, float],
                           w2: float | None = None) -> WidthDemand:
    w2 = w2 if w2 is not None else (c.w2_fixed if c.w2_fixed is not None else c.w2_bounds[1])
    demand = WidthDemand(c.m_target, c.p_design, c.k_eff, c.w_seal1, c.w_min_end, w2,
                         c.x_floor)
    longest = max(span)
    if not longest > 0:
        raise DomainError("segment spans must be positive")
    if demand.unclamped(longest) > w2:
        raise InfeasibleError(
            f"demanded width exceeds w2 = {w2} mm over the whole {longest} mm span")
    return demand


def _segment_samples(length: float, step: float = 1.0) -> np.ndarray:
    n = max(int(math.ceil(length / step)), 1)
    return np.linspace(0.0, length, n + 1)


def _segments(profile: SpindleProfile):
    # distance from the fold outward, with the end width of each segment
    return ((profile.lu, profile.w1), (profile.lp, profile.w3))


def moment_capacity(profile: SpindleProfile, k_eff: float, pressure: float,
                    x_floor: float = X_FLOOR_MM, step: float = 1.0) -> float:
    """Smallest moment (N*m) any station of the profile can carry."""
    cap = math.inf
    s = 2 * profile.w_seal1
    for length, w_end in _segments(profile):
        x = _segment_samples(length, step)
        w = profile.w2 + (w_end - profile.w2) * x / length
        m = k_eff * 1e-3 * pressure * (w - s) * np.maximum(x, x_floor) * 1e-3
        cap = min(cap, float(m.min()))
    return cap


def width_violation(profile: SpindleProfile, c: DesignConstraints, step: float = 1.0) -> float:
    """Largest shortfall (mm) of the profile below the clamped demand; <= 0 if none."""
    demand = WidthDemand(c.m_target, c.p_design, c.k_eff, c.w_seal1, c.w_min_end,
                         profile.w2, c.x_floor)
    worst = -math.inf
    for length, w_end in _segments(profile):
        x = _segment_samples(length, step)
        w = profile.w2 + (w_end - profile.w2) * x / length
        worst = max(worst, float(np.max(demand(x) - w)))
    return worst


@dataclass(frozen=True)
class DesignReport:
    profile: SpindleProfile | None
    volume: float | None
    torque_margin: float | None
    rise_time_index: float | None
    feasible: bool
    extrapolative: bool = False
    explored: tuple = field(default=(), compare=False, repr=False)

    def to_dict(self) -> dict:
        out = {
            "feasible": self.feasible,
            "extrapolative": self.extrapolative,
            "volume_ml": self.volume,
            "torque_margin_nm": self.torque_margin,
            "rise_time_index_s": self.rise_time_index,
            "profile": None,
        }
        if self.profile is not None:
            prof = asdict(self.profile)
            prof.pop("name")
            out["profile"] = {f"{k}_{'deg' if k.startswith('theta') else 'mm'}": v
                              for k, v in prof.items()}
        return out


def _assess(profile: SpindleProfile, c: DesignConstraints, cfg: VolumeModelConfig):
    volume = inflated_volume(profile, cfg)
    margin = moment_capacity(profile, c.k_eff, c.p_design, c.x_floor) - c.m_target
    feasible = (margin >= -MARGIN_TOL_NM
                and min(profile.w1, profile.w3) >= c.w_min_end
                and width_violation(profile, c) <= 1e-9)
    return volume, margin, feasible


def rise_time_index(volume_ml: float, circuit: PneumaticCircuit, p_ref: float) -> float:
    p_ref = min(p_ref, circuit.p_supply)
    res = step_response(replace(circuit, v_act=volume_ml), p_ref,
                        duration=max(6.0, 12.0 * volume_ml / 555.0))
    return res.rise_time_10_90


def evaluate_design(profile: SpindleProfile, c: DesignConstraints,
                    circuit: PneumaticCircuit | None = None,
                    volume_cfg: VolumeModelConfig | None = None) -> DesignReport:
    from .pneumatics import reference_circuit

    circuit = circuit or reference_circuit()
    cfg = volume_cfg or calibrated_config()
    volume, margin, feasible = _assess(profile, c, cfg)
    extrap = c.extrapolative or profile.w2 != REFERENCE_FOLD_WIDTH_MM
    return DesignReport(profile, volume, margin, rise_time_index(volume, circuit, c.p_design),
                        feasible, extrap)


def _grid(bounds: tuple[float, float], step: float) -> list[float]:
    lo, hi = bounds
    if hi == lo:
        return [lo]
    n = int(math.floor((hi - lo) / step + 1e-9))
    vals = [lo + i * step for i in range(n + 1)]
    if hi - vals[-1] > 1e-9:
        vals.append(hi)
    return vals


def _rank_key(entry):
    # smaller volume, then larger margin, then lexicographic (w1, w3)
    p = entry["profile"]
    return (entry["volume"], -entry["margin"], p.w1, p.w3, p.w2, p.lu, p.lp)


def optimize_spindle(c: DesignConstraints, volume_cfg: VolumeModelConfig | None = None,
                     circuit: PneumaticCircuit | None = None,
                     refine_rounds: int = 3) -> DesignReport:
    """Grid search over the constraint box followed by coordinate refinement.

    Volume is the objective; infeasible boxes yield a report with
    ``feasible=False`` instead of raising.
    """
    from .pneumatics import reference_circuit

    cfg = volume_cfg or calibrated_config()
    if refine_rounds < 3:
        raise DomainError("at least three refinement rounds are required")
    w2_vals = [c.w2_fixed] if c.w2_fixed is not None else _grid(c.w2_bounds, c.width_step)
    axes = {
        "lu": _grid(c.lu_bounds, c.length_step),
        "lp": _grid(c.lp_bounds, c.length_step),
        "w2": w2_vals,
        "w1": _grid(c.w1_bounds, c.width_step),
        "w3": _grid(c.w3_bounds, c.width_step),
    }
    bounds = {"lu": c.lu_bounds, "lp": c.lp_bounds, "w1": c.w1_bounds, "w3": c.w3_bounds,
              "w2": (c.w2_fixed, c.w2_fixed) if c.w2_fixed is not None else c.w2_bounds}
    steps = {"lu": c.length_step, "lp": c.length_step, "w1": c.width_step,
             "w3": c.width_step, "w2": c.width_step}

    explored = []
    cache = {}

    def visit(params):
        key = tuple(round(params[k], 9) for k in ("lu", "lp", "w1", "w2", "w3"))
        if key in cache:
            return cache[key]
        entry = None
        if params["w1"] <= params["w2"] and params["w3"] <= params["w2"] \
                and min(params["w1"], params["w3"]) > 2 * c.w_seal1:
            prof = SpindleProfile(lu=params["lu"], lp=params["lp"], w1=params["w1"],
                                  w2=params["w2"], w3=params["w3"], w_seal1=c.w_seal1,
                                  name="optimized")
            volume, margin, feasible = _assess(prof, c, cfg)
            entry = {"profile": prof, "volume": volume, "margin": margin,
                     "feasible": feasible}
            explored.append(entry)
        cache[key] = entry
        return entry

    names = ("lu", "lp", "w2", "w1", "w3")
    for combo in itertools.product(*(axes[k] for k in names)):
        visit(dict(zip(names, combo)))

    feasible = [e for e in explored if e["feasible"]]
    if not feasible:
        return DesignReport(None, None, None, None, False, c.extrapolative,
                            tuple(explored))
    best = min(feasible, key=_rank_key)

    free = [k for k in ("w1", "w3", "lu", "lp", "w2") if bounds[k][0] < bounds[k][1]]
    step_scale = 1.0
    for _ in range(refine_rounds):
        step_scale *= 0.5
        improved = True
        while improved:
            improved = False
            for k in free:
                for sign in (-1.0, 1.0):
                    p = best["profile"]
                    params = {"lu": p.lu, "lp": p.lp, "w1": p.w1, "w2": p.w2, "w3": p.w3}
                    params[k] = params[k] + sign * steps[k] * step_scale
                    lo, hi = bounds[k]
                    if not lo <= params[k] <= hi:
                        continue
                    cand = visit(params)
                    if cand and cand["feasible"] and _rank_key(cand) < _rank_key(best):
                        best = cand
                        improved = True

    circuit = circuit or reference_circuit()
    prof = best["profile"]
    return DesignReport(prof, best["volume"], best["margin"],
                        rise_time_index(best["volume"], circuit, c.p_design), True,
                        c.extrapolative or prof.w2 != REFERENCE_FOLD_WIDTH_MM,
                        tuple(explored))


def frontier_rows(report: DesignReport) -> list[dict]:
    """Explored designs as rows (volume vs. margin) in a stable order."""
    rows = []
    for e in sorted(report.explored, key=_rank_key):
        p = e["profile"]
        rows.append({"lu_mm": p.lu, "lp_mm": p.lp, "w1_mm": p.w1, "w2_mm": p.w2,
                     "w3_mm": p.w3, "volume_ml": e["volume"],
                     "torque_margin_nm": e["margin"], "feasible": int(e["feasible"])})
    return rows
