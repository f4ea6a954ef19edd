"""Actuator and pouch geometry, and inflated-volume estimates.

Lengths are in mm, angles in degrees, volumes in mL.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, GeometryError

# Volume of UCAA reported for the reference build (mL); anchors the fill factor.
UCAA_REFERENCE_VOLUME_ML = 555.0
SSAA_REFERENCE_VOLUME_ML = 357.0


@dataclass(frozen=True)
class PouchGeometry:
    """Trapezoidal pouch motor outline.

    ``l4`` and ``l5`` are the upper and lower edge lengths, ``ld`` the pouch
    height and ``w_seal1`` the heat-seal width. The flattened edges roll up into
    end caps of radius ``R4 = l4/pi`` and ``R5 = l5/pi``.
    """

    l4: float = 118.0
    l5: float = 88.0
    ld: float = 180.0
    w_seal1: float = 7.5

    def __post_init__(self):
        if not (self.l4 > 0 and self.l5 > 0 and self.ld > 0):
            raise GeometryError("pouch lengths must be positive")
        if self.w_seal1 < 0:
            raise GeometryError("seal width must be nonnegative")
        if self.la <= 0:
            raise GeometryError(
                f"no room between the end caps: la = {self.la:.6g} mm <= 0")

    @property
    def R4(self) -> float:
        return self.l4 / math.pi

    @property
    def R5(self) -> float:
        return self.l5 / math.pi

    @property
    def la(self) -> float:
        """Distance between the two contact ends."""
        return self.ld - 2.0 * self.w_seal1 - self.R4 - self.R5

    @property
    def alpha(self) -> float:
        """Taper angle in radians (0 for an untapered pouch)."""
        return math.atan(abs(self.R4 - self.R5) / self.la)

    @property
    def tapered(self) -> bool:
        return self.l4 != self.l5


@dataclass(frozen=True)
class SpindleProfile:
    """Planform of an angled bending actuator (upper and lower segment)."""

    lu: float
    lp: float
    w1: float
    w2: float
    w3: float
    w_seal1: float = 7.5
    w_seal2: float = 10.0
    theta_d: float = 155.0
    theta_r: float = 155.0
    theta_f: float = 151.0
    name: str = field(default="custom", compare=False)

    def __post_init__(self):
        for key in ("lu", "lp", "w1", "w2", "w3", "w_seal1", "w_seal2"):
            if not getattr(self, key) > 0:
                raise GeometryError(f"{key} must be positive")
        if self.w1 > self.w2 or self.w3 > self.w2:
            raise GeometryError("end widths w1, w3 may not exceed the middle width w2")
        for key in ("theta_d", "theta_r", "theta_f"):
            if not 0 < getattr(self, key) < 360:
                raise GeometryError(f"{key} must lie in (0, 360) deg")

    @property
    def length(self) -> float:
        return self.lu + self.lp

    def replace(self, **changes) -> "SpindleProfile":
        kw = {f.name: getattr(self, f.name) for f in fields(self)}
        kw.update(changes)
        return SpindleProfile(**kw)


@dataclass(frozen=True)
class VolumeModelConfig:
    fill_factor: float = 1.0
    integration_step: float = 1.0

    def __post_init__(self):
        if not 0 < self.fill_factor <= 1:
            raise DomainError("fill_factor must lie in (0, 1]")
        if not self.integration_step > 0:
            raise DomainError("integration_step must be positive")


UCAA = SpindleProfile(lu=162, lp=192, w1=90, w2=90, w3=90, w_seal1=7.5, w_seal2=10,
                      theta_d=155, theta_r=155, theta_f=151, name="UCAA")
SSAA = SpindleProfile(lu=162, lp=192, w1=52, w2=90, w3=56.5, w_seal1=7.5, w_seal2=10,
                      theta_d=150, theta_r=177, theta_f=148, name="SSAA")
PRESETS = {"UCAA": UCAA, "SSAA": SSAA}

_PROFILE_KEYS = {
    "lu_mm": "lu", "lp_mm": "lp", "w1_mm": "w1", "w2_mm": "w2", "w3_mm": "w3",
    "w_seal1_mm": "w_seal1", "w_seal2_mm": "w_seal2", "theta_d_deg": "theta_d",
    "theta_r_deg": "theta_r", "theta_f_deg": "theta_f", "name": "name",
}


def profile_from_mapping(data: dict) -> SpindleProfile:
    unknown = set(data) - set(_PROFILE_KEYS)
    if unknown:
        raise ConfigError(f"unknown profile keys: {sorted(unknown)}")
    return SpindleProfile(**{_PROFILE_KEYS[k]: v for k, v in data.items()})


def profile_to_mapping(profile: SpindleProfile) -> dict:
    inverse = {v: k for k, v in _PROFILE_KEYS.items()}
    return {inverse[k]: v for k, v in asdict(profile).items()}


def load_profile(name: str) -> SpindleProfile:
    """Return a named preset (``UCAA``/``SSAA``) or read a JSON profile file."""
    if name.upper() in PRESETS:
        return PRESETS[name.upper()]
    path = Path(name)
    if not path.exists():
        raise ConfigError(f"no preset or file named {name!r}")
    return profile_from_mapping(json.loads(path.read_text()))


def width_at(profile: SpindleProfile, x: float) -> float:
    """Planform width at arc length ``x`` measured from the top edge."""
    if not 0 <= x <= profile.length:
        raise DomainError(f"x = {x} outside [0, {profile.length}]")
    if x <= profile.lu:
        return profile.w1 + (profile.w2 - profile.w1) * x / profile.lu
    return profile.w2 + (profile.w3 - profile.w2) * (x - profile.lu) / profile.lp


def _check_widths(profile: SpindleProfile):
    # widths are piecewise linear, so the vertices bound them
    if min(profile.w1, profile.w2, profile.w3) <= 2 * profile.w_seal1:
        raise GeometryError("width does not exceed twice the seal width")


def _frustum_sum(profile: SpindleProfile) -> float:
    # integral of (w - 2 w_seal1)^2 over each linear segment
    s = 2 * profile.w_seal1
    total = 0.0
    for length, a, b in ((profile.lu, profile.w1 - s, profile.w2 - s),
                         (profile.lp, profile.w2 - s, profile.w3 - s)):
        total += length * (a * a + a * b + b * b) / 3.0
    return total


def inflated_volume(profile: SpindleProfile, cfg: VolumeModelConfig | None = None,
                    method: str = "frustum") -> float:
    """Inflated volume in mL.

    The two flat fabric layers of effective width ``w - 2*w_seal1`` inflate to
    a tube of circumference ``2*(w - 2*w_seal1)``, i.e. radius ``(w - 2*w_seal1)/pi``.
    The solid of revolution is scaled by ``cfg.fill_factor``. ``method`` is
    ``"frustum"`` (closed form) or ``"numeric"`` (trapezoidal rule at
    ``cfg.integration_step``).
    """
    cfg = cfg or VolumeModelConfig()
    _check_widths(profile)
    if method == "frustum":
        integral = _frustum_sum(profile)
    elif method == "numeric":
        n = max(int(math.ceil(profile.length / cfg.integration_step)), 1)
        xs = np.linspace(0.0, profile.length, n + 1)
        if profile.lu not in xs:
            xs = np.unique(np.append(xs, profile.lu))
        w = np.interp(xs, [0.0, profile.lu, profile.length],
                      [profile.w1, profile.w2, profile.w3])
        integral = float(np.trapezoid((w - 2 * profile.w_seal1) ** 2, xs))
    else:
        raise ValueError(f"unknown method {method!r}")
    # pi * r^2 with r = eff / pi  ->  eff^2 / pi ; mm^3 -> mL
    return cfg.fill_factor * integral / math.pi * 1e-3


@lru_cache(maxsize=None)
def calibrated_fill_factor(reference: SpindleProfile = UCAA,
                           target_ml: float = UCAA_REFERENCE_VOLUME_ML) -> float:
    """Fill factor that makes ``reference`` inflate to ``target_ml``."""
    return target_ml / inflated_volume(reference, VolumeModelConfig(1.0))


def calibrated_config(integration_step: float = 1.0) -> VolumeModelConfig:
    return VolumeModelConfig(calibrated_fill_factor(), integration_step)


def volume_reduction(v_ref: float, v_new: float) -> float:
    """Percent volume saved going from ``v_ref`` to ``v_new``."""
    if not v_ref > 0:
        raise DomainError("reference volume must be positive")
    return 100.0 * (v_ref - v_new) / v_ref
