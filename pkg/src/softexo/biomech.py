"""Shoulder gravity torque, a fixed arm-raise protocol and actuator assistance.

The actuator moment measured on the bench is taken as the moment at the
shoulder joint; the real transfer depends on where the suit anchors and is
not modelled.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from importlib.resources import as_file, files
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, DomainError

G = 9.81
LOAD_PRESETS_KG = {"unloaded": 0.0, "loaded": 1.56}

# rest, raise, hold, lower (s)
PROTOCOL = (("rest", 5.0), ("raise", 4.0), ("hold", 5.0), ("lower", 4.0))
PROTOCOL_DURATION = sum(d for _, d in PROTOCOL)
PEAK_ANGLE = 90.0


def default_coefficients() -> dict:
    data = json.loads((files("softexo") / "data" / "anthropometrics.json").read_text())
    return data["coefficients"]


@dataclass(frozen=True)
class ArmModel:
    body_mass: float
    height: float
    arm_mass_fraction: float
    com_fraction: float
    length_fraction: float
    load_mass: float = 0.0
    load_lever_fraction: float = 1.0

    def __post_init__(self):
        if not (self.body_mass > 0 and self.height > 0):
            raise DomainError("body mass and height must be positive")
        for key in ("arm_mass_fraction", "com_fraction", "length_fraction"):
            if not 0 < getattr(self, key) < 1:
                raise DomainError(f"{key} must lie in (0, 1)")
        if self.load_mass < 0:
            raise DomainError("load mass must be >= 0")
        if not self.load_lever_fraction > 0:
            raise DomainError("load_lever_fraction must be positive")

    @property
    def arm_mass(self) -> float:
        return self.arm_mass_fraction * self.body_mass

    @property
    def arm_length(self) -> float:
        """Shoulder to wrist, m."""
        return self.length_fraction * self.height / 100.0

    @property
    def load_lever(self) -> float:
        return self.load_lever_fraction * self.arm_length

    @property
    def static_moment(self) -> float:
        """Sum of mass times lever arm about the shoulder, kg*m."""
        return (self.arm_mass * self.com_fraction * self.arm_length
                + self.load_mass * self.load_lever)


def anthropometric_arm(body_mass: float, height: float, load: float = 0.0,
                       coeffs: dict | None = None) -> ArmModel:
    """Arm segment model from body mass (kg), height (cm) and hand load (kg)."""
    if not (body_mass > 0 and height > 0):
        raise DomainError("body mass and height must be positive")
    coeffs = dict(default_coefficients() if coeffs is None else coeffs)
    known = {"arm_mass_fraction", "com_fraction", "length_fraction", "load_lever_fraction"}
    unknown = set(coeffs) - known
    if unknown:
        raise ConfigError(f"unknown anthropometric keys: {sorted(unknown)}")
    return ArmModel(body_mass=body_mass, height=height, load_mass=load, **coeffs)


def gravity_torque(a: ArmModel, theta: float) -> float:
    """Gravity moment (N*m) about the shoulder at elevation ``theta`` (deg)."""
    if not 0 <= theta <= 180:
        raise DomainError(f"theta = {theta} deg outside [0, 180]")
    return G * math.sin(math.radians(theta)) * a.static_moment


def protocol_trajectory(t: float) -> float:
    """Arm elevation (deg) at time ``t`` (s) of one repetition."""
    if not 0 <= t <= PROTOCOL_DURATION:
        raise DomainError(f"t = {t} s outside [0, {PROTOCOL_DURATION}]")
    t_raise = PROTOCOL[0][1]
    t_hold = t_raise + PROTOCOL[1][1]
    t_lower = t_hold + PROTOCOL[2][1]
    if t <= t_raise:
        return 0.0
    if t <= t_hold:
        return PEAK_ANGLE * (t - t_raise) / PROTOCOL[1][1]
    if t <= t_lower:
        return PEAK_ANGLE
    return PEAK_ANGLE * (1.0 - (t - t_lower) / PROTOCOL[3][1])


def protocol_schedule(pressure: float) -> "PressureSchedule":
    """Pressure on at the onset of elevation, released at the onset of lowering."""
    t_on = PROTOCOL[0][1]
    t_off = t_on + PROTOCOL[1][1] + PROTOCOL[2][1]
    return PressureSchedule((0.0, t_on, t_off), (0.0, pressure, 0.0))


@dataclass(frozen=True)
class PressureSchedule:
    """Zero-order-hold pressure (kPa) over time (s)."""

    times: tuple
    pressures: tuple

    def __post_init__(self):
        if len(self.times) != len(self.pressures) or not self.times:
            raise DataError("schedule needs matching, nonempty time and pressure lists")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise DataError("schedule times must be strictly increasing")
        if any(p < 0 for p in self.pressures):
            raise DataError("schedule pressures must be >= 0")

    def __call__(self, t: float) -> float:
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.pressures[max(i, 0)]) if i >= 0 else 0.0

    @classmethod
    def read_csv(cls, path) -> "PressureSchedule":
        rows = _read_rows(path, ("t_s", "pressure_kpa"))
        return cls(tuple(r[0] for r in rows), tuple(r[1] for r in rows))


def _read_rows(path, header):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader, None)
        if head is None or [h.strip() for h in head] != list(header):
            raise DataError(f"{path}: expected header {','.join(header)}")
        rows = []
        for line in reader:
            if not line:
                continue
            try:
                rows.append(tuple(float(v) for v in line))
            except ValueError as exc:
                raise DataError(f"{path}: {exc}") from None
    return rows


class MomentSurface:
    """Actuator moment over a rectangular (angle, pressure) grid, bilinear in between."""

    HEADER = ("angle_deg", "pressure_kpa", "moment_nm")

    def __init__(self, angles, pressures, moments, provenance: str = "unspecified"):
        self.angles = np.asarray(angles, dtype=float)
        self.pressures = np.asarray(pressures, dtype=float)
        self.moments = np.asarray(moments, dtype=float)
        self.provenance = provenance
        if self.angles.ndim != 1 or self.pressures.ndim != 1:
            raise DataError("grid axes must be one-dimensional")
        if self.moments.shape != (self.angles.size, self.pressures.size):
            raise DataError("moment table shape does not match the grid axes")
        for axis in (self.angles, self.pressures):
            if axis.size < 2 or np.any(np.diff(axis) <= 0):
                raise DataError("grid axes need >= 2 strictly increasing values")

    @classmethod
    def read_csv(cls, path, provenance: str | None = None) -> "MomentSurface":
        path = Path(path)
        rows = _read_rows(path, cls.HEADER)
        angles = sorted({r[0] for r in rows})
        pressures = sorted({r[1] for r in rows})
        if len(rows) != len(angles) * len(pressures):
            raise DataError(f"{path}: grid is not rectangular")
        table = np.full((len(angles), len(pressures)), np.nan)
        ia = {a: i for i, a in enumerate(angles)}
        ip = {p: j for j, p in enumerate(pressures)}
        for a, p, m in rows:
            table[ia[a], ip[p]] = m
        if np.isnan(table).any():
            raise DataError(f"{path}: grid is not rectangular")
        if provenance is None:
            meta = path.with_suffix(".json")
            provenance = json.loads(meta.read_text()).get("provenance", "unspecified") \
                if meta.exists() else "unspecified"
        return cls(angles, pressures, table, provenance)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.HEADER)
            for i, a in enumerate(self.angles):
                for j, p in enumerate(self.pressures):
                    w.writerow([f"{a:.12g}", f"{p:.12g}", f"{self.moments[i, j]:.12g}"])

    def scaled(self, factor: float) -> "MomentSurface":
        return MomentSurface(self.angles, self.pressures, self.moments * factor,
                             self.provenance)

    def contains(self, angle: float, pressure: float) -> bool:
        return (self.angles[0] <= angle <= self.angles[-1]
                and self.pressures[0] <= pressure <= self.pressures[-1])

    def __call__(self, angle: float, pressure: float, clamp: bool = False) -> float:
        if not self.contains(angle, pressure):
            if not clamp:
                raise DomainError(
                    f"({angle}, {pressure}) outside the moment surface domain")
            angle = min(max(angle, self.angles[0]), self.angles[-1])
            pressure = min(max(pressure, self.pressures[0]), self.pressures[-1])
        i = min(int(np.searchsorted(self.angles, angle, side="right")) - 1,
                self.angles.size - 2)
        j = min(int(np.searchsorted(self.pressures, pressure, side="right")) - 1,
                self.pressures.size - 2)
        a0, a1 = self.angles[i], self.angles[i + 1]
        p0, p1 = self.pressures[j], self.pressures[j + 1]
        u = (angle - a0) / (a1 - a0)
        v = (pressure - p0) / (p1 - p0)
        m = self.moments
        return float((1 - u) * (1 - v) * m[i, j] + u * (1 - v) * m[i + 1, j]
                     + (1 - u) * v * m[i, j + 1] + u * v * m[i + 1, j + 1])


def bundled_surface(name: str = "caa_synthetic") -> MomentSurface:
    """Surface shipped in the package data directory."""
    base = files("softexo") / "data"
    meta = json.loads((base / f"{name}.json").read_text())
    with as_file(base / f"{name}.csv") as path:
        return MomentSurface.read_csv(path, provenance=meta["provenance"])


def synthetic_surface(peak: float = 9.7, angles=None, pressures=None) -> MomentSurface:
    """Demonstration surface: linear in pressure, peaked at 90 deg, ``peak`` N*m at (90, 90).

    Shape is made up for demonstrations; only the anchor value is measured.
    """
    angles = np.arange(0.0, 181.0, 10.0) if angles is None else np.asarray(angles, float)
    pressures = np.arange(0.0, 91.0, 10.0) if pressures is None else np.asarray(pressures, float)
    shape = 1.0 - ((angles - 90.0) / 135.0) ** 2
    table = peak * np.outer(shape, pressures / 90.0)
    return MomentSurface(angles, pressures, table, "synthetic")


@dataclass(frozen=True)
class AssistSample:
    t: float
    angle: float
    pressure: float
    m_gravity: float
    m_actuator: float
    residual: float
    assist_fraction: float | None
    clamped: bool


def assistance_profile(a: ArmModel, s: MomentSurface, schedule, dt: float = 0.01,
                       clamp: bool = True) -> list[AssistSample]:
    """Gravity, actuator and residual moment along one protocol repetition.

    ``assist_fraction`` is ``None`` where the gravity moment vanishes.
    Queries outside the surface are clamped to its edge and flagged, or
    rejected when ``clamp`` is false.
    """
    n = int(round(PROTOCOL_DURATION / dt))
    out = []
    any_clamped = False
    for i in range(n + 1):
        t = min(i * dt, PROTOCOL_DURATION)
        angle = protocol_trajectory(t)
        pressure = schedule(t)
        inside = s.contains(angle, pressure)
        if not inside and not clamp:
            raise DomainError(f"surface has no data at ({angle:.3g} deg, {pressure:.3g} kPa)")
        m_act = s(angle, pressure, clamp=True)
        m_g = gravity_torque(a, angle)
        frac = m_act / m_g if m_g > 0 else None
        out.append(AssistSample(t, angle, pressure, m_g, m_act, max(m_g - m_act, 0.0),
                                frac, not inside))
        any_clamped |= not inside
    if any_clamped:
        warnings.warn("moment surface queried outside its domain; values clamped",
                      stacklevel=2)
    return out
