"""Lumped filling/venting dynamics of an actuator behind a proportional regulator.

The regulator is idealised: its output tracks the setpoint instantly (limited
by the buffer-tank pressure) and the actuator exchanges air with it through
two effective orifices, one for filling and one for venting. Flow follows the
two-regime sonic-conductance law; filling is isothermal and the actuator
volume is rigid.

Pressures passed around are gauge kPa unless a name says ``abs``. Volumes of
the circuit are in mL (actuator) and L (tank); conductances in L/(s*bar)
at standard reference conditions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, IntegrationError

P_STD_KPA = 100.0
T_STD_K = 293.15


@dataclass(frozen=True)
class PneumaticCircuit:
    p_supply: float = 130.0
    v_act: float = 555.0
    c_fill: float = 0.5
    c_vent: float = 0.5
    p_atm: float = 101.325
    v_tank: float = 0.75
    b_crit: float = 0.5
    temperature: float = 293.0
    closed_tank: bool = False

    def __post_init__(self):
        if not (self.v_act > 0 and self.v_tank > 0):
            raise DomainError("volumes must be positive")
        if not (self.c_fill > 0 and self.c_vent > 0):
            raise DomainError("conductances must be positive")
        if not 0 < self.b_crit < 1:
            raise DomainError("critical pressure ratio must lie in (0, 1)")
        if not (self.p_supply > 0 and self.p_atm > 0 and self.temperature > 0):
            raise DomainError("supply, ambient pressure and temperature must be positive")

    def scaled(self, factor: float) -> "PneumaticCircuit":
        """Same circuit with both conductances multiplied by ``factor``."""
        return replace(self, c_fill=self.c_fill * factor, c_vent=self.c_vent * factor)


def orifice_flow(p_up: float, p_down: float, c: float, b_crit: float = 0.5,
                 temperature: float = T_STD_K) -> float:
    """Standard volumetric flow (L/s) through an orifice of conductance ``c``.

    Pressures are absolute kPa. Choked when ``p_down/p_up <= b_crit``,
    elliptic subsonic law above it.
    """
    if p_down < 0 or p_up < p_down:
        raise DomainError("orifice_flow needs p_up >= p_down >= 0")
    if p_up == p_down:
        return 0.0
    r = p_down / p_up
    q = c * (p_up / 100.0) * math.sqrt(T_STD_K / temperature)
    if r <= b_crit:
        return q
    x = (r - b_crit) / (1.0 - b_crit)
    return q * math.sqrt(1.0 - x * x)


def standard_air_volume(p_gauge: float, volume_l: float, c: PneumaticCircuit) -> float:
    """Air content of a volume expressed as litres at standard conditions."""
    return (p_gauge + c.p_atm) * volume_l / P_STD_KPA * T_STD_K / c.temperature


@dataclass(frozen=True)
class StepResult:
    t: np.ndarray
    p: np.ndarray
    p_ref: float
    rise_time_10_90: float | None
    fall_time_90_10: float | None
    settled: bool
    t_release: float

    @property
    def degenerate(self) -> bool:
        return self.p_ref == 0


class _Integrator:
    """Fixed-step explicit integration of actuator (and optionally tank) pressure."""

    def __init__(self, c: PneumaticCircuit, dt: float):
        self.c = c
        self.dt = dt
        # kPa gained per standard litre in each volume
        self.k_act = P_STD_KPA * c.temperature / T_STD_K / (c.v_act * 1e-3)
        self.k_tank = P_STD_KPA * c.temperature / T_STD_K / c.v_tank
        self.q_scale = math.sqrt(T_STD_K / c.temperature) / 100.0

    def _flow(self, p_up_abs, p_down_abs, cond):
        # inlined orifice_flow for speed; caller guarantees p_up >= p_down
        if p_up_abs <= p_down_abs:
            return 0.0
        b = self.c.b_crit
        q = cond * p_up_abs * self.q_scale
        r = p_down_abs / p_up_abs
        if r <= b:
            return q
        x = (r - b) / (1.0 - b)
        return q * math.sqrt(1.0 - x * x)

    def step(self, p, p_tank, p_ref):
        """Advance one step; returns new (p, p_tank, transferred standard litres)."""
        c, dt = self.c, self.dt
        atm = c.p_atm
        valve = min(p_ref, p_tank)
        if p < valve:
            q = self._flow(valve + atm, p + atm, c.c_fill) * dt
            # do not cross the regulator output (or equalise past the tank)
            if c.closed_tank:
                q_max = (valve - p) / (self.k_act + self.k_tank) if p_tank <= p_ref \
                    else (valve - p) / self.k_act
            else:
                q_max = (valve - p) / self.k_act
            q = min(q, q_max)
            p += q * self.k_act
            if c.closed_tank:
                p_tank -= q * self.k_tank
            return p, p_tank, q
        if p > p_ref:
            q = self._flow(p + atm, max(p_ref, 0.0) + atm, c.c_vent) * dt
            q = min(q, (p - max(p_ref, 0.0)) / self.k_act)
            p -= q * self.k_act
            return p, p_tank, -q
        return p, p_tank, 0.0


def _check_dt(c: PneumaticCircuit, dt: float, scale: float):
    if not dt > 0:
        raise IntegrationError("dt must be positive")
    rate = (P_STD_KPA / (c.v_act * 1e-3)) * max(c.c_fill, c.c_vent) * \
        (c.p_supply + c.p_atm) / 100.0
    if dt * rate > 0.05 * scale:
        raise IntegrationError(
            f"dt = {dt:g} s lets pressure move more than 5% of {scale:g} kPa per step")


def simulate(c: PneumaticCircuit, reference, t_end: float, dt: float,
             p0: float = 0.0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate with ``reference(t)`` as setpoint; returns (t, p_act, p_tank)."""
    n = int(round(t_end / dt))
    integ = _Integrator(c, dt)
    t = np.arange(n + 1) * dt
    ps = np.empty(n + 1)
    pt = np.empty(n + 1)
    p, p_tank = p0, c.p_supply
    ps[0], pt[0] = p, p_tank
    for i in range(n):
        p, p_tank, _ = integ.step(p, p_tank, reference(t[i]))
        ps[i + 1] = p
        pt[i + 1] = p_tank
    return t, ps, pt


def _crossing(t, p, level, start, rising):
    """Time of first crossing of ``level`` at or after index ``start``, interpolated."""
    seg = p[start:]
    hit = np.nonzero(seg >= level if rising else seg <= level)[0]
    if hit.size == 0:
        return None
    i = start + int(hit[0])
    if i == 0 or i == start:
        return float(t[i])
    p0, p1 = p[i - 1], p[i]
    if p1 == p0:
        return float(t[i])
    return float(t[i - 1] + (level - p0) / (p1 - p0) * (t[i] - t[i - 1]))


def transition_times(t, p, p_ref, i_release):
    """Rise (10->90 %) and fall (90->10 %) times of a pulse trace."""
    lo, hi = 0.1 * p_ref, 0.9 * p_ref
    rise = fall = None
    t10, t90 = _crossing(t, p, lo, 0, True), _crossing(t, p, hi, 0, True)
    if t10 is not None and t90 is not None and t90 <= t[i_release]:
        rise = t90 - t10
    f90, f10 = _crossing(t, p, hi, i_release, False), _crossing(t, p, lo, i_release, False)
    if f90 is not None and f10 is not None:
        fall = f10 - f90
    return rise, fall


def _step_once(c, p_ref, duration, dt):
    t_release = duration / 2.0
    t, p, _ = simulate(c, lambda s: p_ref if s < t_release else 0.0, duration, dt)
    i_release = int(round(t_release / dt))
    rise, fall = transition_times(t, p, p_ref, i_release)
    tol = 0.02 * p_ref
    settled = abs(p[i_release] - p_ref) <= tol and abs(p[-1]) <= tol
    return StepResult(t, p, p_ref, rise, fall, bool(settled), t_release)


def step_response(c: PneumaticCircuit, p_ref: float, duration: float = 6.0,
                  dt: float = 1e-3, check_convergence: bool = True) -> StepResult:
    """Pulse response: setpoint ``p_ref`` for ``duration/2`` s, then 0 kPa.

    With ``check_convergence`` the run is repeated at ``dt/2`` and the
    rise/fall times must agree within 1 %.
    """
    if p_ref < 0 or p_ref > c.p_supply:
        raise DomainError(f"p_ref must lie in [0, {c.p_supply}] kPa")
    if not duration > 0:
        raise DomainError("duration must be positive")
    if p_ref == 0:
        n = int(round(duration / dt))
        t = np.arange(n + 1) * dt
        return StepResult(t, np.zeros_like(t), 0.0, None, None, True, duration / 2.0)
    _check_dt(c, dt, p_ref)
    res = _step_once(c, p_ref, duration, dt)
    if check_convergence:
        fine = _step_once(c, p_ref, duration, dt / 2.0)
        for a, b in ((res.rise_time_10_90, fine.rise_time_10_90),
                     (res.fall_time_90_10, fine.fall_time_90_10)):
            if (a is None) != (b is None):
                raise IntegrationError("step halving changed whether the step completes")
            if a is not None and abs(a - b) > 0.01 * b:
                raise IntegrationError(
                    f"step halving changed a transition time by {abs(a - b) / b:.2%}")
    return res


def _sine_magnitude(c, p_mean, amplitude, f, cycles_discard, cycles_measure,
                    samples_per_cycle, dt_max):
    period = 1.0 / f
    n_per = max(samples_per_cycle, int(math.ceil(period / dt_max)))
    dt = period / n_per
    w = 2 * math.pi * f
    integ = _Integrator(c, dt)
    p, p_tank = p_mean, c.p_supply
    n_discard = cycles_discard * n_per
    n_meas = cycles_measure * n_per
    out = np.empty(n_meas)
    for i in range(n_discard + n_meas):
        ref = p_mean + amplitude * math.sin(w * i * dt)
        p, p_tank, _ = integ.step(p, p_tank, ref)
        if i >= n_discard:
            out[i - n_discard] = p
    k = np.arange(1, n_meas + 1) + n_discard
    phase = np.exp(-1j * w * k * dt)
    fundamental = 2.0 / n_meas * abs(np.sum((out - out.mean()) * phase))
    # a trace that is still drifting has no steady state to speak of
    first, last = out[:n_per].mean(), out[-n_per:].mean()
    if abs(first - last) > 0.01 * max(amplitude, 1e-12):
        raise IntegrationError(f"no steady state reached at {f:g} Hz")
    return fundamental / amplitude


def frequency_response(c: PneumaticCircuit, p_mean: float, amplitude: float,
                       freqs, cycles_discard: int = 5, cycles_measure: int = 3,
                       samples_per_cycle: int = 400, dt_max: float = 1e-3
                       ) -> list[tuple[float, float]]:
    """Magnitude (dB) of the fundamental of the actuator pressure per input frequency."""
    if amplitude <= 0:
        raise DomainError("amplitude must be positive")
    if not (0 < p_mean - amplitude and p_mean + amplitude < c.p_supply):
        raise DomainError("p_mean +/- amplitude must lie inside (0, p_supply)")
    if cycles_discard < 5:
        raise DomainError("discard at least 5 cycles of transient")
    out = []
    for f in freqs:
        if not f > 0:
            raise DomainError("frequencies must be positive")
        mag = _sine_magnitude(c, p_mean, amplitude, float(f), cycles_discard,
                              cycles_measure, samples_per_cycle, dt_max)
        out.append((float(f), 20.0 * math.log10(mag)))
    return out


def cutoff_minus3db(response) -> float:
    """Frequency where the magnitude first falls to -3 dB, log-linear interpolation."""
    pts = sorted(response)
    if not pts:
        raise DomainError("empty response")
    for (f0, m0), (f1, m1) in zip([(None, None)] + pts[:-1], pts):
        if m1 == -3.0:
            return f1
        if f0 is not None and m0 > -3.0 > m1:
            lf = math.log(f0) + (-3.0 - m0) / (m1 - m0) * (math.log(f1) - math.log(f0))
            return math.exp(lf)
    raise DomainError("response does not cross -3 dB in the sampled range")


def find_cutoff(c: PneumaticCircuit, p_mean: float, amplitude: float,
                f_start: float = 20.0, f_min: float = 1e-3, rtol: float = 1e-4) -> float:
    """-3 dB frequency located by root finding on log-frequency.

    The bracket is searched downward from ``f_start`` in octaves, so the slow
    low-frequency simulations are only run when needed.
    """
    def g(lf):
        return frequency_response(c, p_mean, amplitude, [math.exp(lf)])[0][1] + 3.0

    hi = math.log(f_start)
    g_hi = g(hi)
    if g_hi > 0:
        raise DomainError(f"magnitude above -3 dB at {f_start:g} Hz")
    lo = hi
    while True:
        lo -= math.log(2.0)
        if lo < math.log(f_min):
            raise DomainError("-3 dB crossing not bracketed")
        g_lo = g(lo)
        if g_lo >= 0:
            break
        hi = lo
    return math.exp(brentq(g, lo, hi, xtol=rtol))


def calibrate_conductance(c: PneumaticCircuit, p_mean: float, amplitude: float,
                          target_hz: float) -> PneumaticCircuit:
    """Scale both conductances so the -3 dB cutoff at ``p_mean`` is ``target_hz``.

    Time in the model only enters through ``v_act / c``, so the cutoff is
    proportional to a common conductance factor and one evaluation suffices.
    """
    fc = find_cutoff(c, p_mean, amplitude)
    return c.scaled(target_hz / fc)


# Bode calibration of the reference circuit: abduction actuator (two SSAA
# chambers), 20 kPa mean, amplitude half the mean, 1.06 Hz cutoff.
CALIBRATION = {"p_mean_kpa": 20.0, "amplitude_kpa": 10.0, "target_hz": 1.06,
               "v_act_ml": 714.0}


def _data_path():
    from importlib.resources import files
    return files("softexo") / "data" / "pneumatics.json"


def circuit_from_mapping(data: dict) -> PneumaticCircuit:
    from .errors import ConfigError

    keys = {"p_supply_kpa": "p_supply", "v_act_ml": "v_act", "c_fill_l_per_s_bar": "c_fill",
            "c_vent_l_per_s_bar": "c_vent", "p_atm_kpa": "p_atm", "v_tank_l": "v_tank",
            "b_crit": "b_crit", "temperature_k": "temperature", "closed_tank": "closed_tank"}
    unknown = set(data) - set(keys)
    if unknown:
        raise ConfigError(f"unknown circuit keys: {sorted(unknown)}")
    return PneumaticCircuit(**{keys[k]: v for k, v in data.items()})


def reference_circuit(v_act: float | None = None) -> PneumaticCircuit:
    """Calibrated circuit shipped with the package, optionally with another volume."""
    import json

    data = json.loads(_data_path().read_text())
    c = circuit_from_mapping(data["circuit"])
    return c if v_act is None else replace(c, v_act=v_act)


def recalibrate(base: PneumaticCircuit | None = None) -> PneumaticCircuit:
    """Rerun the Bode calibration that produced the shipped constants."""
    base = base or PneumaticCircuit(v_act=CALIBRATION["v_act_ml"], c_fill=0.2, c_vent=0.2)
    return calibrate_conductance(base, CALIBRATION["p_mean_kpa"],
                                 CALIBRATION["amplitude_kpa"], CALIBRATION["target_hz"])
