"""Command-line entry point: ``softexo <group> <action> [options]``.

Exit codes: 0 success, 2 usage error, 1 domain or computation error. Errors
are printed on stderr as ``error[<code>]: <message>``.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from . import biomech, design, emg_stats, geometry, haa, pneumatics, pouch
from .errors import ConfigError, SoftExoError
from .io import rows_to_csv, to_json
from .plotting import PlotStyle, Series, emit_plot, step_plot

OUTPUT_DIR_ENV = "SOFTEXO_OUTPUT_DIR"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error[usage]: {message}", file=sys.stderr)
        raise _UsageError(message)


def _globals() -> argparse.ArgumentParser:
    g = _Parser(add_help=False)
    g.add_argument("--config", help="JSON file with option values (flags win)")
    g.add_argument("--out-dir", dest="out_dir",
                   help=f"write outputs here instead of stdout (default ${OUTPUT_DIR_ENV})")
    g.add_argument("--format", choices=("csv", "json"), default=None)
    g.add_argument("--plot", choices=("none", "svg"), default=None)
    g.add_argument("--seed", type=int, default=None)
    return g


GLOBAL_KEYS = {"out_dir", "format", "plot", "seed"}

# per-command option defaults; keys double as config-file keys
DEFAULTS = {
    ("geometry", "volume"): {"profile": "SSAA", "fill_factor": None, "method": "frustum",
                             "integration_step_mm": 1.0},
    ("pouch", "curve"): {"l4_mm": 118.0, "l5_mm": 88.0, "ld_mm": 180.0, "seal_mm": 7.5,
                         "pressure_kpa": 90.0, "samples": 101, "h_min_mm": 0.0,
                         "h_max_mm": None},
    ("haa", "torque"): {"pressure_kpa": 90.0, "beta_range_deg": [0.0, 210.0], "samples": 211,
                        "d_mm": 7.5, "l4_mm": 118.0, "l5_mm": 88.0, "ld_mm": 180.0,
                        "seal_mm": 7.5},
    ("pneumo", "step"): {"volume_ml": 555.0, "pref_kpa": 90.0, "supply_kpa": 130.0,
                         "duration_s": 6.0, "dt_s": 1e-3},
    ("pneumo", "bode"): {"volume_ml": 714.0, "mean_kpa": 20.0, "amp_kpa": 10.0,
                         "fmin_hz": 0.05, "fmax_hz": 10.0, "points": 25,
                         "supply_kpa": 130.0},
    ("design", "optimize"): {"frontier": None},
    ("sim", "assist"): {"arm": None, "surface": None, "schedule": None,
                        "pressure_kpa": 80.0, "dt_s": 0.01},
    ("emg", "run"): {"recordings": None, "mvc": None, "conditions": None, "out": None},
}


def build_parser() -> argparse.ArgumentParser:
    g = _globals()
    p = _Parser(prog="softexo", description=__doc__.splitlines()[0])
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    geo = groups.add_parser("geometry").add_subparsers(dest="action", required=True,
                                                       parser_class=_Parser)
    s = geo.add_parser("volume", parents=[g], help="inflated volume of a profile")
    s.add_argument("--profile", help="UCAA, SSAA or a JSON profile file")
    s.add_argument("--fill-factor", dest="fill_factor", type=float)
    s.add_argument("--method", choices=("frustum", "numeric"))
    s.add_argument("--step", dest="integration_step_mm", type=float)

    pc = groups.add_parser("pouch").add_subparsers(dest="action", required=True,
                                                   parser_class=_Parser)
    s = pc.add_parser("curve", parents=[g], help="force-height curve of a pouch motor")
    _pouch_args(s)
    s.add_argument("--pressure", dest="pressure_kpa", type=float)
    s.add_argument("--samples", type=int)
    s.add_argument("--h-min", dest="h_min_mm", type=float)
    s.add_argument("--h-max", dest="h_max_mm", type=float)

    hc = groups.add_parser("haa").add_subparsers(dest="action", required=True,
                                                 parser_class=_Parser)
    s = hc.add_parser("torque", parents=[g], help="torque-angle curve of the HAA")
    _pouch_args(s)
    s.add_argument("--pressure", dest="pressure_kpa", type=float)
    s.add_argument("--beta-range", dest="beta_range_deg", type=float, nargs=2)
    s.add_argument("--samples", type=int)
    s.add_argument("--d", dest="d_mm", type=float)

    pn = groups.add_parser("pneumo").add_subparsers(dest="action", required=True,
                                                    parser_class=_Parser)
    s = pn.add_parser("step", parents=[g], help="pulse response of the filling model")
    s.add_argument("--volume-ml", dest="volume_ml", type=float)
    s.add_argument("--pref", dest="pref_kpa", type=float)
    s.add_argument("--supply", dest="supply_kpa", type=float)
    s.add_argument("--duration", dest="duration_s", type=float)
    s.add_argument("--dt", dest="dt_s", type=float)
    s = pn.add_parser("bode", parents=[g], help="sinusoidal magnitude response")
    s.add_argument("--volume-ml", dest="volume_ml", type=float)
    s.add_argument("--mean", dest="mean_kpa", type=float)
    s.add_argument("--amp", dest="amp_kpa", type=float)
    s.add_argument("--fmin", dest="fmin_hz", type=float)
    s.add_argument("--fmax", dest="fmax_hz", type=float)
    s.add_argument("--points", type=int)
    s.add_argument("--supply", dest="supply_kpa", type=float)

    dc = groups.add_parser("design").add_subparsers(dest="action", required=True,
                                                    parser_class=_Parser)
    s = dc.add_parser("optimize", parents=[g], help="minimum-volume spindle profile")
    s.add_argument("--frontier", help="CSV path for the explored designs")

    sc = groups.add_parser("sim").add_subparsers(dest="action", required=True,
                                                 parser_class=_Parser)
    s = sc.add_parser("assist", parents=[g], help="assistance over one protocol repetition")
    s.add_argument("--arm", help="JSON: body_mass_kg, height_cm, load_kg, coefficients")
    s.add_argument("--surface", help="moment surface CSV (default: bundled synthetic)")
    s.add_argument("--schedule", help="pressure schedule CSV t_s,pressure_kpa")
    s.add_argument("--pressure", dest="pressure_kpa", type=float,
                   help="protocol pressure when no schedule is given")
    s.add_argument("--dt", dest="dt_s", type=float)

    ec = groups.add_parser("emg").add_subparsers(dest="action", required=True,
                                                 parser_class=_Parser)
    s = ec.add_parser("run", parents=[g], help="EMG features and statistics")
    s.add_argument("--recordings", help="directory of recording CSVs")
    s.add_argument("--mvc", help="one-row MVC CSV")
    s.add_argument("--conditions", help="CSV: file,subject,condition")
    s.add_argument("--out", help="report JSON path (default stdout)")
    return p


def _pouch_args(s):
    s.add_argument("--l4", dest="l4_mm", type=float)
    s.add_argument("--l5", dest="l5_mm", type=float)
    s.add_argument("--ld", dest="ld_mm", type=float)
    s.add_argument("--seal", dest="seal_mm", type=float)


def _resolve(ns) -> dict:
    """Merge built-in defaults, the config file and explicit flags (flags win)."""
    key = (ns.group, ns.action)
    defaults = dict(DEFAULTS[key])
    opts = {k: v for k, v in vars(ns).items() if k not in ("group", "action", "config")}
    file_cfg = {}
    if ns.config and key != ("design", "optimize"):
        file_cfg = json.loads(Path(ns.config).read_text())
        unknown = set(file_cfg) - set(defaults) - GLOBAL_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys for {' '.join(key)}: {sorted(unknown)}")
    merged = {**defaults, **{"format": None, "plot": "none", "seed": 0, "out_dir": None}}
    merged.update(file_cfg)
    merged.update({k: v for k, v in opts.items() if v is not None})
    if merged["out_dir"] is None:
        merged["out_dir"] = os.environ.get(OUTPUT_DIR_ENV)
    merged["config"] = ns.config
    return merged


def _emit(text: str, name: str, o: dict):
    if o["out_dir"]:
        d = Path(o["out_dir"])
        d.mkdir(parents=True, exist_ok=True)
        (d / name).write_text(text)
    else:
        sys.stdout.write(text)


def _plot_path(o: dict, name: str) -> Path:
    return Path(o["out_dir"] or ".") / name


def _pouch_geom(o):
    return geometry.PouchGeometry(o["l4_mm"], o["l5_mm"], o["ld_mm"], o["seal_mm"])


def cmd_geometry_volume(o):
    prof = geometry.load_profile(o["profile"])
    k = o["fill_factor"] if o["fill_factor"] is not None else geometry.calibrated_fill_factor()
    cfg = geometry.VolumeModelConfig(k, o["integration_step_mm"])
    vol = geometry.inflated_volume(prof, cfg, o["method"])
    params = geometry.profile_to_mapping(prof)
    if o["format"] == "csv":
        _emit(rows_to_csv([{"volume_ml": vol, "fill_factor": k, **params}]), "volume.csv", o)
    else:
        _emit(to_json({"volume_ml": vol, "fill_factor": k, "method": o["method"],
                       "params": params}), "volume.json", o)


def cmd_pouch_curve(o):
    g = _pouch_geom(o)
    h_max = o["h_max_mm"] if o["h_max_mm"] is not None else 2 * g.R4
    rows = pouch.contact_table(g, o["pressure_kpa"], o["h_min_mm"], h_max, o["samples"])
    _write_table(rows, "pouch_curve", o)
    if o["plot"] == "svg":
        emit_plot([Series(f"{o['pressure_kpa']:g} kPa", [r["h_mm"] for r in rows],
                          [r["F_N"] for r in rows])],
                  PlotStyle("Pouch force-height", "h (mm)", "F (N)"),
                  _plot_path(o, "pouch_curve.svg"))


def cmd_haa_torque(o):
    a = haa.HaaAssembly(_pouch_geom(o), o["d_mm"])
    lo, hi = o["beta_range_deg"]
    rows = haa.torque_table(a, o["pressure_kpa"], lo, hi, o["samples"])
    _write_table(rows, "haa_torque", o)
    if o["plot"] == "svg":
        emit_plot([Series(f"{o['pressure_kpa']:g} kPa", [r["beta_deg"] for r in rows],
                          [r["M_Nm"] for r in rows])],
                  PlotStyle("HAA torque-angle", "beta (deg)", "M (N*m)"),
                  _plot_path(o, "haa_torque.svg"))


def _circuit(o):
    base = pneumatics.reference_circuit(o["volume_ml"])
    from dataclasses import replace
    return replace(base, p_supply=o["supply_kpa"])


def cmd_pneumo_step(o):
    c = _circuit(o)
    res = pneumatics.step_response(c, o["pref_kpa"], o["duration_s"], o["dt_s"])
    if o["format"] == "json":
        _emit(to_json({"rise_time_10_90_s": res.rise_time_10_90,
                       "fall_time_90_10_s": res.fall_time_90_10, "settled": res.settled,
                       "degenerate": res.degenerate, "p_ref_kpa": res.p_ref,
                       "volume_ml": c.v_act}), "step.json", o)
    else:
        rows = [{"t_s": float(t), "p_kpa": float(p)} for t, p in zip(res.t, res.p)]
        _emit(rows_to_csv(rows), "step.csv", o)
    if o["plot"] == "svg" and not res.degenerate:
        step_plot(res, _plot_path(o, "step.svg"))


def cmd_pneumo_bode(o):
    import numpy as np

    c = _circuit(o)
    freqs = np.geomspace(o["fmin_hz"], o["fmax_hz"], o["points"])
    resp = pneumatics.frequency_response(c, o["mean_kpa"], o["amp_kpa"], freqs)
    try:
        fc = pneumatics.cutoff_minus3db(resp)
    except SoftExoError:
        fc = None
    if o["format"] == "json":
        _emit(to_json({"cutoff_hz": fc, "mean_kpa": o["mean_kpa"], "amp_kpa": o["amp_kpa"],
                       "response": [{"f_hz": f, "magnitude_db": m} for f, m in resp]}),
              "bode.json", o)
    else:
        _emit(rows_to_csv([{"f_hz": f, "magnitude_db": m} for f, m in resp]), "bode.csv", o)
    if o["plot"] == "svg":
        emit_plot([Series(f"{o['mean_kpa']:g} kPa mean", [f for f, _ in resp],
                          [m for _, m in resp])],
                  PlotStyle("Magnitude response", "f (Hz)", "dB", hlines=[(-3.0, "-3 dB")],
                            logx=True), _plot_path(o, "bode.svg"))


def cmd_design_optimize(o):
    c = design.load_constraints(o["config"]) if o["config"] else design.DesignConstraints()
    rep = design.optimize_spindle(c)
    _emit(to_json(rep.to_dict()), "design_report.json", o)
    rows = design.frontier_rows(rep)
    frontier = o["frontier"] or (Path(o["out_dir"]) / "design_frontier.csv"
                                 if o["out_dir"] else None)
    if frontier and rows:
        Path(frontier).write_text(rows_to_csv(rows))


def cmd_sim_assist(o):
    if o["arm"]:
        data = json.loads(Path(o["arm"]).read_text())
        known = {"body_mass_kg", "height_cm", "load_kg", "coefficients"}
        if set(data) - known:
            raise ConfigError(f"unknown arm keys: {sorted(set(data) - known)}")
        arm = biomech.anthropometric_arm(data["body_mass_kg"], data["height_cm"],
                                         data.get("load_kg", 0.0), data.get("coefficients"))
    else:
        arm = biomech.anthropometric_arm(65.4, 166.9)
    surf = biomech.MomentSurface.read_csv(o["surface"]) if o["surface"] \
        else biomech.bundled_surface()
    sched = biomech.PressureSchedule.read_csv(o["schedule"]) if o["schedule"] \
        else biomech.protocol_schedule(o["pressure_kpa"])
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        samples = biomech.assistance_profile(arm, surf, sched, o["dt_s"])
    rows = [{"t_s": s.t, "angle_deg": s.angle, "pressure_kpa": s.pressure,
             "m_gravity_nm": s.m_gravity, "m_actuator_nm": s.m_actuator,
             "residual_nm": s.residual, "assist_fraction": s.assist_fraction,
             "clamped": s.clamped} for s in samples]
    _write_table(rows, "assist", o)
    if o["plot"] == "svg":
        t = [r["t_s"] for r in rows]
        emit_plot([Series("gravity", t, [r["m_gravity_nm"] for r in rows]),
                   Series("actuator", t, [r["m_actuator_nm"] for r in rows]),
                   Series("residual", t, [r["residual_nm"] for r in rows])],
                  PlotStyle(f"Assistance ({surf.provenance} surface)", "t (s)", "N*m"),
                  _plot_path(o, "assist.svg"))


def cmd_emg_run(o):
    for k in ("recordings", "mvc", "conditions"):
        if not o[k]:
            raise ConfigError(f"emg run needs --{k}")
    mvc = emg_stats.read_mvc(o["mvc"])
    rec_dir = Path(o["recordings"])
    with open(o["conditions"], newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or {"file", "subject", "condition"} - set(rows[0]):
        raise ConfigError("conditions map needs columns file,subject,condition")
    conditions, subjects, features = [], [], {}
    for r in rows:
        if r["condition"] not in conditions:
            conditions.append(r["condition"])
        if r["subject"] not in subjects:
            subjects.append(r["subject"])
    # files are independent; assemble in map order for a deterministic report
    for r in rows:
        features[(r["subject"], r["condition"])] = emg_stats.recording_features(
            rec_dir / r["file"], mvc)
    subjects = sorted(subjects)
    report = {"conditions": conditions, "subjects": subjects,
              "thresholds": {"alpha": emg_stats.ALPHA,
                             "correction": "bonferroni over pairwise comparisons"},
              "features": {f"{s}/{c}": features[(s, c)] for s, c in sorted(features)},
              "muscles": emg_stats.analyse_conditions(features, conditions, subjects)}
    text = to_json(report)
    if o["out"]:
        Path(o["out"]).write_text(text)
    else:
        _emit(text, "emg_report.json", o)


def _write_table(rows, stem, o):
    if o["format"] == "json":
        _emit(to_json(rows), f"{stem}.json", o)
    else:
        _emit(rows_to_csv(rows), f"{stem}.csv", o)


COMMANDS = {
    ("geometry", "volume"): cmd_geometry_volume,
    ("pouch", "curve"): cmd_pouch_curve,
    ("haa", "torque"): cmd_haa_torque,
    ("pneumo", "step"): cmd_pneumo_step,
    ("pneumo", "bode"): cmd_pneumo_bode,
    ("design", "optimize"): cmd_design_optimize,
    ("sim", "assist"): cmd_sim_assist,
    ("emg", "run"): cmd_emg_run,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError:
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        opts = _resolve(ns)
        COMMANDS[(ns.group, ns.action)](opts)
    except SoftExoError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
