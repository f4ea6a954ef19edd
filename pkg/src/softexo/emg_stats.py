"""sEMG envelope pipeline and paired nonparametric statistics.

Envelope: zero-phase band-pass, full-wave rectification, centred moving
average, division by the MVC reference (result in %MVC).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import signal, stats

from .errors import ConfigError, DataError, DomainError

MUSCLES = ("BIC", "SS", "UT", "PM", "AD", "PD", "MD")
ALPHA = 0.05
EXACT_MAX_N = 25


@dataclass
class EmgRecording:
    sample_rate: float
    channels: dict  # name -> 1-D array
    markers: list = field(default_factory=list)  # [(onset_s, offset_s), ...]

    def __post_init__(self):
        if not self.sample_rate > 0:
            raise DataError("sample rate must be positive")
        if not self.channels:
            raise DataError("recording has no channels")
        self.channels = {k: np.asarray(v, dtype=float) for k, v in self.channels.items()}
        lengths = {v.size for v in self.channels.values()}
        if len(lengths) != 1:
            raise DataError("channels differ in length")
        validate_markers(self.markers, self.duration)

    @property
    def duration(self) -> float:
        return next(iter(self.channels.values())).size / self.sample_rate


@dataclass(frozen=True)
class FilterParams:
    low_hz: float = 20.0
    high_hz: float = 450.0
    order: int = 4
    window_s: float = 0.2


def validate_markers(markers, duration=None):
    flat = []
    for pair in markers:
        if len(pair) != 2:
            raise DataError("markers must come in (onset, offset) pairs")
        on, off = pair
        if not off > on:
            raise DataError(f"marker offset {off} not after onset {on}")
        flat.extend((on, off))
    # within a pair offset > onset is checked above; pairs may touch
    if any(b < a for a, b in zip(flat, flat[1:])):
        raise DataError("markers overlap or are not increasing")
    if flat and (flat[0] < 0 or (duration is not None and flat[-1] > duration)):
        raise DataError("markers fall outside the recording")


def _bandpass(x, fs, p: FilterParams):
    nyq = fs / 2.0
    high = min(p.high_hz, 0.95 * nyq)
    if p.low_hz >= high:
        raise ConfigError(
            f"sample rate {fs} Hz too low for a {p.low_hz}-{p.high_hz} Hz band")
    # butter(N) band-pass has order 2N; filtfilt doubles it again in magnitude
    sos = signal.butter(p.order // 2, [p.low_hz, high], btype="bandpass", fs=fs,
                        output="sos")
    return signal.sosfiltfilt(sos, x)


def moving_average(x, n: int):
    """Centred moving average over ``n`` samples; edges average what is available."""
    if n <= 1:
        return np.asarray(x, dtype=float).copy()
    x = np.asarray(x, dtype=float)
    c = np.concatenate(([0.0], np.cumsum(x)))
    half_lo = (n - 1) // 2
    half_hi = n - 1 - half_lo
    idx = np.arange(x.size)
    lo = np.maximum(idx - half_lo, 0)
    hi = np.minimum(idx + half_hi + 1, x.size)
    return (c[hi] - c[lo]) / (hi - lo)


def envelope(x, fs: float, mvc: float, params: FilterParams = FilterParams()):
    """%MVC envelope of one channel."""
    if not mvc > 0:
        raise DataError("MVC reference must be positive")
    rect = np.abs(_bandpass(np.asarray(x, dtype=float), fs, params))
    smooth = moving_average(rect, int(round(params.window_s * fs)))
    return 100.0 * smooth / mvc


def preprocess(r: EmgRecording, mvc: dict, params: FilterParams = FilterParams()) -> dict:
    missing = set(r.channels) - set(mvc)
    if missing:
        raise DataError(f"no MVC reference for {sorted(missing)}")
    return {name: envelope(x, r.sample_rate, mvc[name], params)
            for name, x in r.channels.items()}


def segment_repetitions(env: dict, markers, sample_rate: float) -> list[dict]:
    """Per-repetition mean of each channel between (onset, offset) markers."""
    validate_markers(markers)
    out = []
    for on, off in markers:
        i0, i1 = int(round(on * sample_rate)), int(round(off * sample_rate))
        seg = {}
        for name, x in env.items():
            if i1 > x.size:
                raise DataError("marker beyond the end of the envelope")
            seg[name] = float(np.mean(x[i0:max(i1, i0 + 1)]))
        out.append(seg)
    return out


def condition_mean(segment_means) -> float:
    vals = list(segment_means)
    if not vals:
        raise DataError("no segments to average")
    return float(np.mean(vals))


# statistics ---------------------------------------------------------------

@dataclass(frozen=True)
class StatResult:
    p_value: float | None
    test_statistic: float | None
    effect_size_d: float | None = None
    reduction_percent: float | None = None
    n_comparisons: int = 1
    n: int = 0
    test: str = ""

    @property
    def undefined(self) -> bool:
        return self.p_value is None

    @property
    def alpha_corrected(self) -> float:
        return ALPHA / self.n_comparisons

    @property
    def significant_raw(self) -> bool:
        return self.p_value is not None and self.p_value < ALPHA

    @property
    def significant_corrected(self) -> bool:
        return self.p_value is not None and self.p_value < self.alpha_corrected

    @property
    def trend(self) -> bool:
        return self.significant_raw and not self.significant_corrected

    def to_dict(self) -> dict:
        return {
            "test": self.test, "n": self.n, "p_value": self.p_value,
            "p_reported": format_p(self.p_value) if self.p_value is not None else None,
            "test_statistic": self.test_statistic, "effect_size_d": self.effect_size_d,
            "reduction_percent": self.reduction_percent,
            "significant_raw": self.significant_raw,
            "significant_corrected": self.significant_corrected, "trend": self.trend,
            "alpha": ALPHA, "alpha_corrected": self.alpha_corrected,
            "n_comparisons": self.n_comparisons,
        }


def format_p(p: float) -> str:
    """Four decimals, trailing zeros dropped (0.001953 -> '0.002')."""
    return f"{round(p, 4):.4f}".rstrip("0").rstrip(".") if p < 1 else "1"


def _midranks(values):
    return stats.rankdata(values, method="average")


def signed_rank_null_counts(doubled_ranks) -> dict:
    """Number of sign assignments giving each signed rank sum (in doubled units)."""
    counts = {0: 1}
    for r in doubled_ranks:
        nxt = {}
        for s, c in counts.items():
            nxt[s + r] = nxt.get(s + r, 0) + c
            nxt[s - r] = nxt.get(s - r, 0) + c
        counts = nxt
    return counts


def wilcoxon_signed_rank(paired) -> StatResult:
    """Two-tailed Wilcoxon signed-rank test on (a, b) pairs.

    Zero differences are dropped and tied magnitudes share their mid-rank.
    The statistic is the signed rank sum of ``a - b``. For up to 25 nonzero
    differences the p-value counts all 2**n equally likely sign assignments
    of the observed ranks; above that a tie-corrected normal approximation
    is used.
    """
    pairs = [(float(a), float(b)) for a, b in paired]
    if not pairs:
        raise DataError("need at least one pair")
    d = np.array([a - b for a, b in pairs])
    d = d[d != 0]
    n = d.size
    if n == 0:
        return StatResult(None, None, n=0, test="wilcoxon")
    ranks = _midranks(np.abs(d))
    doubled = np.rint(2 * ranks).astype(int)
    s_obs = int(np.sum(np.sign(d) * doubled))
    if n <= EXACT_MAX_N:
        counts = signed_rank_null_counts(doubled.tolist())
        extreme = sum(c for s, c in counts.items() if abs(s) >= abs(s_obs))
        p = extreme / 2 ** n
    else:
        var = float(np.sum(ranks ** 2))  # variance of the signed rank sum
        z = (s_obs / 2.0) / math.sqrt(var)
        p = float(2 * stats.norm.sf(abs(z)))
    return StatResult(min(p, 1.0), s_obs / 2.0, n=n, test="wilcoxon")


def friedman(matrix) -> StatResult:
    """Friedman chi-square over an ``n subjects x k conditions`` matrix."""
    x = np.asarray(matrix, dtype=float)
    if x.ndim != 2:
        raise DataError("matrix must be two-dimensional")
    n, k = x.shape
    if n < 2 or k < 3:
        raise DataError("Friedman test needs n >= 2 subjects and k >= 3 conditions")
    ranks = np.apply_along_axis(_midranks, 1, x)
    r_sum = ranks.sum(axis=0)
    q = 12.0 / (n * k * (k + 1)) * np.sum(r_sum ** 2) - 3.0 * n * (k + 1)
    ties = 0.0
    for row in x:
        _, t = np.unique(row, return_counts=True)
        ties += float(np.sum(t ** 3 - t))
    denom = 1.0 - ties / (n * (k ** 3 - k))
    if denom <= 1e-12:
        return StatResult(1.0, 0.0, n=n, test="friedman")
    q = max(q / denom, 0.0)
    return StatResult(float(stats.chi2.sf(q, k - 1)), float(q), n=n, test="friedman")


def bonferroni(p_values, m: int) -> list[dict]:
    if m < 1:
        raise DomainError("m must be >= 1")
    thr = ALPHA / m
    return [{"p": p, "significant": p < thr, "trend": thr <= p < ALPHA} for p in p_values]


def effect_size_d(paired) -> float | None:
    """Mean over sample SD of ``a - b``; ``None`` when the SD is zero."""
    d = np.array([float(a) - float(b) for a, b in paired])
    if d.size < 2:
        raise DataError("effect size needs at least two pairs")
    sd = float(np.std(d, ddof=1))
    if sd == 0:
        return None
    return float(np.mean(d)) / sd


def reduction(no_exo: float, exo: float) -> float:
    """Percent reduction from baseline ``no_exo`` to ``exo``; may be negative."""
    if not no_exo > 0:
        raise DomainError("baseline must be positive")
    return 100.0 * (no_exo - exo) / no_exo


def compare(a, b, n_comparisons: int = 1) -> StatResult:
    """Wilcoxon test, effect size and median reduction for condition ``a`` vs ``b``."""
    pairs = list(zip(a, b))
    w = wilcoxon_signed_rank(pairs)
    d = effect_size_d(pairs) if len(pairs) >= 2 else None
    base = float(np.median(a))
    red = reduction(base, float(np.median(b))) if base > 0 else None
    return StatResult(w.p_value, w.test_statistic, d, red, n_comparisons, w.n, "wilcoxon")


# file ingestion -----------------------------------------------------------

def read_recording(path, markers_path=None) -> EmgRecording:
    """CSV with a ``time_s`` column followed by one column per muscle.

    Markers are read from ``<stem>.markers.csv`` (``onset_s,offset_s``) when
    present; otherwise the whole recording is a single segment.
    """
    path = Path(path)
    data = np.genfromtxt(path, delimiter=",", names=True)
    names = data.dtype.names
    if not names or names[0] != "time_s" or len(names) < 2:
        raise DataError(f"{path}: first column must be time_s followed by channels")
    t = np.atleast_1d(data["time_s"])
    if t.size < 2 or np.any(np.diff(t) <= 0):
        raise DataError(f"{path}: time column must be increasing")
    fs = (t.size - 1) / (t[-1] - t[0])
    chans = {n: np.atleast_1d(data[n]) for n in names[1:]}
    markers_path = Path(markers_path) if markers_path else \
        path.with_name(path.stem + ".markers.csv")
    if markers_path.exists():
        m = np.atleast_2d(np.genfromtxt(markers_path, delimiter=",", skip_header=1))
        markers = [(float(a) - t[0], float(b) - t[0]) for a, b in m]
    else:
        markers = [(0.0, t.size / fs)]
    return EmgRecording(fs, chans, markers)


def read_mvc(path) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise DataError(f"{path}: MVC file needs a header and one value row")
    mvc = {k.strip(): float(v) for k, v in zip(rows[0], rows[1])}
    if any(v <= 0 for v in mvc.values()):
        raise DataError("MVC values must be positive")
    return mvc


def recording_features(path, mvc: dict, params: FilterParams = FilterParams()) -> dict:
    """Per-muscle mean %MVC over the repetitions of one recording."""
    rec = read_recording(path)
    env = preprocess(rec, mvc, params)
    segs = segment_repetitions(env, rec.markers, rec.sample_rate)
    return {name: condition_mean(s[name] for s in segs) for name in env}


def analyse_conditions(features: dict, conditions: list, subjects: list) -> dict:
    """Statistics per muscle for ``features[(subject, condition)][muscle]``.

    Two conditions: one Wilcoxon test. Three or more: Friedman, then all
    pairwise Wilcoxon tests judged at a Bonferroni-corrected level. The first
    condition is the baseline for reductions.
    """
    muscles = sorted({m for f in features.values() for m in f})
    report = {}
    for muscle in muscles:
        table = np.array([[features[(s, c)][muscle] for c in conditions] for s in subjects])
        entry = {}
        if len(conditions) >= 3:
            entry["friedman"] = friedman(table).to_dict()
        pairs = [(i, j) for i in range(len(conditions)) for j in range(i + 1, len(conditions))]
        m = len(pairs) if len(conditions) >= 3 else 1
        entry["pairwise"] = []
        for i, j in pairs:
            res = compare(table[:, i], table[:, j], m)
            entry["pairwise"].append({"a": conditions[i], "b": conditions[j], **res.to_dict()})
        report[muscle] = entry
    return report
