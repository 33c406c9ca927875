"""Plotted observables, sliding-window features and the five-phase classifier.

The classifier works on :class:`ObservableSeries`, the wavefunction components
``psi_up``, ``Re psi_down``, ``Im psi_down`` and the memory fidelity
``w2_at = |<psi_{t-a}|psi_t>|^2`` sampled on the output grid.

Phase labels are decided per sliding window:

* ``P1_FixedPoint``: ``w2_at`` pinned at one and the state frozen.
* ``P2_RegularOscConstTPF``: ``w2_at`` almost constant while the state keeps
  oscillating with a sharp period.
* ``P5_BiStateMetastable``: the series dwells at one of two levels and hops
  quickly between them. Dwell times are usually longer than one window, so the
  two-level analysis runs on a longer context span centred on the window.
* ``P4_Structured``: periodic ``w2_at`` with several well separated extrema
  per period.
* ``P3_Unstructured``: anything else.

All thresholds live in :class:`ClassifierSettings`.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import find_peaks

from .errors import QMMError, ValidationError
from .hamiltonians import CouplingSet
from .integrator import RunConfig, Trajectory, simulate
from .qubit import angles_from_vectors, tpf_norm_sq_many


class InsufficientDataError(QMMError, ValueError):
    """The series is too short for the requested window analysis."""


class PhaseLabel(str, enum.Enum):
    P1_FixedPoint = "P1_FixedPoint"
    P2_RegularOscConstTPF = "P2_RegularOscConstTPF"
    P3_Unstructured = "P3_Unstructured"
    P4_Structured = "P4_Structured"
    P5_BiStateMetastable = "P5_BiStateMetastable"
    Undecided = "Undecided"

    @property
    def short(self) -> str:
        return self.value.split("_", 1)[0]


@dataclass(frozen=True)
class ClassifierSettings:
    """Every number the classifier depends on, in one place."""

    window_in_a: float = 50.0
    stride_in_a: float = 25.0
    burn_in_fraction: float = 0.25
    fixed_std: float = 1e-3
    fixed_mean: float = 0.999
    fixed_amplitude: float = 1e-3
    const_tpf_std: float = 5e-3
    oscillation_amplitude: float = 0.1
    acf_peak: float = 0.8
    min_extrema: int = 2
    extremum_prominence: float = 0.1
    frozen_std: float = 1e-6
    min_occupancy: float = 0.2
    min_dwell_in_a: float = 20.0
    max_transit_in_a: float = 5.0
    level_band: float = 0.25
    min_level_gap: float = 0.05
    smoothing_in_a: float = 1.0
    bistability_spans_in_a: tuple[float, ...] = (500.0, 1000.0, 2000.0, 4000.0)
    persistence_windows: int = 10

    def __post_init__(self):
        if self.window_in_a < 10.0:
            raise ValidationError("window length must be at least 10a")
        if self.stride_in_a <= 0.0:
            raise ValidationError("window stride must be positive")
        if not 0.0 <= self.burn_in_fraction < 1.0:
            raise ValidationError("burn_in_fraction must lie in [0, 1)")


DEFAULT_SETTINGS = ClassifierSettings()


@dataclass(frozen=True)
class ObservableSeries:
    """Observables on the output grid.

    ``w2_*`` entries are NaN while the corresponding delayed state lies before
    ``t = 0`` (inside the memory pool). ``w2_bt`` and ``w2_ab`` are only set
    for two-delay models.
    """

    t: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    psi_up: np.ndarray
    re_psi_down: np.ndarray
    im_psi_down: np.ndarray
    w2_at: np.ndarray
    a: float
    w2_bt: Optional[np.ndarray] = None
    w2_ab: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def components(self) -> np.ndarray:
        """``(n, 3)`` array of ``psi_up``, ``Re psi_down`` and ``Im psi_down``."""
        return np.stack([self.psi_up, self.re_psi_down, self.im_psi_down], axis=-1)

    def shifted(self, dt: float) -> "ObservableSeries":
        """The same samples with every time moved by ``dt``."""
        return replace(self, t=self.t + dt)


def components_from_vectors(r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ket components ``cos(theta/2)`` and ``sin(theta/2) exp(i phi)`` of unit vectors."""
    theta, phi = angles_from_vectors(r)
    half = 0.5 * theta
    up = np.cos(half)
    down = np.sin(half)
    return up, down * np.cos(phi), down * np.sin(phi)


def extract_series(traj: Trajectory) -> ObservableSeries:
    r = traj.r
    up, re_d, im_d = components_from_vectors(r)
    pool = ~np.all(np.isfinite(traj.r_delay_a), axis=1)

    def fidelity(r1, r2):
        out = np.full(len(r), np.nan)
        ok = np.all(np.isfinite(r1), axis=1) & np.all(np.isfinite(r2), axis=1)
        out[ok] = tpf_norm_sq_many(r1[ok], r2[ok])
        return out

    w2_at = fidelity(traj.r_delay_a, r)
    w2_at[pool] = np.nan
    w2_bt = w2_ab = None
    if traj.config.model == "qmm33":
        w2_bt = fidelity(traj.r_delay_b, r)
        w2_ab = fidelity(traj.r_delay_a, traj.r_delay_b)
    return ObservableSeries(t=traj.t.copy(), theta=traj.theta.copy(), phi=traj.phi.copy(),
                            psi_up=up, re_psi_down=re_d, im_psi_down=im_d, w2_at=w2_at,
                            a=traj.a, w2_bt=w2_bt, w2_ab=w2_ab)


# ---------------------------------------------------------------------------
# elementary series statistics


def _acf(x: np.ndarray) -> np.ndarray:
    """Unbiased, normalised autocorrelation (lag 0 equals 1)."""
    x = np.asarray(x, float) - np.mean(x)
    n = len(x)
    var = float(np.dot(x, x)) / n
    if n < 4 or var <= 1e-300:
        return np.zeros(max(n // 2, 1))
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    ac = np.fft.irfft(f * np.conj(f), nfft)[:n]
    ac /= np.arange(n, 0, -1)
    return ac[: n // 2] / var


def dominant_period(x: np.ndarray, dt: float, min_peak: float = 0.3) -> tuple[Optional[float], float]:
    """Period of the highest autocorrelation peak after the first zero crossing.

    Returns ``(period, peak_value)``; the period is ``None`` when the series is
    constant or the autocorrelation never recovers above ``min_peak``.
    """
    ac = _acf(x)
    if not np.any(ac):
        return None, 0.0
    neg = np.nonzero(ac < 0.0)[0]
    if len(neg) == 0:
        return None, 0.0
    start = neg[0]
    peaks, _ = find_peaks(ac[start:])
    if len(peaks) == 0:
        return None, 0.0
    peaks = peaks + start
    best = peaks[np.argmax(ac[peaks])]
    top = float(ac[best])
    # the first peak within 0.9 of the best one is the fundamental
    for k in peaks:
        if ac[k] >= 0.9 * top:
            best = k
            break
    if ac[best] < min_peak:
        return None, float(ac[best])
    shift = 0.0
    if 0 < best < len(ac) - 1:
        y0, y1, y2 = ac[best - 1], ac[best], ac[best + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0.0:
            shift = 0.5 * (y0 - y2) / denom
    return float((best + shift) * dt), float(ac[best])


def count_extrema(x: np.ndarray, prominence_fraction: float) -> int:
    """Maxima plus minima whose prominence exceeds a fraction of the range."""
    span = float(np.ptp(x))
    if span <= 0.0:
        return 0
    prom = prominence_fraction * span
    n_max = len(find_peaks(x, prominence=prom)[0])
    n_min = len(find_peaks(-x, prominence=prom)[0])
    return n_max + n_min


def moving_average(x: np.ndarray, width: int) -> np.ndarray:
    if width <= 1:
        return np.asarray(x, float).copy()
    kernel = np.ones(width) / width
    pad = width // 2
    xp = np.pad(np.asarray(x, float), (pad, width - 1 - pad), mode="edge")
    return np.convolve(xp, kernel, mode="valid")


@dataclass(frozen=True)
class Bistability:
    level_lo: float
    level_hi: float
    mean_dwell: float
    mean_transit: float
    switch_times: tuple[float, ...] = ()
    signal: str = "w2_at"

    @property
    def longest_dwell(self) -> float:
        s = self.switch_times
        if len(s) < 2:
            return self.mean_dwell
        return float(np.max(np.diff(s)))


def two_means_split(x: np.ndarray) -> tuple[float, float, float]:
    """Optimal one-dimensional two-means split: ``(lo_centre, hi_centre, lo_fraction)``."""
    xs = np.sort(np.asarray(x, float))
    n = len(xs)
    if n < 2 or xs[0] == xs[-1]:
        c = float(xs[0]) if n else 0.0
        return c, c, 1.0
    cs = np.cumsum(xs)
    cs2 = np.cumsum(xs * xs)
    k = np.arange(1, n)
    left_sse = cs2[:-1] - cs[:-1] ** 2 / k
    right_sse = (cs2[-1] - cs2[:-1]) - (cs[-1] - cs[:-1]) ** 2 / (n - k)
    i = int(np.argmin(left_sse + right_sse))
    lo = cs[i] / (i + 1)
    hi = (cs[-1] - cs[i]) / (n - i - 1)
    return float(lo), float(hi), (i + 1) / n


def two_level_analysis(t: np.ndarray, x: np.ndarray, a: float,
                       settings: ClassifierSettings = DEFAULT_SETTINGS,
                       signal: str = "w2_at") -> Optional[Bistability]:
    """Detect dwell-and-hop behaviour between two levels of ``x``.

    The series is smoothed over ``smoothing_in_a``, split by two-means and
    tracked with hysteresis: a sample belongs to a level when it lies within
    ``level_band`` times the level gap of that level's centre. A switch is
    recorded each time the tracked level changes. The transit of a switch is
    the time spent between the two bands, a dwell the time between switches.
    """
    t = np.asarray(t, float)
    x = np.asarray(x, float)
    ok = np.isfinite(x)
    t, x = t[ok], x[ok]
    if len(x) < 8:
        return None
    dt = float(np.median(np.diff(t)))
    xs = moving_average(x, max(1, int(round(settings.smoothing_in_a * a / dt))))
    lo, hi, frac_lo = two_means_split(xs)
    gap = hi - lo
    if gap < settings.min_level_gap:
        return None
    if min(frac_lo, 1.0 - frac_lo) < settings.min_occupancy:
        return None
    band = settings.level_band * gap
    state = np.where(xs <= lo + band, -1, np.where(xs >= hi - band, 1, 0))
    idx = np.nonzero(state)[0]
    if len(idx) < 2:
        return None
    st = state[idx]
    change = np.nonzero(st[1:] != st[:-1])[0]
    if len(change) < 2:
        return None
    leave = t[idx[change]]
    arrive = t[idx[change + 1]]
    transits = arrive - leave
    switch_times = 0.5 * (leave + arrive)
    dwells = np.diff(switch_times)
    mean_dwell = float(np.mean(dwells))
    mean_transit = float(np.mean(transits))
    if mean_dwell < settings.min_dwell_in_a * a or mean_transit > settings.max_transit_in_a * a:
        return None
    return Bistability(lo, hi, mean_dwell, max(mean_transit, dt), tuple(switch_times.tolist()),
                       signal)


# ---------------------------------------------------------------------------
# windows


@dataclass(frozen=True)
class WindowFeatures:
    index: int
    t_start: float
    t_end: float
    mean_w2: float
    std_w2: float
    component_amplitude: float
    extrema_count: float
    dominant_period: Optional[float]
    acf_peak: float
    component_period: Optional[float]
    component_acf_peak: float
    bistability: Optional[Bistability]
    n_samples: int

    @property
    def frozen(self) -> bool:
        return self.std_w2 < DEFAULT_SETTINGS.frozen_std


def _span(t: np.ndarray, lo: float, hi: float, tol: float) -> slice:
    """Index range of the sorted times within ``[lo - tol, hi + tol]``."""
    return slice(int(np.searchsorted(t, lo - tol, "left")), int(np.searchsorted(t, hi + tol, "right")))


def _analysis_start(series: ObservableSeries, settings: ClassifierSettings) -> float:
    t0, t1 = float(series.t[0]), float(series.t[-1])
    # the fidelity is undefined before the first full delay
    finite = np.nonzero(np.isfinite(series.w2_at))[0]
    first = float(series.t[finite[0]]) if len(finite) else t1
    return max(first, t0 + settings.burn_in_fraction * (t1 - t0))


def _window_bounds(series: ObservableSeries, settings: ClassifierSettings) -> list[tuple[float, float]]:
    a = series.a
    start = _analysis_start(series, settings)
    w, s = settings.window_in_a * a, settings.stride_in_a * a
    t_last = float(series.t[-1])
    tol = 1e-9 * max(1.0, abs(t_last))
    bounds = []
    k = 0
    while start + k * s + w <= t_last + tol:
        bounds.append((start + k * s, start + k * s + w))
        k += 1
    return bounds


def _context_bistability(series: ObservableSeries, lo: float, hi: float,
                         settings: ClassifierSettings, cache: dict) -> Optional[Bistability]:
    """Two-level analysis on context spans of growing length centred on a window.

    Long dwells need long spans to contain two switches, while short spans
    keep neighbouring phases out of the level statistics; the shortest span
    that finds a switching epoch covering the window wins.
    """
    a = series.a
    if "start" not in cache:
        cache["start"] = _analysis_start(series, settings)
    start = cache["start"]
    t_last = float(series.t[-1])
    mid = 0.5 * (lo + hi)
    for span in settings.bistability_spans_in_a:
        half = 0.5 * span * a
        c1 = min(t_last, max(start, mid - half) + 2.0 * half)
        c0 = max(start, c1 - 2.0 * half)
        key = (round(c0, 9), round(c1, 9))
        if key not in cache:
            m = _span(series.t, c0, c1, 0.0)
            found = None
            for name, x in (("w2_at", series.w2_at), ("psi_up", series.psi_up),
                            ("re_psi_down", series.re_psi_down),
                            ("im_psi_down", series.im_psi_down)):
                found = two_level_analysis(series.t[m], x[m], a, settings, name)
                if found is not None:
                    break
            cache[key] = found
        found = cache[key]
        if found is None:
            continue
        # only windows inside the switching epoch are bistable
        sw = found.switch_times
        reach = found.longest_dwell
        if sw[0] - reach <= hi and lo <= sw[-1] + reach:
            return found
        if c0 <= start and c1 >= t_last:
            break
    return None


def window_features(series: ObservableSeries, window_in_a: float = 50.0,
                    settings: Optional[ClassifierSettings] = None) -> list[WindowFeatures]:
    """Features of sliding windows after the burn-in.

    The window length ``window_in_a`` overrides ``settings.window_in_a``.
    """
    settings = replace(settings or DEFAULT_SETTINGS, window_in_a=window_in_a)
    bounds = _window_bounds(series, settings)
    if not bounds:
        raise InsufficientDataError(
            f"series of length {series.t[-1] - series.t[0]:.6g} is shorter than burn-in plus one "
            f"window of {settings.window_in_a}a")
    comps = series.components
    cache: dict = {}
    out = []
    for i, (lo, hi) in enumerate(bounds):
        m = _span(series.t, lo, hi, 1e-12)
        w2 = series.w2_at[m]
        n = m.stop - m.start
        if n < 8 or not np.all(np.isfinite(w2)):
            out.append(WindowFeatures(i, lo, hi, float("nan"), float("nan"), float("nan"), 0.0,
                                      None, 0.0, None, 0.0, None, n))
            continue
        dt = float(np.median(np.diff(series.t[m])))
        c = comps[m]
        amp = float(np.max(0.5 * np.ptp(c, axis=0)))
        period, peak = dominant_period(w2, dt)
        extrema = 0.0
        if period is not None:
            # rounded to half counts so that edge truncation does not lose an extremum
            raw = count_extrema(w2, settings.extremum_prominence) * period / (hi - lo)
            extrema = round(2.0 * raw) / 2.0
        # the component with the largest swing carries the oscillation period
        k = int(np.argmax(np.ptp(c, axis=0)))
        c_period, c_peak = dominant_period(c[:, k], dt)
        bist = _context_bistability(series, lo, hi, settings, cache)
        out.append(WindowFeatures(i, lo, hi, float(np.mean(w2)), float(np.std(w2)), amp, extrema,
                                  period, peak, c_period, c_peak, bist, n))
    return out


def label_window(f: WindowFeatures, settings: ClassifierSettings = DEFAULT_SETTINGS) -> PhaseLabel:
    if f.n_samples < 8 or not np.isfinite(f.mean_w2):
        return PhaseLabel.Undecided
    if f.bistability is not None:
        return PhaseLabel.P5_BiStateMetastable
    if (f.std_w2 < settings.fixed_std and f.mean_w2 > settings.fixed_mean
            and f.component_amplitude < settings.fixed_amplitude):
        return PhaseLabel.P1_FixedPoint
    if (f.std_w2 < settings.const_tpf_std and f.component_amplitude > settings.oscillation_amplitude
            and f.component_period is not None and f.component_acf_peak > settings.acf_peak):
        return PhaseLabel.P2_RegularOscConstTPF
    if (f.dominant_period is not None and f.acf_peak > settings.acf_peak
            and f.extrema_count >= settings.min_extrema):
        return PhaseLabel.P4_Structured
    return PhaseLabel.P3_Unstructured


@dataclass(frozen=True)
class PhaseReport:
    labels: tuple[PhaseLabel, ...]
    final: PhaseLabel
    features: tuple[WindowFeatures, ...] = ()

    def counts(self) -> dict[PhaseLabel, int]:
        out: dict[PhaseLabel, int] = {}
        for lab in self.labels:
            out[lab] = out.get(lab, 0) + 1
        return out


def final_label(labels: Sequence[PhaseLabel], persistence: int = 10) -> PhaseLabel:
    """Label of the closing run when it lasts ``persistence`` windows, else the most common one."""
    if not labels:
        return PhaseLabel.Undecided
    last = labels[-1]
    run = 0
    for lab in reversed(labels):
        if lab != last:
            break
        run += 1
    if run >= min(persistence, len(labels)):
        return last
    counts: dict[PhaseLabel, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    best = max(counts.values())
    winners = [lab for lab, c in counts.items() if c == best]
    return winners[0] if len(winners) == 1 else PhaseLabel.Undecided


def classify_phase(features: Sequence[WindowFeatures],
                   settings: ClassifierSettings = DEFAULT_SETTINGS) -> PhaseReport:
    if len(features) < 3:
        raise InsufficientDataError(f"need at least 3 windows, got {len(features)}")
    labels = tuple(label_window(f, settings) for f in features)
    return PhaseReport(labels, final_label(labels, settings.persistence_windows), tuple(features))


@dataclass(frozen=True)
class TransitionEvent:
    t_transition: float
    from_label: PhaseLabel
    to_label: PhaseLabel

    def __post_init__(self):
        if self.from_label == self.to_label:
            raise ValidationError("a transition needs two different labels")


def detect_transition(labels: Sequence[PhaseLabel], window_starts: Sequence[float],
                      persistence: int = 10) -> Optional[TransitionEvent]:
    """Single persistent label change.

    The closing run of labels must last at least ``persistence`` windows and
    the stretch before it must be dominated by one other label that also
    covers ``persistence`` windows, so short start-up transients do not count.
    Undecided windows never take part in a transition.
    """
    labels = list(labels)
    if len(labels) != len(window_starts):
        raise ValidationError("labels and window_starts differ in length")
    if len(labels) < persistence + 1:
        return None
    new = labels[-1]
    if new == PhaseLabel.Undecided:
        return None
    k = len(labels) - 1
    while k > 0 and labels[k - 1] == new:
        k -= 1
    if k == 0 or len(labels) - k < persistence:
        return None
    before = [lab for lab in labels[:k] if lab != PhaseLabel.Undecided]
    if not before:
        return None
    counts: dict[PhaseLabel, int] = {}
    for lab in before:
        counts[lab] = counts.get(lab, 0) + 1
    old = max(counts, key=counts.get)
    if old == new or counts[old] < max(persistence, 0.5 * len(before)):
        return None
    return TransitionEvent(float(window_starts[k]), old, new)


@dataclass(frozen=True)
class SeriesAnalysis:
    """Stationary report (after burn-in) plus transition scan over the whole run."""

    report: PhaseReport
    run_labels: tuple[PhaseLabel, ...]
    run_window_starts: tuple[float, ...]
    transition: Optional[TransitionEvent]


def analyse_series(series: ObservableSeries,
                   settings: ClassifierSettings = DEFAULT_SETTINGS) -> SeriesAnalysis:
    feats = window_features(series, settings.window_in_a, settings)
    report = classify_phase(feats, settings)
    full = replace(settings, burn_in_fraction=0.0)
    run_feats = window_features(series, settings.window_in_a, full)
    run_labels = tuple(label_window(f, settings) for f in run_feats)
    starts = tuple(f.t_start for f in run_feats)
    event = detect_transition(run_labels, starts, settings.persistence_windows)
    return SeriesAnalysis(report, run_labels, starts, event)


# ---------------------------------------------------------------------------
# crossovers


def config_with_value(cfg: RunConfig, name: str, value: float) -> RunConfig:
    """Copy of ``cfg`` with one coupling or run parameter replaced.

    ``mu_hat`` sets ``mu = value - lambda_re``; ``b_x``, ``b_y``, ``b_z`` set
    components of the external field.
    """
    coupling_names = {f.name for f in fields(CouplingSet)}
    c = cfg.couplings
    if name == "mu_hat":
        return cfg.with_(couplings=replace(c, mu=value - c.lambda_re))
    if name in ("b_x", "b_y", "b_z"):
        b = list(c.b_ext)
        b["xyz".index(name[-1])] = value
        return cfg.with_(couplings=replace(c, b_ext=tuple(b)))
    if name in coupling_names and name != "b_ext":
        return cfg.with_(couplings=replace(c, **{name: value}))
    if name in ("a", "r", "theta0", "phi0"):
        return cfg.with_(**{name: value})
    raise ValidationError(f"unknown sweep parameter {name!r}")


@dataclass(frozen=True)
class CrossoverResult:
    points: tuple[tuple[float, PhaseLabel], ...]
    brackets: tuple[tuple[float, float, PhaseLabel, PhaseLabel], ...]


def crossover_scan(base_cfg: RunConfig, coupling_name: str, values: Sequence[float],
                   settings: ClassifierSettings = DEFAULT_SETTINGS,
                   runner: Callable[[RunConfig], Trajectory] = simulate,
                   max_workers: Optional[int] = None) -> CrossoverResult:
    """Classify one run per value and bracket every label change."""
    values = [float(v) for v in values]
    if any(b < a for a, b in zip(values, values[1:])) and any(b > a for a, b in zip(values, values[1:])):
        raise ValidationError("values must be sorted")
    cfgs = [config_with_value(base_cfg, coupling_name, v) for v in values]

    def one(cfg: RunConfig) -> PhaseLabel:
        series = extract_series(runner(cfg))
        return classify_phase(window_features(series, settings.window_in_a, settings), settings).final

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        labels = list(pool.map(one, cfgs))
    points = tuple(zip(values, labels))
    brackets = tuple((v0, v1, l0, l1) for (v0, l0), (v1, l1) in zip(points, points[1:]) if l0 != l1)
    return CrossoverResult(points, brackets)


# ---------------------------------------------------------------------------
# orbit helpers


def theta_rate(r: np.ndarray, drdt: np.ndarray) -> np.ndarray:
    """Polar-angle rate ``d theta/dt = dr/dt . e_theta`` of Cartesian samples."""
    r = np.asarray(r, float)
    drdt = np.asarray(drdt, float)
    rho = np.hypot(r[:, 0], r[:, 1])
    safe = np.where(rho > 0.0, rho, 1.0)
    e_theta = np.stack([r[:, 0] * r[:, 2] / safe, r[:, 1] * r[:, 2] / safe, -rho], axis=-1)
    return np.einsum("ij,ij->i", drdt, e_theta)


def in_plane_angle(r: np.ndarray) -> np.ndarray:
    """Unwrapped angle of ``r`` in the x-z plane measured from +z towards +x.

    For a state that stays in the x-z plane this is the signed polar angle,
    which keeps growing through the poles instead of folding back.
    """
    r = np.asarray(r, float)
    return np.unwrap(np.arctan2(r[:, 0], r[:, 2]))


def in_plane_rate(r: np.ndarray, drdt: np.ndarray) -> np.ndarray:
    """Rate of :func:`in_plane_angle`, ``z dx/dt - x dz/dt``, for unit vectors in the x-z plane."""
    r = np.asarray(r, float)
    drdt = np.asarray(drdt, float)
    return r[:, 2] * drdt[:, 0] - r[:, 0] * drdt[:, 2]
