"""Situational-awareness detector.

One window goes through: EMD band-pass, then damped-sinusoid estimation and
spectral peak picking on the same filtered signal, then frequency matching
across the two methods. Only modes confirmed by both routes raise alarms,
which keeps single-method artifacts away from the operator.

Three additional gates suppress alarms on noise and on band-pass leakage:
  * the whole fit must reconstruct the filtered window reasonably
    (fit_quality >= cfg.min_fit_quality);
  * a candidate mode must persist in independent fits of the two window
    halves (noise modes wander between halves, real modes do not);
  * spectral peaks below cfg.fft_peak_min_fraction of the band maximum are
    ignored (band-pass sifting leaks percent-level slow artifacts that both
    methods would otherwise agree on).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from . import emd, prony, spectrum
from .core import (
    AlarmEvent,
    AnalysisConfig,
    Channel,
    EmptyBand,
    MODE_BANDS,
    ModeClass,
    PronyFit,
    PronyMode,
    SampleWindow,
    Severity,
    SpectrumPeak,
    validate_window,
)

logger = logging.getLogger(__name__)

_ESCALATION_CLASSES = frozenset({ModeClass.InterArea, ModeClass.Local})


@dataclass(frozen=True, eq=False)
class DetectionReport:
    """Everything one window produced: the raw fits, the alarms, and the
    mode/peak leftovers that found no partner in the other method."""

    station_id: str
    channel: Channel
    t0_ms: int
    duration_s: float
    prony_fit: PronyFit | None
    fft_peaks: tuple[SpectrumPeak, ...]
    alarms: tuple[AlarmEvent, ...]
    unmatched_prony: tuple[PronyMode, ...]
    unmatched_fft: tuple[SpectrumPeak, ...]


def classify(frequency_hz: float) -> frozenset[ModeClass]:
    """Every declared band containing the frequency; empty for gap regions
    (below 0.1 Hz and on (8, 10] Hz)."""
    if frequency_hz < 0:
        raise ValueError(f"frequency must be >= 0, got {frequency_hz}")
    out = set()
    for mode_class, (lo, hi, lo_inc, hi_inc) in MODE_BANDS.items():
        above = frequency_hz >= lo if lo_inc else frequency_hz > lo
        below = frequency_hz <= hi if hi_inc else frequency_hz < hi
        if above and below:
            out.add(mode_class)
    return frozenset(out)


def match_modes(
    prony_modes,
    peaks,
    tol_hz: float,
) -> list[tuple[PronyMode, SpectrumPeak]]:
    """Greedy frequency matching, strongest mode first.

    Modes are visited in descending energy order; each claims the nearest
    unused peak within tol_hz (ties broken toward the lower-frequency
    peak). Deterministic, each peak used at most once.
    """
    if tol_hz <= 0:
        raise ValueError(f"tol_hz must be positive, got {tol_hz}")
    ordered = sorted(prony_modes, key=lambda m: (-m.energy_fraction, m.frequency))
    available = list(peaks)
    pairs: list[tuple[PronyMode, SpectrumPeak]] = []
    for mode in ordered:
        best = None
        best_key = None
        for peak in available:
            dist = abs(mode.frequency - peak.frequency)
            if dist > tol_hz:
                continue
            key = (dist, peak.frequency)
            if best_key is None or key < best_key:
                best, best_key = peak, key
        if best is not None:
            available.remove(best)
            pairs.append((mode, best))
    return pairs


def _severity(damping: float, classes: frozenset[ModeClass], cfg: AnalysisConfig) -> Severity:
    if damping > 0:
        return Severity.Critical if classes & _ESCALATION_CLASSES else Severity.Warning
    if abs(damping) < cfg.slow_decay_threshold:
        return Severity.Warning
    return Severity.Info


def _stable_modes(bp: SampleWindow, modes, cfg: AnalysisConfig):
    """Modes whose frequency persists in independent fits of both window
    halves. Any half-fit failure keeps the list unfiltered (degenerate
    windows are already gated by fit quality)."""
    if not modes:
        return modes
    half = bp.count // 2
    if half < 12:
        return modes
    try:
        first = prony.prony_analyze(bp.replace_samples(bp.samples[:half]), cfg)
        second = prony.prony_analyze(bp.replace_samples(bp.samples[half:]), cfg)
    except (prony.OrderTooHigh, prony.InsufficientExcitation, prony.RootSolverDiverged):
        return modes
    # half windows cannot resolve finer than twice the full-window limit
    tol = max(2.0 / bp.duration, cfg.resolve_match_tolerance(bp.duration))
    stable = []
    for mode in modes:
        in_first = any(abs(m.frequency - mode.frequency) <= tol for m in first.modes)
        in_second = any(abs(m.frequency - mode.frequency) <= tol for m in second.modes)
        if in_first and in_second:
            stable.append(mode)
    return stable


def detect(w: SampleWindow, cfg: AnalysisConfig | None = None) -> DetectionReport:
    """Run the full pipeline on one validated window.

    An empty band-pass result (nothing inside cfg.emd_band_hz) yields an
    empty report rather than an error.
    """
    cfg = cfg or AnalysisConfig()
    validate_window(w)

    def report(fit=None, peaks=(), alarms=(), un_prony=(), un_fft=()):
        return DetectionReport(
            station_id=w.station_id,
            channel=w.channel,
            t0_ms=w.t0_ms,
            duration_s=w.duration,
            prony_fit=fit,
            fft_peaks=tuple(peaks),
            alarms=tuple(alarms),
            unmatched_prony=tuple(un_prony),
            unmatched_fft=tuple(un_fft),
        )

    try:
        bp = emd.bandpass(w, cfg)
    except EmptyBand:
        logger.info("%s/%s@%d: nothing inside the analysis band", w.station_id, w.channel.value, w.t0_ms)
        return report()

    try:
        fit = prony.prony_analyze(bp, cfg)
    except prony.InsufficientExcitation:
        return report()

    spec = spectrum.dft(bp, spectrum.WindowFunction.Hann)
    try:
        peaks = spectrum.find_peaks(
            spec, cfg.emd_band_hz, cfg.max_fft_peaks, cfg.fft_peak_min_fraction
        )
    except EmptyBand:
        peaks = []

    candidates = fit.modes
    if cfg.require_stable_modes:
        candidates = _stable_modes(bp, candidates, cfg)
    if fit.fit_quality < cfg.min_fit_quality:
        candidates = ()

    tol = cfg.resolve_match_tolerance(w.duration)
    pairs = match_modes(candidates, peaks, tol)

    alarms = []
    for mode, peak in pairs:
        matched_freq = 0.5 * (mode.frequency + peak.frequency)
        classes = classify(matched_freq)
        if not classes:
            continue
        alarms.append(
            AlarmEvent(
                station_id=w.station_id,
                channel=w.channel,
                t0_ms=w.t0_ms,
                duration_s=w.duration,
                matched_frequency_hz=matched_freq,
                prony_mode=mode,
                fft_peak=peak,
                classes=classes,
                growing=mode.damping > 0,
                severity=_severity(mode.damping, classes, cfg),
            )
        )

    matched_modes = {id(m) for m, _ in pairs}
    matched_peaks = {id(p) for _, p in pairs}
    return report(
        fit=fit,
        peaks=peaks,
        alarms=alarms,
        un_prony=[m for m in fit.modes if id(m) not in matched_modes],
        un_fft=[p for p in peaks if id(p) not in matched_peaks],
    )
