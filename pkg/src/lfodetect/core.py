"""Shared domain types, configuration, and validation.

Everything here is an immutable value object: windows, estimated modes,
spectral peaks, alarms, and the tuning configuration shared by the whole
analysis pipeline. Instances are safe to share between concurrent workers.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

#: Widened merge band for hunting control-mode oscillations (supervisory
#: equipment can ring well above the default 0.1-2 Hz electromechanical range).
CONTROL_HUNT_BAND = (0.1, 10.0)


class Channel(str, enum.Enum):
    """Measured quantity carried by an archive stream / analysis window."""

    Frequency_Hz = "Frequency_Hz"
    VoltageMag_pu = "VoltageMag_pu"
    VoltageAngle_rad = "VoltageAngle_rad"
    ActivePower_MW = "ActivePower_MW"


class ModeClass(str, enum.Enum):
    """Oscillation taxonomy by frequency band."""

    InterArea = "InterArea"
    Local = "Local"
    Control = "Control"
    Torsional = "Torsional"


#: Classification bands in Hz: (low, high, low_inclusive, high_inclusive).
#: Local and Control deliberately overlap on (1.5, 2.0]; the gaps below
#: 0.1 Hz and on (8, 10] classify to the empty set.
MODE_BANDS: dict[ModeClass, tuple[float, float, bool, bool]] = {
    ModeClass.InterArea: (0.1, 1.0, True, False),
    ModeClass.Local: (1.0, 2.0, True, True),
    ModeClass.Control: (1.5, 8.0, False, True),
    ModeClass.Torsional: (10.0, math.inf, False, False),
}


class Severity(str, enum.Enum):
    Info = "Info"
    Warning = "Warning"
    Critical = "Critical"


class ValidationError(ValueError):
    """A sample window violates one of its structural invariants."""


class NonFiniteSample(ValidationError):
    def __init__(self, index: int):
        super().__init__(f"sample {index} is not finite")
        self.index = index


class WindowTooShort(ValidationError):
    def __init__(self, count: int):
        super().__init__(f"window has {count} samples, need at least 4")
        self.count = count


class NonPositiveDt(ValidationError):
    def __init__(self, dt: float):
        super().__init__(f"sample interval must be a positive finite number, got {dt}")
        self.dt = dt


class EmptyBand(Exception):
    """No component falls inside the requested frequency band."""


def wrap_angle(theta: float) -> float:
    """Normalize an angle to the half-open interval (-pi, pi]."""
    w = (theta + math.pi) % TWO_PI - math.pi
    return math.pi if w == -math.pi else w


def _readonly(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SampleWindow:
    """A uniformly sampled scalar channel segment.

    Attributes:
        station_id: opaque identifier of the reporting substation.
        channel: which measured quantity the samples carry.
        t0_ms: UTC timestamp of the first sample, in milliseconds.
        dt: sample interval in seconds (stored, never inferred from
            timestamps, so ingestion decides resampling exactly once).
        samples: sample values, stored as a read-only float array.
    """

    station_id: str
    channel: Channel
    t0_ms: int
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _readonly(self.samples))

    @property
    def count(self) -> int:
        return int(self.samples.shape[0])

    @property
    def duration(self) -> float:
        """Window length in seconds: (count - 1) * dt."""
        return (self.count - 1) * self.dt

    @property
    def times(self) -> np.ndarray:
        """Sample times in seconds relative to the window start."""
        return np.arange(self.count) * self.dt

    def replace_samples(self, samples) -> "SampleWindow":
        """New window with the same identity/grid but different samples."""
        return SampleWindow(self.station_id, self.channel, self.t0_ms, self.dt, samples)


def validate_window(w: SampleWindow) -> SampleWindow:
    """Check all SampleWindow invariants; return the window unchanged.

    Raises:
        NonPositiveDt: dt is not a positive finite number.
        WindowTooShort: fewer than 4 samples.
        NonFiniteSample: first offending sample index attached.
    """
    if not (w.dt > 0 and math.isfinite(w.dt)):
        raise NonPositiveDt(w.dt)
    if w.count < 4:
        raise WindowTooShort(w.count)
    finite = np.isfinite(w.samples)
    if not finite.all():
        raise NonFiniteSample(int(np.flatnonzero(~finite)[0]))
    return w


@dataclass(frozen=True)
class PronyMode:
    """One estimated damped sinusoid  A * exp(damping * t) * cos(2*pi*frequency*t + phase).

    Sign convention: positive damping means the oscillation grows with time
    (the dangerous case). Note that some published mode tables report the
    same quantity with the opposite sign.

    energy_fraction is this mode's share of the reconstruction energy over
    the analyzed window; it only ranks modes and plays no physical role.
    """

    amplitude: float
    damping: float
    frequency: float
    phase: float
    energy_fraction: float = 0.0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.frequency < 0:
            raise ValueError(f"frequency must be >= 0, got {self.frequency}")
        if not (-math.pi < self.phase <= math.pi):
            raise ValueError(f"phase must lie in (-pi, pi], got {self.phase}")
        if not (0.0 <= self.energy_fraction <= 1.0):
            raise ValueError(f"energy_fraction must lie in [0, 1], got {self.energy_fraction}")


@dataclass(frozen=True, eq=False)
class PronyFit:
    """Full result of a damped-sinusoid decomposition.

    Attributes:
        order: order of the linear prediction model.
        lpm_coefficients: the prediction coefficients a_1..a_N.
        roots: all characteristic roots (conjugate-closed for real input).
        modes: surviving modes after artifact and amplitude pruning,
            sorted by energy_fraction descending.
        fit_quality: 1 - relative rms reconstruction error, clamped to [0, 1].
    """

    order: int
    lpm_coefficients: np.ndarray
    roots: np.ndarray
    modes: tuple[PronyMode, ...]
    fit_quality: float

    def __post_init__(self):
        coeffs = _readonly(self.lpm_coefficients)
        if coeffs.shape[0] != self.order:
            raise ValueError("lpm_coefficients length must equal order")
        object.__setattr__(self, "lpm_coefficients", coeffs)
        roots = np.array(self.roots, dtype=complex)
        roots.flags.writeable = False
        object.__setattr__(self, "roots", roots)
        object.__setattr__(self, "modes", tuple(self.modes))


@dataclass(frozen=True)
class SpectrumPeak:
    """Dominant spectral component: frequency in Hz, peak magnitude in
    signal units (half the tone amplitude under the 1/M normalization),
    and phase in radians from the four-quadrant arctangent."""

    frequency: float
    magnitude: float
    phase: float

    def __post_init__(self):
        if self.frequency < 0:
            raise ValueError(f"frequency must be >= 0, got {self.frequency}")
        if self.magnitude < 0:
            raise ValueError(f"magnitude must be >= 0, got {self.magnitude}")


@dataclass(frozen=True)
class AlarmEvent:
    """A cross-validated, classified oscillation finding for the operator.

    An alarm only exists when an estimated mode and a spectral peak agree
    in frequency within the configured match tolerance.
    """

    station_id: str
    channel: Channel
    t0_ms: int
    duration_s: float
    matched_frequency_hz: float
    prony_mode: PronyMode
    fft_peak: SpectrumPeak
    classes: frozenset[ModeClass]
    growing: bool
    severity: Severity

    def __post_init__(self):
        if not self.classes:
            raise ValueError("alarm class set must be non-empty")
        object.__setattr__(self, "classes", frozenset(self.classes))

    def to_json_dict(self) -> dict:
        return {
            "station_id": self.station_id,
            "channel": self.channel.value,
            "t0_ms": self.t0_ms,
            "duration_s": self.duration_s,
            "matched_frequency_hz": self.matched_frequency_hz,
            "prony_mode": {
                "amplitude": self.prony_mode.amplitude,
                "damping": self.prony_mode.damping,
                "frequency": self.prony_mode.frequency,
                "phase": self.prony_mode.phase,
                "energy_fraction": self.prony_mode.energy_fraction,
            },
            "fft_peak": {
                "frequency": self.fft_peak.frequency,
                "magnitude": self.fft_peak.magnitude,
                "phase": self.fft_peak.phase,
            },
            "classes": sorted(c.value for c in self.classes),
            "growing": self.growing,
            "severity": self.severity.value,
        }


@dataclass(frozen=True)
class AnalysisConfig:
    """Tuning knobs for the whole pipeline.

    prony_order None means automatic: min(count // 3, 60), honoring the
    rule that the sample count should be at least three times the order.
    The generous ceiling matters in noise: surplus poles absorb the noise
    that otherwise biases damping estimates of the real modes.
    match_tolerance_hz None means automatic: max(1/window_duration, 0.05),
    i.e. never finer than the Rayleigh limit of the window.
    """

    prony_order: int | None = None
    emd_band_hz: tuple[float, float] = (0.1, 2.0)
    max_sift_iterations: int = 50
    sift_sd_threshold: float = 0.2
    match_tolerance_hz: float | None = None
    min_mode_amplitude_fraction: float = 0.02
    slow_decay_threshold: float = 0.05
    min_fit_quality: float = 0.5
    require_stable_modes: bool = True
    max_fft_peaks: int = 10
    fft_peak_min_fraction: float = 0.1

    def __post_init__(self):
        lo, hi = self.emd_band_hz
        if not (0 < lo < hi):
            raise ValueError(f"band must satisfy 0 < low < high, got {self.emd_band_hz}")
        object.__setattr__(self, "emd_band_hz", (float(lo), float(hi)))
        if self.prony_order is not None and self.prony_order < 1:
            raise ValueError("prony_order must be positive")
        if self.max_sift_iterations < 1:
            raise ValueError("max_sift_iterations must be positive")
        if self.sift_sd_threshold <= 0:
            raise ValueError("sift_sd_threshold must be positive")
        if self.match_tolerance_hz is not None and self.match_tolerance_hz <= 0:
            raise ValueError("match_tolerance_hz must be positive")
        if not (0 <= self.min_mode_amplitude_fraction < 1):
            raise ValueError("min_mode_amplitude_fraction must lie in [0, 1)")
        if self.slow_decay_threshold < 0:
            raise ValueError("slow_decay_threshold must be >= 0")
        if self.max_fft_peaks < 1:
            raise ValueError("max_fft_peaks must be positive")
        if not (0 <= self.fft_peak_min_fraction < 1):
            raise ValueError("fft_peak_min_fraction must lie in [0, 1)")

    def resolve_order(self, count: int) -> int:
        if self.prony_order is not None:
            return self.prony_order
        return max(1, min(count // 3, 60))

    def resolve_match_tolerance(self, duration_s: float) -> float:
        if self.match_tolerance_hz is not None:
            return self.match_tolerance_hz
        return max(1.0 / duration_s, 0.05)
