"""Empirical mode decomposition used as a band-pass filter.

The window is sifted into intrinsic mode functions (IMFs), each IMF gets a
zero-crossing frequency estimate, and the band-pass output is the sum of
the IMFs whose mean frequency falls inside the configured band. The slow
residue (trend) is always excluded.

Sifting details:
  * envelopes are natural cubic splines through the persistent maxima
    (resp. minima) -- extremum pairs whose mutual swing is below 0.2 rms
    cancel first -- with the two nearest knots mirrored about each window
    end to tame boundary effects;
  * a candidate is accepted as an IMF when the envelope-mean energy ratio
    SD = sum(m^2) / sum(d_prev^2) drops below the configured threshold and
    the extrema / zero-crossing counts balance to within one, or when the
    iteration cap is reached. The balance is measured on the same
    persistent-extrema skeleton: each sift pass subtracts a spline
    interpolant, which injects sub-scale wiggles, and counting those would
    force extra passes that inject even more until the wiggles dominate
    the crossing count;
  * decomposition stops when the residue has fewer than 3 interior extrema
    (a spline needs material to interpolate), when the extracted component
    is floating-point dust, or after 12 IMFs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .core import AnalysisConfig, EmptyBand, SampleWindow, validate_window

#: Hard cap on extracted IMFs; log2 of typical window lengths bounds the
#: number of meaningful dyadic scales.
MAX_IMFS = 12

#: Below this many interior extrema the signal is treated as a trend.
MIN_SIFT_EXTREMA = 3

#: An extracted component this small relative to the input is floating-point
#: dust left over from envelope subtraction, not a real oscillation.
_DUST_FRACTION = 1e-12


@dataclass(frozen=True, eq=False)
class Imf:
    """One intrinsic mode function plus its zero-crossing mean frequency."""

    samples: np.ndarray
    mean_frequency_hz: float

    def __post_init__(self):
        arr = np.array(self.samples, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)
        if self.mean_frequency_hz < 0:
            raise ValueError("mean_frequency_hz must be >= 0")


@dataclass(frozen=True, eq=False)
class ImfSet:
    """Ordered IMFs (highest frequency first) and the final residue.

    The elementwise sum of all IMFs plus the residue reproduces the input
    window to within accumulated rounding error.
    """

    imfs: tuple[Imf, ...]
    residue: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "imfs", tuple(self.imfs))
        arr = np.array(self.residue, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "residue", arr)


def _local_extrema(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Interior local maxima and minima indices; plateaus count once, at
    their midpoint."""
    dx = np.diff(x)
    nz = np.flatnonzero(dx)
    if nz.size < 2:
        return np.empty(0, dtype=int), np.empty(0, dtype=int)
    s = np.sign(dx[nz])
    flips = np.flatnonzero(s[:-1] != s[1:])
    idx = (nz[flips] + 1 + nz[flips + 1]) // 2
    return idx[s[flips] > 0], idx[s[flips] < 0]


def _count_zero_crossings(x: np.ndarray, hysteresis: float = 0.0) -> int:
    """Sign changes, with exact zeros collapsed (touching zero without
    crossing does not count). A nonzero hysteresis adds a dead zone
    [-hysteresis, +hysteresis]: only swings that clear it count."""
    if hysteresis > 0.0:
        s = np.where(x >= hysteresis, 1, np.where(x <= -hysteresis, -1, 0))
    else:
        s = np.sign(x)
    s = s[s != 0]
    if s.size < 2:
        return 0
    return int(np.count_nonzero(s[:-1] != s[1:]))


#: Crossing-counter dead zone as a fraction of the signal rms. Sifting
#: leaves sub-scale wiggles near the zeros of an oscillation; counting
#: their sign flips would inflate the frequency estimate far above the
#: oscillation actually carried.
_CROSSING_HYSTERESIS = 0.2


def mean_frequency(samples, dt: float) -> float:
    """Zero-crossing frequency estimate: crossings / (2 * duration).

    Crossings are counted with a dead zone of 0.2 rms about zero, so only
    swings at the signal's own scale register. Returns 0.0 for a
    sign-constant signal. Needs at least 4 samples.
    """
    x = np.asarray(samples, dtype=float)
    if x.size < 4:
        raise ValueError(f"need at least 4 samples, got {x.size}")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    duration = (x.size - 1) * dt
    band = _CROSSING_HYSTERESIS * float(np.sqrt(np.mean(x**2)))
    return _count_zero_crossings(x, band) / (2.0 * duration)


def _envelope(ext_idx: np.ndarray, values: np.ndarray, n: int) -> np.ndarray:
    """Natural cubic spline through the extrema, with up to two extrema
    mirrored about each end of the index axis."""
    te = ext_idx.astype(float)
    ve = values[ext_idx]
    k = min(2, te.size)
    left_t = -te[:k][::-1]
    left_v = ve[:k][::-1]
    right_t = (2.0 * (n - 1) - te[-k:])[::-1]
    right_v = ve[-k:][::-1]
    t = np.concatenate([left_t, te, right_t])
    v = np.concatenate([left_v, ve, right_v])
    return CubicSpline(t, v, bc_type="natural")(np.arange(n, dtype=float))


def _persistent_extrema(x: np.ndarray, swing: float) -> tuple[np.ndarray, np.ndarray]:
    """Extrema surviving pair cancellation: adjacent extremum pairs whose
    mutual swing is below `swing` (wiggles smaller than the signal's own
    scale) annihilate. Returns (indices, is_maximum) in index order."""
    mx, mn = _local_extrema(x)
    idx = np.sort(np.concatenate([mx, mn]))
    is_max = np.isin(idx, mx)
    indices = list(idx)
    kinds = list(is_max)
    values = [float(x[i]) for i in indices]
    while len(values) > 1:
        diffs = [abs(values[i + 1] - values[i]) for i in range(len(values) - 1)]
        k = int(np.argmin(diffs))
        if diffs[k] >= swing:
            break
        del values[k : k + 2], indices[k : k + 2], kinds[k : k + 2]
    return np.asarray(indices, dtype=int), np.asarray(kinds, dtype=bool)


def _scale_floor(x: np.ndarray) -> float:
    return _CROSSING_HYSTERESIS * float(np.sqrt(np.mean(x**2)))


def imf_balance(samples) -> int:
    """Extrema count minus zero-crossing count, both measured on the
    persistent extrema skeleton (0.2 rms swing floor); an ideal IMF keeps
    |balance| <= 1.

    Each sign alternation between consecutive surviving extrema implies
    exactly one essential zero crossing, so an oscillation about zero
    scores K extrema against K - 1 crossings, while riding waves (adjacent
    extrema on the same side of zero) push the balance up.
    """
    x = np.asarray(samples, dtype=float)
    idx, _ = _persistent_extrema(x, _scale_floor(x))
    signs = np.sign(x[idx])
    signs = signs[signs != 0]
    crossings = int(np.count_nonzero(signs[:-1] != signs[1:])) if signs.size > 1 else 0
    return int(idx.size) - crossings


def _sift(x: np.ndarray, cfg: AnalysisConfig) -> np.ndarray | None:
    """Extract one IMF from x, or None when x cannot be sifted at all.

    Envelope knots are the persistent extrema: a sub-scale contra-extremum
    (say, a noise dip just below a crest) would otherwise drag the opposite
    envelope across the full signal range and bleed the oscillation itself
    into the envelope mean.
    """
    n = x.size
    d = np.array(x, dtype=float)
    first = True
    for _ in range(cfg.max_sift_iterations):
        idx, is_max = _persistent_extrema(d, _scale_floor(d))
        mx, mn = idx[is_max], idx[~is_max]
        if mx.size == 0 or mn.size == 0 or mx.size + mn.size < MIN_SIFT_EXTREMA:
            if first:
                return None
            break
        first = False
        e_up = _envelope(mx, d, n)
        e_low = _envelope(mn, d, n)
        m = 0.5 * (e_up + e_low)
        denom = float(np.dot(d, d))
        sd = float(np.dot(m, m)) / denom if denom > 0.0 else 0.0
        d = d - m
        if sd < cfg.sift_sd_threshold and abs(imf_balance(d)) <= 1:
            break
    return d


def decompose(w: SampleWindow, cfg: AnalysisConfig | None = None) -> ImfSet:
    """Sift the window into IMFs plus a residue.

    Deterministic; degenerate inputs (no interior extrema) yield zero IMFs
    and residue equal to the input.
    """
    cfg = cfg or AnalysisConfig()
    validate_window(w)
    residue = np.array(w.samples, dtype=float)
    dust = _DUST_FRACTION * float(np.max(np.abs(residue))) if residue.size else 0.0
    imfs: list[Imf] = []
    while len(imfs) < MAX_IMFS:
        mx, mn = _local_extrema(residue)
        if mx.size + mn.size < MIN_SIFT_EXTREMA:
            break
        d = _sift(residue, cfg)
        if d is None or float(np.max(np.abs(d))) <= dust:
            break
        imfs.append(Imf(d, mean_frequency(d, w.dt)))
        residue = residue - d
    return ImfSet(tuple(imfs), residue)


def bandpass(w: SampleWindow, cfg: AnalysisConfig | None = None) -> SampleWindow:
    """Sum of the IMFs whose mean frequency lies inside cfg.emd_band_hz
    (inclusive bounds). The residue is always excluded.

    IMFs below cfg.min_mode_amplitude_fraction of the input peak are
    ignored: sifting leaks percent-level fragments across scales, and
    treating those as band content would turn an empty band into noise.

    Raises:
        EmptyBand: no material IMF falls in the band, i.e. nothing to analyze.
    """
    cfg = cfg or AnalysisConfig()
    imf_set = decompose(w, cfg)
    lo, hi = cfg.emd_band_hz
    floor = cfg.min_mode_amplitude_fraction * float(np.max(np.abs(w.samples)))
    keep = [
        imf.samples
        for imf in imf_set.imfs
        if lo <= imf.mean_frequency_hz <= hi and float(np.max(np.abs(imf.samples))) >= floor
    ]
    if not keep:
        raise EmptyBand(f"no material IMF with mean frequency in [{lo}, {hi}] Hz")
    total = keep[0].copy()
    for part in keep[1:]:
        total += part
    return w.replace_samples(total)
