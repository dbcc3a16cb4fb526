"""PPG signal conditioning: bandpass filtering, peak detection, IBI extraction.

The processing chain is filter -> detect_peaks -> peaks_to_ibi -> clean_ibi.
All functions are pure; nothing here holds state between calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage
import scipy.signal

from .errors import InvalidBand, SignalTooShort

# Physiological ceiling of 200 bpm: no two peaks closer than this.
REFRACTORY_S = 0.300
# Plausible interval range (30-200 bpm) and max adjacent jump.
IBI_MIN_MS = 300.0
IBI_MAX_MS = 2000.0
IBI_MAX_DIFF_MS = 250.0

# Adaptive threshold: moving mean + K * moving std over this window.
THRESHOLD_WINDOW_S = 2.0
THRESHOLD_K = 0.5


@dataclass(frozen=True)
class PpgSignal:
    """Uniformly sampled optical waveform."""

    samples: np.ndarray
    rate_hz: float
    start_time_s: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=np.float64))
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.rate_hz


@dataclass(frozen=True)
class FilterSpec:
    """Butterworth bandpass realized as a cascade of biquad sections."""

    low_hz: float
    high_hz: float
    order: int
    rate_hz: float
    sos: np.ndarray  # (order/2, 6) second-order sections

    @property
    def n_sections(self) -> int:
        return self.sos.shape[0]


@dataclass(frozen=True)
class IbiSequence:
    """Inter-beat intervals (ms) with the time of the beat ending each interval."""

    intervals_ms: np.ndarray
    beat_times_s: np.ndarray

    def __post_init__(self):
        iv = np.asarray(self.intervals_ms, dtype=np.float64)
        bt = np.asarray(self.beat_times_s, dtype=np.float64)
        if iv.shape != bt.shape:
            raise ValueError("intervals_ms and beat_times_s must have equal length")
        if len(bt) > 1 and not np.all(np.diff(bt) > 0):
            raise ValueError("beat_times_s must be strictly increasing")
        object.__setattr__(self, "intervals_ms", iv)
        object.__setattr__(self, "beat_times_s", bt)

    def __len__(self) -> int:
        return len(self.intervals_ms)


def design_bandpass(low_hz: float, high_hz: float, order: int, rate_hz: float) -> FilterSpec:
    """Design a Butterworth bandpass of the given total order as biquad sections."""
    nyquist = rate_hz / 2.0
    if not (0 < low_hz < high_hz < nyquist):
        raise InvalidBand(
            f"need 0 < low ({low_hz}) < high ({high_hz}) < Nyquist ({nyquist})"
        )
    if order not in (2, 4):
        raise InvalidBand(f"order must be 2 or 4, got {order}")
    # butter's N is the prototype order; a bandpass doubles it, so a total
    # order of `order` needs N = order/2 and yields order/2 sections.
    sos = scipy.signal.butter(
        order // 2, [low_hz, high_hz], btype="bandpass", fs=rate_hz, output="sos"
    )
    return FilterSpec(low_hz=low_hz, high_hz=high_hz, order=order, rate_hz=rate_hz, sos=sos)


def bandpass_gain(spec: FilterSpec, freq_hz: float) -> float:
    """Single-pass magnitude response of the cascade at one frequency."""
    _, h = scipy.signal.sosfreqz(spec.sos, worN=[freq_hz], fs=spec.rate_hz)
    return float(np.abs(h[0]))


def filter_zero_phase(signal: PpgSignal, spec: FilterSpec) -> PpgSignal:
    """Apply the bandpass forward and backward so peak timing is preserved.

    Edges are reflection-padded with 3 x order samples before filtering.
    """
    n = len(signal.samples)
    if n < 3 * spec.order:
        raise SignalTooShort(f"need >= {3 * spec.order} samples, got {n}")
    padlen = min(3 * spec.order, n - 1)
    filtered = scipy.signal.sosfiltfilt(spec.sos, signal.samples, padtype="even", padlen=padlen)
    return PpgSignal(samples=filtered, rate_hz=signal.rate_hz, start_time_s=signal.start_time_s)


def detect_peaks(signal: PpgSignal) -> np.ndarray:
    """Find pulse peaks in an already-bandpassed signal.

    A candidate is a local maximum (first sample of a plateau) above the
    adaptive threshold moving_mean + K * moving_std over a 2 s window.
    Candidates closer than the 300 ms refractory period to an accepted peak
    are dropped, keeping the earlier peak.
    """
    x = signal.samples
    n = len(x)
    if n < 3:
        return np.empty(0, dtype=np.int64)

    win = max(3, int(round(THRESHOLD_WINDOW_S * signal.rate_hz)))
    mean = scipy.ndimage.uniform_filter1d(x, size=win, mode="nearest")
    mean_sq = scipy.ndimage.uniform_filter1d(x * x, size=win, mode="nearest")
    std = np.sqrt(np.maximum(mean_sq - mean * mean, 0.0))
    threshold = mean + THRESHOLD_K * std

    # Local maxima; ties/plateaus resolve to the first plateau sample.
    rising = x[1:-1] > x[:-2]
    not_falling = x[1:-1] >= x[2:]
    candidates = np.flatnonzero(rising & not_falling) + 1
    candidates = candidates[x[candidates] > threshold[candidates]]

    refractory = int(round(REFRACTORY_S * signal.rate_hz))
    # Zero-phase filtering leaves edge transients; a peak this close to the
    # boundary has no confirmable neighborhood, so drop it.
    candidates = candidates[(candidates >= refractory) & (candidates < n - refractory)]
    peaks = []
    last = -refractory - 1
    for idx in candidates:
        if idx - last >= refractory:
            peaks.append(idx)
            last = idx
    return np.asarray(peaks, dtype=np.int64)


def peaks_to_ibi(peak_indices: np.ndarray, rate_hz: float) -> IbiSequence:
    """Convert peak sample indices to inter-beat intervals in milliseconds."""
    idx = np.asarray(peak_indices, dtype=np.int64)
    if len(idx) > 1 and not np.all(np.diff(idx) > 0):
        raise ValueError("peak indices must be strictly increasing")
    if len(idx) < 2:
        return IbiSequence(np.empty(0), np.empty(0))
    intervals_ms = np.diff(idx) / rate_hz * 1000.0
    beat_times_s = idx[1:] / rate_hz
    return IbiSequence(intervals_ms=intervals_ms, beat_times_s=beat_times_s)


def clean_ibi(ibi: IbiSequence) -> IbiSequence:
    """Reject implausible intervals, then clip large adjacent jumps.

    Intervals outside [300, 2000] ms are dropped first.  A single
    left-to-right pass then clips any interval differing from its (already
    processed) predecessor by more than 250 ms to predecessor +/- 250 ms.
    """
    keep = (ibi.intervals_ms >= IBI_MIN_MS) & (ibi.intervals_ms <= IBI_MAX_MS)
    intervals = ibi.intervals_ms[keep].copy()
    beat_times = ibi.beat_times_s[keep].copy()
    for i in range(1, len(intervals)):
        diff = intervals[i] - intervals[i - 1]
        if diff > IBI_MAX_DIFF_MS:
            intervals[i] = intervals[i - 1] + IBI_MAX_DIFF_MS
        elif diff < -IBI_MAX_DIFF_MS:
            intervals[i] = intervals[i - 1] - IBI_MAX_DIFF_MS
    return IbiSequence(intervals_ms=intervals, beat_times_s=beat_times)


def signal_to_clean_ibi(signal: PpgSignal, low_hz=0.5, high_hz=8.0, order=4) -> IbiSequence:
    """Full chain: bandpass, detect peaks, form intervals, clean them."""
    spec = design_bandpass(low_hz, high_hz, order, signal.rate_hz)
    filtered = filter_zero_phase(signal, spec)
    peaks = detect_peaks(filtered)
    return clean_ibi(peaks_to_ibi(peaks, signal.rate_hz))
