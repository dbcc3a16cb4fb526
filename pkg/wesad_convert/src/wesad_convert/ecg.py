"""R-peak detection for chest ECG, Pan-Tompkins style.

Bandpass -> derivative -> squaring -> moving-window integration -> adaptive
threshold with a refractory period.  Tuned for the 700 Hz chest stream;
output is raw peak positions, interval cleaning happens downstream.
"""

from __future__ import annotations

import numpy as np
from scipy import signal as sp_signal
from scipy.ndimage import uniform_filter1d

QRS_BAND_HZ = (5.0, 15.0)
INTEGRATION_WINDOW_S = 0.150
REFRACTORY_S = 0.250
THRESHOLD_FRACTION = 0.3


def detect_r_peaks(ecg: np.ndarray, rate_hz: float) -> np.ndarray:
    """Return R-peak sample indices in ascending order."""
    x = np.asarray(ecg, dtype=np.float64)
    if len(x) < int(rate_hz):
        return np.empty(0, dtype=np.int64)

    sos = sp_signal.butter(2, QRS_BAND_HZ, btype="bandpass", fs=rate_hz, output="sos")
    filtered = sp_signal.sosfiltfilt(sos, x)
    derivative = np.gradient(filtered)
    energy = uniform_filter1d(derivative**2, int(INTEGRATION_WINDOW_S * rate_hz))

    threshold = THRESHOLD_FRACTION * np.max(energy)
    refractory = int(round(REFRACTORY_S * rate_hz))
    distance = max(refractory, 1)
    candidates, _ = sp_signal.find_peaks(energy, height=threshold, distance=distance)

    # Snap each energy peak to the nearest filtered-signal maximum: the
    # integration window smears the R-wave position by up to its width.
    half = int(INTEGRATION_WINDOW_S * rate_hz)
    peaks = []
    for c in candidates:
        lo = max(c - half, 0)
        hi = min(c + half + 1, len(filtered))
        peaks.append(lo + int(np.argmax(filtered[lo:hi])))
    peaks = np.unique(np.asarray(peaks, dtype=np.int64))

    # Unique positions can still violate the refractory period after
    # snapping; keep the first of any too-close pair.
    kept = []
    for p in peaks:
        if not kept or p - kept[-1] >= refractory:
            kept.append(p)
    return np.asarray(kept, dtype=np.int64)


def peaks_to_rr_ms(peaks: np.ndarray, rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    """Peak indices -> (intervals in ms, beat times in s of each interval's end)."""
    if len(peaks) < 2:
        return np.empty(0), np.empty(0)
    intervals = np.diff(peaks) / rate_hz * 1000.0
    beat_times = peaks[1:] / rate_hz
    return intervals, beat_times
