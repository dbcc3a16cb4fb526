"""Time-domain HRV metrics over one window of NN intervals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientData

FEATURE_NAMES = ("sdnn_ms", "rmssd_ms", "pnn50_pct", "mean_rr_ms", "mean_hr_bpm")


@dataclass(frozen=True)
class HrvFeatures:
    """The five time-domain metrics for one window."""

    sdnn_ms: float
    rmssd_ms: float
    pnn50_pct: float
    mean_rr_ms: float
    mean_hr_bpm: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.sdnn_ms, self.rmssd_ms, self.pnn50_pct, self.mean_rr_ms, self.mean_hr_bpm]
        )


def compute_hrv(intervals_ms) -> HrvFeatures:
    """Compute SDNN, RMSSD, pNN50, Mean_RR and Mean_HR from NN intervals.

    SDNN uses the sample (n-1) denominator.  RMSSD averages the n-1 squared
    successive differences over n-1.  pNN50 counts strictly-greater-than-50 ms
    successive differences as a percentage of the n-1 differences.
    Requires at least two positive intervals.
    """
    rr = np.asarray(intervals_ms, dtype=np.float64)
    n = len(rr)
    if n < 2:
        raise InsufficientData(f"need >= 2 intervals, got {n}")
    if np.any(rr <= 0):
        raise InsufficientData("intervals must be positive")

    mean_rr = float(np.mean(rr))
    sdnn = float(np.sqrt(np.sum((rr - mean_rr) ** 2) / (n - 1)))
    diffs = np.diff(rr)
    rmssd = float(np.sqrt(np.sum(diffs**2) / (n - 1)))
    pnn50 = float(np.count_nonzero(np.abs(diffs) > 50.0) / (n - 1) * 100.0)
    return HrvFeatures(
        sdnn_ms=sdnn,
        rmssd_ms=rmssd,
        pnn50_pct=pnn50,
        mean_rr_ms=mean_rr,
        mean_hr_bpm=60000.0 / mean_rr,
    )
