"""Synthetic IBI streams and PPG waveforms with known ground truth.

Used to validate the pipeline end to end and to fabricate labeled training
data.  Profiles follow canonical physiology: stress shortens the mean
interval and suppresses variability, relaxation does the opposite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidProfile
from .signal import IbiSequence, PpgSignal

AR1_COEFF = 0.9
RSA_FREQ_HZ = 0.25
# Keep the first/last pulse away from the rendered signal's edges.
EDGE_MARGIN_S = 0.5
PULSE_SIGMA_S = 0.060
DRIFT_FREQ_HZ = 0.1


@dataclass(frozen=True)
class StateProfile:
    """Target interval statistics for one emotional state."""

    label: int
    mean_rr_ms: float
    sdnn_target_ms: float
    rsa_depth_ms: float = 0.0
    seed: int = 0


def synth_ibi(profile: StateProfile, duration_s: float) -> tuple[IbiSequence, np.ndarray]:
    """Generate an interval sequence hitting the profile's statistics.

    Intervals are mean_rr plus an AR(1) noise component (coefficient 0.9,
    rescaled so the realized SDNN matches the target after accounting for
    the sinusoidal respiratory modulation at 0.25 Hz).  Returns the
    sequence and a constant 64 Hz label array covering the duration.
    """
    if not (300.0 <= profile.mean_rr_ms <= 2000.0):
        raise InvalidProfile(f"mean_rr_ms {profile.mean_rr_ms} outside [300, 2000]")
    if profile.sdnn_target_ms < 0 or profile.rsa_depth_ms < 0:
        raise InvalidProfile("variability targets must be nonnegative")
    if duration_s < profile.mean_rr_ms / 1000.0:
        raise InvalidProfile("duration shorter than one mean interval")

    rng = np.random.default_rng(np.random.SeedSequence([profile.seed, 0xB3A7]))
    n = int(np.ceil(duration_s * 1000.0 / profile.mean_rr_ms)) + 8

    # RSA sinusoid contributes amp^2/2 variance; the AR(1) part covers the rest.
    rsa_var = profile.rsa_depth_ms**2 / 2.0
    noise_sd = np.sqrt(max(profile.sdnn_target_ms**2 - rsa_var, 0.0))
    z = np.zeros(n)
    eps = rng.standard_normal(n)
    for i in range(1, n):
        z[i] = AR1_COEFF * z[i - 1] + eps[i]
    realized = np.std(z)
    if realized > 0 and noise_sd > 0:
        z = z * (noise_sd / realized)
    else:
        z = np.zeros(n)

    intervals = np.full(n, profile.mean_rr_ms) + z
    beat_times = np.cumsum(intervals) / 1000.0
    intervals = intervals + profile.rsa_depth_ms * np.sin(2 * np.pi * RSA_FREQ_HZ * beat_times)
    beat_times = np.cumsum(intervals) / 1000.0 + EDGE_MARGIN_S

    keep = beat_times <= duration_s - EDGE_MARGIN_S
    ibi = IbiSequence(intervals_ms=intervals[keep], beat_times_s=beat_times[keep])
    labels = np.full(int(round(duration_s * 64)), profile.label, dtype=np.int64)
    return ibi, labels


def render_ppg(
    ibi: IbiSequence,
    rate_hz: float = 64.0,
    noise_std: float = 0.0,
    duration_s: float | None = None,
    drift_amp: float = 0.0,
    seed: int = 0,
) -> PpgSignal:
    """Render a waveform with a unit Gaussian pulse (sigma 60 ms) per beat.

    The beat ending the first interval has an implicit predecessor one
    interval earlier; both get pulses.  Optional white noise and a 0.1 Hz
    baseline-drift sine can be added on top.
    """
    if duration_s is None:
        duration_s = float(ibi.beat_times_s[-1]) + 1.0 if len(ibi) else 1.0
    t = np.arange(int(round(duration_s * rate_hz))) / rate_hz
    x = np.zeros_like(t)
    if len(ibi):
        first_beat = ibi.beat_times_s[0] - ibi.intervals_ms[0] / 1000.0
        beats = np.concatenate([[first_beat], ibi.beat_times_s])
        for b in beats:
            lo = np.searchsorted(t, b - 5 * PULSE_SIGMA_S)
            hi = np.searchsorted(t, b + 5 * PULSE_SIGMA_S)
            x[lo:hi] += np.exp(-((t[lo:hi] - b) ** 2) / (2 * PULSE_SIGMA_S**2))
    if drift_amp:
        x += drift_amp * np.sin(2 * np.pi * DRIFT_FREQ_HZ * t)
    if noise_std:
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x9916]))
        x += rng.normal(0.0, noise_std, size=len(t))
    return PpgSignal(samples=x, rate_hz=rate_hz, start_time_s=0.0)
