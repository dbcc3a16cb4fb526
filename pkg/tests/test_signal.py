import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emoppg import signal
from emoppg.errors import InvalidBand, SignalTooShort
from emoppg.signal import IbiSequence, PpgSignal


def cascade_gain(sos, freq_hz, rate_hz):
    """Independent transfer-function magnitude: product of biquad responses."""
    z = np.exp(-1j * 2 * np.pi * freq_hz / rate_hz)
    h = 1.0 + 0j
    for b0, b1, b2, a0, a1, a2 in sos:
        h *= (b0 + b1 * z + b2 * z**2) / (a0 + a1 * z + a2 * z**2)
    return abs(h)


class TestDesignBandpass:
    def test_order4_has_two_sections(self):
        spec = signal.design_bandpass(0.5, 8, 4, 64)
        assert spec.n_sections == 2

    def test_inverted_band_rejected(self):
        with pytest.raises(InvalidBand):
            signal.design_bandpass(8, 0.5, 4, 64)

    def test_band_above_nyquist_rejected(self):
        with pytest.raises(InvalidBand):
            signal.design_bandpass(0.5, 40, 4, 64)

    def test_odd_order_rejected(self):
        with pytest.raises(InvalidBand):
            signal.design_bandpass(0.5, 8, 3, 64)

    def test_midband_gain_near_unity(self):
        spec = signal.design_bandpass(0.5, 8, 4, 64)
        gain = cascade_gain(spec.sos, 4.0, 64)
        assert 0.7 <= gain <= 1.0

    def test_passband_within_3db(self):
        spec = signal.design_bandpass(0.5, 8, 4, 64)
        for f in np.linspace(0.5, 8.0, 30):
            assert cascade_gain(spec.sos, f, 64) >= 1 / np.sqrt(2) - 1e-6


class TestFilterZeroPhase:
    spec = signal.design_bandpass(0.5, 8, 4, 64)

    def test_dc_removed(self):
        sig = PpgSignal(np.full(64 * 30, 5.0), 64)
        out = signal.filter_zero_phase(sig, self.spec)
        assert np.max(np.abs(out.samples)) < 0.01 * 5.0

    def test_passband_sine_preserved(self):
        t = np.arange(64 * 30) / 64
        sig = PpgSignal(np.sin(2 * np.pi * 4.0 * t), 64)
        out = signal.filter_zero_phase(sig, self.spec)
        amp = np.max(np.abs(out.samples[64 * 5 : -64 * 5]))
        assert abs(amp - 1.0) < 0.1

    def test_stopband_sine_attenuated(self):
        t = np.arange(64 * 120) / 64
        sig = PpgSignal(np.sin(2 * np.pi * 0.05 * t), 64)
        out = signal.filter_zero_phase(sig, self.spec)
        assert np.max(np.abs(out.samples[64 * 30 : -64 * 30])) < 0.1

    def test_length_and_rate_preserved(self):
        sig = PpgSignal(np.random.default_rng(0).normal(size=500), 64)
        out = signal.filter_zero_phase(sig, self.spec)
        assert len(out.samples) == 500
        assert out.rate_hz == 64

    def test_too_short_rejected(self):
        with pytest.raises(SignalTooShort):
            signal.filter_zero_phase(PpgSignal(np.zeros(11), 64), self.spec)


def pulse_train(beat_times_s, rate_hz=64.0, duration_s=None, sigma_s=0.06):
    if duration_s is None:
        duration_s = max(beat_times_s) + 1.0
    t = np.arange(int(duration_s * rate_hz)) / rate_hz
    x = np.zeros_like(t)
    for b in beat_times_s:
        x += np.exp(-((t - b) ** 2) / (2 * sigma_s**2))
    return PpgSignal(x, rate_hz)


class TestDetectPeaks:
    def test_flat_zero_empty(self):
        assert len(signal.detect_peaks(PpgSignal(np.zeros(640), 64))) == 0

    def test_pulse_train_recovered(self):
        beats = 0.5 + np.arange(20) * 1.0  # 60 bpm
        sig = pulse_train(beats, duration_s=21.0)
        peaks = signal.detect_peaks(sig)
        assert len(peaks) == len(beats)
        assert np.max(np.abs(peaks / 64.0 - beats)) <= 1.0 / 64 + 1e-9

    def test_refractory_drops_second_close_pulse(self):
        sig = pulse_train([1.0, 1.2], duration_s=3.0)
        peaks = signal.detect_peaks(sig)
        assert len(peaks) == 1
        assert abs(peaks[0] / 64.0 - 1.0) < 0.05

    def test_plateau_resolves_to_first_sample(self):
        x = np.zeros(200)
        x[100:104] = 1.0
        peaks = signal.detect_peaks(PpgSignal(x, 64))
        assert list(peaks) == [100]

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_refractory_never_violated(self, seed):
        rng = np.random.default_rng(seed)
        sig = PpgSignal(rng.normal(size=64 * 10), 64)
        peaks = signal.detect_peaks(sig)
        if len(peaks) > 1:
            assert np.min(np.diff(peaks)) >= int(round(0.3 * 64))


class TestPeaksToIbi:
    def test_uniform_train(self):
        ibi = signal.peaks_to_ibi(np.array([0, 64, 128]), 64)
        assert np.allclose(ibi.intervals_ms, [1000, 1000])
        assert np.allclose(ibi.beat_times_s, [1.0, 2.0])

    def test_single_gap(self):
        ibi = signal.peaks_to_ibi(np.array([0, 32]), 64)
        assert np.allclose(ibi.intervals_ms, [500])

    @pytest.mark.parametrize("peaks", [[], [17]])
    def test_degenerate_inputs_empty(self, peaks):
        assert len(signal.peaks_to_ibi(np.array(peaks, dtype=int), 64)) == 0


class TestCleanIbi:
    def make(self, intervals):
        intervals = np.asarray(intervals, dtype=float)
        return IbiSequence(intervals, np.cumsum(intervals) / 1000.0)

    def test_short_interval_rejected(self):
        out = signal.clean_ibi(self.make([250, 800, 900]))
        assert np.allclose(out.intervals_ms, [800, 900])

    def test_large_jump_clipped(self):
        out = signal.clean_ibi(self.make([800, 1100]))
        assert np.allclose(out.intervals_ms, [800, 1050])

    def test_long_interval_rejected(self):
        assert len(signal.clean_ibi(self.make([2100]))) == 0

    def test_downward_jump_clipped(self):
        out = signal.clean_ibi(self.make([1200, 800]))
        assert np.allclose(out.intervals_ms, [1200, 950])

    @given(
        st.lists(st.floats(100, 2500, allow_nan=False), min_size=0, max_size=50)
    )
    @settings(max_examples=100, deadline=None)
    def test_output_invariants(self, intervals):
        out = signal.clean_ibi(self.make(intervals))
        if len(out):
            assert np.min(out.intervals_ms) >= 300
            assert np.max(out.intervals_ms) <= 2000
        if len(out) > 1:
            assert np.max(np.abs(np.diff(out.intervals_ms))) <= 250 + 1e-9


def test_filter_preserves_peak_timing():
    beats = 0.5 + np.arange(25) * 0.9
    sig = pulse_train(beats, duration_s=beats[-1] + 0.5)
    spec = signal.design_bandpass(0.5, 8, 4, 64)
    raw_peaks = signal.detect_peaks(sig)
    filt_peaks = signal.detect_peaks(signal.filter_zero_phase(sig, spec))
    assert len(raw_peaks) == len(filt_peaks)
    assert np.max(np.abs(raw_peaks - filt_peaks)) <= 1
