import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emoppg.errors import InsufficientData
from emoppg.hrv import compute_hrv

intervals_strategy = st.lists(
    st.floats(1.0, 5000.0, allow_nan=False), min_size=2, max_size=60
)


def brute_force(rr):
    """Direct loop evaluation of the five metrics, kept independent."""
    n = len(rr)
    mean = sum(rr) / n
    sdnn = math.sqrt(sum((x - mean) ** 2 for x in rr) / (n - 1))
    diffs = [rr[i + 1] - rr[i] for i in range(n - 1)]
    rmssd = math.sqrt(sum(d * d for d in diffs) / (n - 1))
    pnn50 = sum(1 for d in diffs if abs(d) > 50.0) / (n - 1) * 100.0
    return sdnn, rmssd, pnn50, mean, 60000.0 / mean


def test_constant_sequence():
    f = compute_hrv([800, 800, 800])
    assert f.sdnn_ms == 0
    assert f.rmssd_ms == 0
    assert f.pnn50_pct == 0
    assert f.mean_rr_ms == 800
    assert f.mean_hr_bpm == 75


def test_arithmetic_sequence():
    f = compute_hrv([700, 800, 900])
    assert f.sdnn_ms == pytest.approx(100.0)
    assert f.rmssd_ms == pytest.approx(100.0)
    assert f.pnn50_pct == pytest.approx(100.0)
    assert f.mean_rr_ms == pytest.approx(800.0)
    assert f.mean_hr_bpm == pytest.approx(75.0)


def test_two_interval_window():
    f = compute_hrv([1000, 1040])
    assert f.sdnn_ms == pytest.approx(math.sqrt(800.0))
    assert f.rmssd_ms == pytest.approx(40.0)
    assert f.pnn50_pct == 0.0
    assert f.mean_rr_ms == pytest.approx(1020.0)
    assert f.mean_hr_bpm == pytest.approx(60000.0 / 1020.0)


def test_insufficient_data():
    with pytest.raises(InsufficientData):
        compute_hrv([800])
    with pytest.raises(InsufficientData):
        compute_hrv([])
    with pytest.raises(InsufficientData):
        compute_hrv([800, -5])


def test_exactly_50ms_difference_excluded():
    f = compute_hrv([800, 850])
    assert f.pnn50_pct == 0.0
    f = compute_hrv([800, 850.0001])
    assert f.pnn50_pct == pytest.approx(100.0)


@given(intervals_strategy)
@settings(max_examples=200, deadline=None)
def test_matches_brute_force(rr):
    f = compute_hrv(rr)
    sdnn, rmssd, pnn50, mean, hr = brute_force(rr)
    assert f.sdnn_ms == pytest.approx(sdnn, rel=1e-9, abs=1e-9)
    assert f.rmssd_ms == pytest.approx(rmssd, rel=1e-9, abs=1e-9)
    assert f.pnn50_pct == pytest.approx(pnn50, rel=1e-9, abs=1e-9)
    assert f.mean_rr_ms == pytest.approx(mean, rel=1e-9)
    assert f.mean_hr_bpm == pytest.approx(hr, rel=1e-9)


@given(intervals_strategy, st.floats(0.0, 500.0))
@settings(max_examples=100, deadline=None)
def test_shift_invariance(rr, c):
    base = compute_hrv(rr)
    shifted = compute_hrv([x + c for x in rr])
    assert shifted.sdnn_ms == pytest.approx(base.sdnn_ms, rel=1e-6, abs=1e-6)
    assert shifted.rmssd_ms == pytest.approx(base.rmssd_ms, rel=1e-6, abs=1e-6)
    assert shifted.mean_rr_ms == pytest.approx(base.mean_rr_ms + c, rel=1e-9)


@given(intervals_strategy, st.floats(0.1, 10.0))
@settings(max_examples=100, deadline=None)
def test_scale_covariance(rr, k):
    base = compute_hrv(rr)
    scaled = compute_hrv([x * k for x in rr])
    assert scaled.sdnn_ms == pytest.approx(base.sdnn_ms * k, rel=1e-9, abs=1e-9)
    assert scaled.rmssd_ms == pytest.approx(base.rmssd_ms * k, rel=1e-9, abs=1e-9)
    assert scaled.mean_rr_ms == pytest.approx(base.mean_rr_ms * k, rel=1e-9)


def test_permutation_behaviour():
    a = compute_hrv([700, 800, 900])
    b = compute_hrv([700, 900, 800])
    assert b.sdnn_ms == pytest.approx(a.sdnn_ms)
    assert b.mean_rr_ms == pytest.approx(a.mean_rr_ms)
    assert b.mean_hr_bpm == pytest.approx(a.mean_hr_bpm)
    # RMSSD and pNN50 depend on ordering; this witness differs.
    assert b.rmssd_ms != pytest.approx(a.rmssd_ms)


@given(intervals_strategy)
@settings(max_examples=100, deadline=None)
def test_hr_rr_identity(rr):
    f = compute_hrv(rr)
    assert f.mean_hr_bpm * f.mean_rr_ms == pytest.approx(60000.0, rel=1e-9)
