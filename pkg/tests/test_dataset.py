import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from emoppg import dataset
from emoppg.dataset import (
    FeatureRow,
    NormalizationParams,
    Scenario,
    downsample_labels,
    fit_normalizer,
    apply_normalizer,
    make_windows,
    stratified_split,
)
from emoppg.errors import ClassTooSmall, InsufficientData, NonFinite, SchemaError
from emoppg.signal import IbiSequence
from emoppg.synth import StateProfile, synth_ibi


class TestCsvIo:
    def test_ppg_roundtrip(self, tmp_path):
        path = tmp_path / "x_ppg.csv"
        path.write_text("# rate_hz=64\ntime_s,value\n0.0,1.5\n0.015625,2.5\n0.03125,3.5\n")
        sig = dataset.load_ppg_csv(path)
        assert len(sig.samples) == 3
        assert sig.rate_hz == 64
        assert np.allclose(sig.samples, [1.5, 2.5, 3.5])

    def test_header_only_is_empty(self, tmp_path):
        path = tmp_path / "x_ppg.csv"
        path.write_text("# rate_hz=64\ntime_s,value\n")
        assert len(dataset.load_ppg_csv(path).samples) == 0

    def test_nan_rejected_with_row(self, tmp_path):
        path = tmp_path / "x_ppg.csv"
        path.write_text("# rate_hz=64\ntime_s,value\n0.0,1.0\n0.015625,NaN\n")
        with pytest.raises(NonFinite) as exc:
            dataset.load_ppg_csv(path)
        assert "row 4" in str(exc.value)

    def test_wrong_header_rejected(self, tmp_path):
        path = tmp_path / "x_ppg.csv"
        path.write_text("a,b\n0,1\n")
        with pytest.raises(SchemaError):
            dataset.load_ppg_csv(path)

    def test_missing_rate_rejected(self, tmp_path):
        path = tmp_path / "x_ppg.csv"
        path.write_text("time_s,value\n0,1\n")
        with pytest.raises(SchemaError):
            dataset.load_ppg_csv(path)
        assert dataset.load_ppg_csv(path, rate_hz=32).rate_hz == 32

    def test_labels_roundtrip(self, tmp_path):
        path = tmp_path / "y.csv"
        dataset.write_labels_csv(path, [0, 1, 2, 1], rate_hz=700)
        labels, rate = dataset.load_labels_csv(path)
        assert list(labels) == [0, 1, 2, 1]
        assert rate == 700

    def test_bad_label_code_rejected(self, tmp_path):
        path = tmp_path / "y.csv"
        path.write_text("# rate_hz=700\ntime_s,label\n0.0,7\n")
        with pytest.raises(SchemaError):
            dataset.load_labels_csv(path)

    def test_ibi_roundtrip(self, tmp_path):
        path = tmp_path / "z.csv"
        ibi = IbiSequence(np.array([800.0, 820.0]), np.array([0.8, 1.62]))
        dataset.write_ibi_csv(path, ibi)
        loaded = dataset.load_ibi_csv(path)
        assert np.allclose(loaded.intervals_ms, ibi.intervals_ms)
        assert np.allclose(loaded.beat_times_s, ibi.beat_times_s)

    def test_features_roundtrip(self, tmp_path):
        rows = [
            FeatureRow(np.array([1.0, 2.0]), 1, "S2", 60.0),
            FeatureRow(np.array([3.0, 4.0]), 0, "S2", 120.0),
        ]
        path = tmp_path / "f.csv"
        dataset.write_features_csv(path, rows, ["sdnn_ms", "rmssd_ms"])
        loaded, names = dataset.load_features_csv(path)
        assert names == ["sdnn_ms", "rmssd_ms"]
        assert loaded[0].label == 1
        assert np.allclose(loaded[1].features, [3.0, 4.0])


class TestDownsampleLabels:
    def test_factor_11(self):
        out = downsample_labels(np.arange(22), 11)
        assert list(out) == [0, 11]

    def test_identity(self):
        labels = np.array([0, 1, 2, 1])
        assert list(downsample_labels(labels, 1)) == list(labels)

    def test_ceil_rule(self):
        out = downsample_labels(np.arange(23), 11)
        assert list(out) == [0, 11, 22]


def synth_window_input(duration_s=300.0, label=1, seed=5):
    profile = StateProfile(label=label, mean_rr_ms=800, sdnn_target_ms=40, seed=seed)
    return synth_ibi(profile, duration_s)


class TestMakeWindows:
    def test_window_count_300s(self):
        ibi, labels = synth_window_input(300.0)
        rows = make_windows(ibi, labels, Scenario.WRIST_ALL)
        assert [r.window_start_s for r in rows] == [0.0, 60.0, 120.0, 180.0]

    def test_majority_label(self):
        ibi, _ = synth_window_input(120.0)
        labels = np.concatenate([np.full(1920, 0), np.full(5760, 1)])
        rows = make_windows(ibi, labels, Scenario.WRIST_ALL)
        assert rows[0].label == 1

    def test_tie_breaks_to_lowest_code(self):
        ibi, _ = synth_window_input(120.0)
        labels = np.concatenate([np.full(3840, 2), np.full(3840, 1)])
        rows = make_windows(ibi, labels, Scenario.WRIST_ALL)
        assert rows[0].label == 1

    def test_sparse_window_dropped(self):
        # 5 intervals only: below the 10-interval minimum.
        intervals = np.full(5, 800.0)
        ibi = IbiSequence(intervals, np.cumsum(intervals) / 1000.0)
        labels = np.zeros(120 * 64, dtype=int)
        assert make_windows(ibi, labels, Scenario.WRIST_ALL) == []

    def test_scenario_dimensions(self):
        ibi, labels = synth_window_input(180.0)
        for scenario in (Scenario.WRIST_SDNN, Scenario.WRIST_RMSSD, Scenario.WRIST_ALL):
            rows = make_windows(ibi, labels, scenario)
            assert rows and len(rows[0].features) == scenario.dim

    def test_combined_concatenates_chest(self):
        ibi, labels = synth_window_input(180.0)
        chest, _ = synth_window_input(180.0, seed=9)
        rows = make_windows(ibi, labels, Scenario.COMBINED, chest_ibi=chest)
        assert rows and len(rows[0].features) == 10
        wrist_only = make_windows(ibi, labels, Scenario.WRIST_ALL)
        assert np.allclose(rows[0].features[:5], wrist_only[0].features)

    def test_combined_requires_chest(self):
        ibi, labels = synth_window_input(180.0)
        with pytest.raises(ValueError):
            make_windows(ibi, labels, Scenario.COMBINED)

    @given(st.floats(120.0, 1200.0))
    @settings(max_examples=40, deadline=None)
    def test_window_count_formula(self, duration):
        n_labels = int(round(duration * 64))
        duration_eff = n_labels / 64
        ibi, _ = synth_window_input(1.0)
        labels = np.zeros(n_labels, dtype=int)
        rows = make_windows(
            IbiSequence(np.empty(0), np.empty(0)), labels, Scenario.WRIST_ALL
        )
        # No intervals -> no rows, but starts are bounded by the formula;
        # use a dense interval stream to count windows.
        profile = StateProfile(label=0, mean_rr_ms=600, sdnn_target_ms=10, seed=2)
        ibi_full, _ = synth_ibi(profile, duration_eff)
        rows = make_windows(ibi_full, labels, Scenario.WRIST_ALL)
        expected = int(np.floor((duration_eff - 120.0) / 60.0)) + 1
        assert len(rows) == expected


class TestNormalizer:
    def test_hand_example(self):
        params = fit_normalizer(np.array([[1.0], [2.0], [3.0]]))
        assert params.mean[0] == pytest.approx(2.0)
        assert params.std[0] == pytest.approx(np.sqrt(2.0 / 3.0))
        assert apply_normalizer(params, np.array([[2.0]]))[0, 0] == pytest.approx(0.0)

    def test_standardized_input_unchanged(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(200, 3))
        X = (X - X.mean(axis=0)) / X.std(axis=0)
        params = fit_normalizer(X)
        assert np.max(np.abs(apply_normalizer(params, X) - X)) < 1e-9

    def test_constant_column_floored(self):
        X = np.full((3, 1), 5.0)
        params = fit_normalizer(X)
        assert params.std[0] == pytest.approx(1e-8)
        assert np.all(apply_normalizer(params, X) == 0)

    def test_insufficient_rows(self):
        with pytest.raises(InsufficientData):
            fit_normalizer(np.array([[1.0]]))

    def test_post_normalization_statistics(self):
        rng = np.random.default_rng(3)
        X = rng.normal(5, 3, size=(150, 4))
        Xn = apply_normalizer(fit_normalizer(X), X)
        assert np.max(np.abs(Xn.mean(axis=0))) < 1e-9
        assert np.max(np.abs(Xn.std(axis=0) - 1)) < 1e-6


class TestStratifiedSplit:
    def test_488_row_supports(self):
        y = np.repeat([0, 1, 2], [261, 145, 82])
        split = stratified_split(y, test_frac=0.2, seed=42)
        counts = np.bincount(y[split.test], minlength=3)
        assert list(counts) == [52, 29, 17]

    def test_zero_test_frac(self):
        y = np.repeat([0, 1, 2], 10)
        split = stratified_split(y, test_frac=0.0)
        assert len(split.test) == 0
        assert len(split.train) == 30

    def test_deterministic(self):
        y = np.repeat([0, 1, 2], [50, 30, 20])
        a = stratified_split(y, seed=7)
        b = stratified_split(y, seed=7)
        assert np.array_equal(a.train, b.train)
        assert np.array_equal(a.test, b.test)

    def test_class_too_small(self):
        with pytest.raises(ClassTooSmall):
            stratified_split(np.array([0, 0, 1, 2, 2]))

    @given(
        st.tuples(st.integers(2, 80), st.integers(2, 80), st.integers(2, 80)),
        st.integers(0, 1000),
    )
    @settings(max_examples=60, deadline=None)
    def test_partition_properties(self, counts, seed):
        y = np.repeat([0, 1, 2], counts)
        split = stratified_split(y, test_frac=0.2, seed=seed)
        assert len(np.intersect1d(split.train, split.test)) == 0
        assert len(split.train) + len(split.test) == len(y)
        assert set(split.train) | set(split.test) == set(range(len(y)))
        test_counts = np.bincount(y[split.test], minlength=3)
        for c in range(3):
            assert abs(test_counts[c] - round(0.2 * counts[c])) <= 1
