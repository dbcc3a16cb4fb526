"""Ingestion, windowing, normalization and splitting of labeled HRV data.

CSV schemas (all comma-separated, one header row; `#`-prefixed metadata
lines may precede the header):

  ppg:      time_s,value            sidecar line ``# rate_hz=64``
  labels:   time_s,label            label in {0,1,2}; sidecar ``# rate_hz=700``
  ibi:      beat_time_s,interval_ms
  features: subject,window_start_s,<feature names>,label
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import hrv
from .errors import ClassTooSmall, InsufficientData, NonFinite, SchemaError
from .signal import IbiSequence, PpgSignal

STD_FLOOR = 1e-8


class EmotionLabel(enum.IntEnum):
    BASELINE = 0
    STRESS = 1
    AMUSEMENT = 2


N_CLASSES = 3


class Scenario(enum.Enum):
    """Feature configurations and their dimensions."""

    WRIST_SDNN = ("sdnn_ms",)
    WRIST_RMSSD = ("rmssd_ms",)
    WRIST_ALL = hrv.FEATURE_NAMES
    COMBINED = hrv.FEATURE_NAMES + tuple(f"chest_{n}" for n in hrv.FEATURE_NAMES)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.value

    @property
    def dim(self) -> int:
        return len(self.value)


@dataclass(frozen=True)
class FeatureRow:
    features: np.ndarray
    label: int
    subject_id: str
    window_start_s: float


@dataclass(frozen=True)
class NormalizationParams:
    """Cached z-score statistics from the training set."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        if mean.shape != std.shape:
            raise ValueError("mean and std must have equal length")
        if np.any(std <= 0):
            raise ValueError("std entries must be positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)

    @classmethod
    def identity(cls, dim: int) -> "NormalizationParams":
        return cls(mean=np.zeros(dim), std=np.ones(dim))


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    test: np.ndarray
    validation: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))


# ---------------------------------------------------------------------------
# CSV ingestion


def _read_rows(path, expected_header):
    """Yield (row_number, fields) for data rows; returns (rows, metadata)."""
    metadata = {}
    rows = []
    with open(path, newline="") as fh:
        header = None
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if "=" in body:
                    key, _, value = body.partition("=")
                    metadata[key.strip()] = value.strip()
                continue
            fields = next(csv.reader([line]))
            if header is None:
                header = [f.strip() for f in fields]
                if header != list(expected_header):
                    raise SchemaError(
                        f"{path}: expected header {','.join(expected_header)}, "
                        f"got {','.join(header)}",
                        row=lineno,
                    )
                continue
            if len(fields) != len(expected_header):
                raise SchemaError(f"{path}: expected {len(expected_header)} fields", row=lineno)
            rows.append((lineno, fields))
    if header is None:
        raise SchemaError(f"{path}: missing header row")
    return rows, metadata


def _parse_float(raw, path, lineno):
    try:
        value = float(raw)
    except ValueError:
        raise SchemaError(f"{path}: cannot parse {raw!r} as a number", row=lineno) from None
    if not math.isfinite(value):
        raise NonFinite(f"{path}: non-finite value {raw!r}", row=lineno)
    return value


def load_ppg_csv(path, rate_hz: float | None = None) -> PpgSignal:
    """Load a ppg CSV; rate comes from the sidecar line unless overridden."""
    rows, metadata = _read_rows(path, ("time_s", "value"))
    if rate_hz is None:
        if "rate_hz" not in metadata:
            raise SchemaError(f"{path}: no '# rate_hz=' sidecar line and no rate given")
        rate_hz = float(metadata["rate_hz"])
    times = [_parse_float(f[0], path, ln) for ln, f in rows]
    values = [_parse_float(f[1], path, ln) for ln, f in rows]
    start = times[0] if times else 0.0
    return PpgSignal(samples=np.asarray(values), rate_hz=rate_hz, start_time_s=start)


def load_labels_csv(path, rate_hz: float | None = None) -> tuple[np.ndarray, float]:
    """Load a labels CSV; returns (labels, native rate)."""
    rows, metadata = _read_rows(path, ("time_s", "label"))
    if rate_hz is None:
        if "rate_hz" not in metadata:
            raise SchemaError(f"{path}: no '# rate_hz=' sidecar line and no rate given")
        rate_hz = float(metadata["rate_hz"])
    labels = []
    for lineno, fields in rows:
        _parse_float(fields[0], path, lineno)
        value = _parse_float(fields[1], path, lineno)
        code = int(value)
        if code != value or code not in (0, 1, 2):
            raise SchemaError(f"{path}: label must be 0, 1 or 2, got {fields[1]!r}", row=lineno)
        labels.append(code)
    return np.asarray(labels, dtype=np.int64), rate_hz


def load_ibi_csv(path) -> IbiSequence:
    rows, _ = _read_rows(path, ("beat_time_s", "interval_ms"))
    beat_times = [_parse_float(f[0], path, ln) for ln, f in rows]
    intervals = [_parse_float(f[1], path, ln) for ln, f in rows]
    return IbiSequence(intervals_ms=np.asarray(intervals), beat_times_s=np.asarray(beat_times))


def write_ppg_csv(path, signal: PpgSignal):
    with open(path, "w", newline="") as fh:
        fh.write(f"# rate_hz={signal.rate_hz:g}\n")
        fh.write("time_s,value\n")
        for i, v in enumerate(signal.samples):
            fh.write(f"{signal.start_time_s + i / signal.rate_hz:.6f},{v:.8g}\n")


def write_labels_csv(path, labels, rate_hz: float):
    with open(path, "w", newline="") as fh:
        fh.write(f"# rate_hz={rate_hz:g}\n")
        fh.write("time_s,label\n")
        for i, code in enumerate(labels):
            fh.write(f"{i / rate_hz:.6f},{int(code)}\n")


def write_ibi_csv(path, ibi: IbiSequence):
    with open(path, "w", newline="") as fh:
        fh.write("beat_time_s,interval_ms\n")
        for t, iv in zip(ibi.beat_times_s, ibi.intervals_ms):
            fh.write(f"{t:.6f},{iv:.8g}\n")


def write_features_csv(path, rows: list[FeatureRow], feature_names):
    with open(path, "w", newline="") as fh:
        fh.write("subject,window_start_s," + ",".join(feature_names) + ",label\n")
        for row in rows:
            feats = ",".join(f"{v:.10g}" for v in row.features)
            fh.write(f"{row.subject_id},{row.window_start_s:.6f},{feats},{row.label}\n")


def load_features_csv(path) -> tuple[list[FeatureRow], list[str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or len(header) < 4 or header[0] != "subject" or header[-1] != "label":
            raise SchemaError(f"{path}: malformed features header")
        feature_names = header[2:-1]
        rows = []
        for lineno, fields in enumerate(reader, start=2):
            if not fields:
                continue
            if len(fields) != len(header):
                raise SchemaError(f"{path}: expected {len(header)} fields", row=lineno)
            feats = np.array([_parse_float(v, path, lineno) for v in fields[2:-1]])
            rows.append(
                FeatureRow(
                    features=feats,
                    label=int(fields[-1]),
                    subject_id=fields[0],
                    window_start_s=_parse_float(fields[1], path, lineno),
                )
            )
    return rows, feature_names


# ---------------------------------------------------------------------------
# Windowing


def downsample_labels(labels, factor: int) -> np.ndarray:
    """Stride sampling: keep every factor-th label starting at index 0."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    return np.asarray(labels)[::factor]


MIN_INTERVALS_PER_WINDOW = 10


def make_windows(
    ibi: IbiSequence,
    labels: np.ndarray,
    scenario: Scenario,
    width_s: float = 120.0,
    step_s: float = 60.0,
    label_rate_hz: float = 64.0,
    subject_id: str = "S0",
    chest_ibi: IbiSequence | None = None,
) -> list[FeatureRow]:
    """Slice the interval stream into overlapping windows of features.

    Windows start at 0, step_s, 2*step_s, ... while start + width_s fits in
    the label stream's duration.  An interval belongs to a window when its
    beat time lies in [start, start + width).  Each window is labeled by
    majority vote over its label samples (ties break to the lowest code)
    and dropped when it holds fewer than 10 intervals.
    """
    if scenario is Scenario.COMBINED and chest_ibi is None:
        raise ValueError("COMBINED scenario requires a chest interval sequence")
    labels = np.asarray(labels, dtype=np.int64)
    duration_s = len(labels) / label_rate_hz
    rows = []
    start = 0.0
    while start + width_s <= duration_s + 1e-9:
        lo = int(round(start * label_rate_hz))
        hi = int(round((start + width_s) * label_rate_hz))
        window_labels = labels[lo:hi]
        counts = np.bincount(window_labels, minlength=N_CLASSES)
        label = int(np.argmax(counts))  # argmax takes the lowest code on ties

        feats = _window_features(ibi, start, width_s, scenario)
        if feats is not None and scenario is Scenario.COMBINED:
            chest = _window_features(chest_ibi, start, width_s, Scenario.WRIST_ALL)
            feats = None if chest is None else np.concatenate([feats, chest])
        if feats is not None:
            rows.append(
                FeatureRow(
                    features=feats, label=label, subject_id=subject_id, window_start_s=start
                )
            )
        start += step_s
    return rows


def _window_features(ibi, start, width_s, scenario):
    mask = (ibi.beat_times_s >= start) & (ibi.beat_times_s < start + width_s)
    intervals = ibi.intervals_ms[mask]
    if len(intervals) < MIN_INTERVALS_PER_WINDOW:
        return None
    feats = hrv.compute_hrv(intervals)
    if scenario is Scenario.WRIST_SDNN:
        return np.array([feats.sdnn_ms])
    if scenario is Scenario.WRIST_RMSSD:
        return np.array([feats.rmssd_ms])
    return feats.as_array()


# ---------------------------------------------------------------------------
# Normalization and splitting


def feature_matrix(rows: list[FeatureRow]) -> tuple[np.ndarray, np.ndarray]:
    X = np.stack([r.features for r in rows]) if rows else np.empty((0, 0))
    y = np.array([r.label for r in rows], dtype=np.int64)
    return X, y


def fit_normalizer(train_rows) -> NormalizationParams:
    """Per-feature population mean/std; std floored at 1e-8 for constants."""
    X = train_rows if isinstance(train_rows, np.ndarray) else feature_matrix(train_rows)[0]
    if X.shape[0] < 2:
        raise InsufficientData("need >= 2 training rows to fit a normalizer")
    mean = X.mean(axis=0)
    std = np.maximum(X.std(axis=0), STD_FLOOR)
    return NormalizationParams(mean=mean, std=std)


def apply_normalizer(params: NormalizationParams, X: np.ndarray) -> np.ndarray:
    return (np.asarray(X, dtype=np.float64) - params.mean) / params.std


def stratified_split(labels, test_frac: float = 0.2, seed: int = 42) -> SplitIndices:
    """Deterministic stratified train/test split.

    Within each class, indices are shuffled by numpy's default PRNG seeded
    from SeedSequence([seed, class_code]).  The total test size is
    round(test_frac * N), apportioned across classes by largest remainder
    of test_frac * class_count (ties to the lowest class code).
    """
    y = np.asarray(labels, dtype=np.int64)
    classes = np.unique(y)
    for c in classes:
        if np.count_nonzero(y == c) < 2:
            raise ClassTooSmall(f"class {c} has fewer than 2 rows")

    total_test = int(round(test_frac * len(y)))
    quotas = {int(c): test_frac * np.count_nonzero(y == c) for c in classes}
    counts = {c: int(math.floor(q)) for c, q in quotas.items()}
    leftovers = sorted(
        classes, key=lambda c: (-(quotas[int(c)] - counts[int(c)]), int(c))
    )
    i = 0
    while sum(counts.values()) < total_test:
        counts[int(leftovers[i % len(leftovers)])] += 1
        i += 1

    train, test = [], []
    for c in classes:
        idx = np.flatnonzero(y == c)
        rng = np.random.default_rng(np.random.SeedSequence([seed, int(c)]))
        idx = idx[rng.permutation(len(idx))]
        n_test = counts[int(c)]
        test.extend(idx[:n_test])
        train.extend(idx[n_test:])
    return SplitIndices(
        train=np.sort(np.asarray(train, dtype=np.int64)),
        test=np.sort(np.asarray(test, dtype=np.int64)),
    )
