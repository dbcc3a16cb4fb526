"""Convert one WESAD subject pickle into the toolkit's three CSV files.

The archives store a nested dict: signal/wrist/BVP at 64 Hz, signal/chest/ECG
at 700 Hz, and a 700 Hz label vector.  Output files use the exact schemas the
downstream toolkit reads: a `# rate_hz=` sidecar line, then a header row,
then data rows.
"""

from __future__ import annotations

import pickle
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ecg import detect_r_peaks, peaks_to_rr_ms

BVP_RATE_HZ = 64.0
LABEL_RATE_HZ = 700.0
ECG_RATE_HZ = 700.0

# WESAD condition codes kept, in output order: baseline, stress, amusement.
LABEL_MAP = {1: 0, 2: 1, 3: 2}


class UnreadableArchive(Exception):
    """The subject file cannot be opened or is not the expected pickle shape."""


class MissingStream(Exception):
    """A required signal stream is absent from the archive."""


@dataclass(frozen=True)
class SubjectBundle:
    subject_id: str
    wrist_bvp: np.ndarray  # 64 Hz
    labels: np.ndarray  # 700 Hz, remapped to {0, 1, 2}
    chest_rr_ms: np.ndarray | None
    chest_rr_times_s: np.ndarray | None


def _dig(mapping, *keys):
    node = mapping
    for key in keys:
        if not isinstance(node, dict) or key not in node:
            return None
        node = node[key]
    return node


def load_subject(path) -> SubjectBundle:
    """Read and normalize one subject archive."""
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            data = pickle.load(fh, encoding="latin1")
    except (OSError, pickle.UnpicklingError, EOFError, UnicodeDecodeError) as exc:
        raise UnreadableArchive(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UnreadableArchive(f"{path}: expected a dict archive, got {type(data).__name__}")

    bvp = _dig(data, "signal", "wrist", "BVP")
    if bvp is None:
        raise MissingStream(f"{path}: no wrist BVP stream")
    labels_raw = data.get("label")
    if labels_raw is None:
        raise MissingStream(f"{path}: no label stream")

    bvp = np.asarray(bvp, dtype=np.float64).reshape(-1)
    labels_raw = np.asarray(labels_raw).reshape(-1).astype(np.int64)
    keep = np.isin(labels_raw, list(LABEL_MAP))
    labels = np.array([LABEL_MAP[c] for c in labels_raw[keep]], dtype=np.int64)

    chest_rr = chest_times = None
    ecg = _dig(data, "signal", "chest", "ECG")
    if ecg is None:
        warnings.warn(f"{path}: no chest ECG stream, skipping chest ibi output")
    else:
        ecg = np.asarray(ecg, dtype=np.float64).reshape(-1)
        peaks = detect_r_peaks(ecg, ECG_RATE_HZ)
        chest_rr, chest_times = peaks_to_rr_ms(peaks, ECG_RATE_HZ)

    subject_id = data.get("subject", path.stem)
    if isinstance(subject_id, bytes):
        subject_id = subject_id.decode()
    return SubjectBundle(
        subject_id=str(subject_id),
        wrist_bvp=bvp,
        labels=labels,
        chest_rr_ms=chest_rr,
        chest_rr_times_s=chest_times,
    )


def _write_ppg_csv(path, samples, rate_hz):
    with open(path, "w", newline="") as fh:
        fh.write(f"# rate_hz={rate_hz:g}\n")
        fh.write("time_s,value\n")
        for i, v in enumerate(samples):
            fh.write(f"{i / rate_hz:.6f},{v:.8g}\n")


def _write_labels_csv(path, labels, rate_hz):
    with open(path, "w", newline="") as fh:
        fh.write(f"# rate_hz={rate_hz:g}\n")
        fh.write("time_s,label\n")
        for i, code in enumerate(labels):
            fh.write(f"{i / rate_hz:.6f},{int(code)}\n")


def _write_ibi_csv(path, intervals_ms, beat_times_s):
    with open(path, "w", newline="") as fh:
        fh.write("beat_time_s,interval_ms\n")
        for t, iv in zip(beat_times_s, intervals_ms):
            fh.write(f"{t:.6f},{iv:.8g}\n")


def convert_subject(input_path, out_dir) -> list[Path]:
    """Convert one archive; returns the paths written."""
    bundle = load_subject(input_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = bundle.subject_id

    written = []
    ppg_path = out_dir / f"{stem}_ppg.csv"
    _write_ppg_csv(ppg_path, bundle.wrist_bvp, BVP_RATE_HZ)
    written.append(ppg_path)

    labels_path = out_dir / f"{stem}_labels.csv"
    _write_labels_csv(labels_path, bundle.labels, LABEL_RATE_HZ)
    written.append(labels_path)

    if bundle.chest_rr_ms is not None:
        ibi_path = out_dir / f"{stem}_chest_ibi.csv"
        _write_ibi_csv(ibi_path, bundle.chest_rr_ms, bundle.chest_rr_times_s)
        written.append(ibi_path)
    return written
