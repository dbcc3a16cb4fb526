"""WESAD subject archives -> wrist PPG, label, and chest RR interval CSVs."""

from .convert import (
    MissingStream,
    SubjectBundle,
    UnreadableArchive,
    convert_subject,
    load_subject,
)
from .ecg import detect_r_peaks

__all__ = [
    "MissingStream",
    "SubjectBundle",
    "UnreadableArchive",
    "convert_subject",
    "load_subject",
    "detect_r_peaks",
]

__version__ = "0.1.0"
