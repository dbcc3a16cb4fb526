"""Emotion recognition from wrist PPG: signals, HRV features, classifiers,
and a compiled tree-ensemble inference engine."""

from . import bench, compile, dataset, evaluate, hrv, models, signal, synth
from .dataset import EmotionLabel, Scenario

__version__ = "0.1.0"

__all__ = [
    "bench",
    "compile",
    "dataset",
    "evaluate",
    "hrv",
    "models",
    "signal",
    "synth",
    "EmotionLabel",
    "Scenario",
    "__version__",
]
