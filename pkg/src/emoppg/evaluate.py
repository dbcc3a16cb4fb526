"""Classification metrics: confusion matrix, per-class PRF, macro-F1."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .dataset import N_CLASSES, EmotionLabel
from .errors import Empty, LengthMismatch

CLASS_NAMES = tuple(label.name.capitalize() for label in EmotionLabel)


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class EvalReport:
    confusion: np.ndarray  # (3, 3), rows = true, cols = predicted
    accuracy: float
    per_class: tuple
    macro_f1: float
    support: np.ndarray
    zero_division_classes: tuple = field(default_factory=tuple)


def evaluate(truths, predictions) -> EvalReport:
    """Standard multiclass metrics.

    Zero denominators yield precision/recall/F1 of 0 and the class is
    listed in zero_division_classes.
    """
    pred = np.asarray(predictions, dtype=np.int64)
    true = np.asarray(truths, dtype=np.int64)
    if len(pred) != len(true):
        raise LengthMismatch(f"{len(pred)} predictions vs {len(true)} truths")
    if len(pred) == 0:
        raise Empty("nothing to evaluate")

    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(confusion, (true, pred), 1)

    per_class = []
    flagged = []
    for c in range(N_CLASSES):
        tp = confusion[c, c]
        predicted = confusion[:, c].sum()
        actual = confusion[c, :].sum()
        hit_zero = False
        if predicted == 0:
            precision, hit_zero = 0.0, True
        else:
            precision = tp / predicted
        if actual == 0:
            recall, hit_zero = 0.0, True
        else:
            recall = tp / actual
        if precision + recall == 0:
            f1, hit_zero = 0.0, True
        else:
            f1 = 2 * precision * recall / (precision + recall)
        if hit_zero:
            flagged.append(c)
        per_class.append(ClassMetrics(precision=precision, recall=recall, f1=f1))

    return EvalReport(
        confusion=confusion,
        accuracy=float(np.trace(confusion) / len(true)),
        per_class=tuple(per_class),
        macro_f1=float(np.mean([m.f1 for m in per_class])),
        support=confusion.sum(axis=1),
        zero_division_classes=tuple(flagged),
    )


def report_to_text(report: EvalReport) -> str:
    lines = [
        f"accuracy  {report.accuracy:.4f}",
        f"macro_f1  {report.macro_f1:.4f}",
        "",
        f"{'class':<12}{'precision':>10}{'recall':>10}{'f1':>10}{'support':>10}",
    ]
    for name, m, s in zip(CLASS_NAMES, report.per_class, report.support):
        lines.append(f"{name:<12}{m.precision:>10.4f}{m.recall:>10.4f}{m.f1:>10.4f}{s:>10d}")
    lines.append("")
    lines.append("confusion (rows = true, cols = predicted):")
    header = " " * 12 + "".join(f"{n[:9]:>10}" for n in CLASS_NAMES)
    lines.append(header)
    for name, row in zip(CLASS_NAMES, report.confusion):
        lines.append(f"{name:<12}" + "".join(f"{v:>10d}" for v in row))
    if report.zero_division_classes:
        flagged = ", ".join(CLASS_NAMES[c] for c in report.zero_division_classes)
        lines.append(f"zero-division classes: {flagged}")
    return "\n".join(lines) + "\n"


def report_to_dict(report: EvalReport) -> dict:
    return {
        "accuracy": report.accuracy,
        "macro_f1": report.macro_f1,
        "confusion": report.confusion.tolist(),
        "support": report.support.tolist(),
        "per_class": [
            {"class": name, "precision": m.precision, "recall": m.recall, "f1": m.f1}
            for name, m in zip(CLASS_NAMES, report.per_class)
        ],
        "zero_division_classes": list(report.zero_division_classes),
    }


def report_from_dict(data: dict) -> EvalReport:
    return EvalReport(
        confusion=np.asarray(data["confusion"], dtype=np.int64),
        accuracy=data["accuracy"],
        per_class=tuple(
            ClassMetrics(precision=e["precision"], recall=e["recall"], f1=e["f1"])
            for e in data["per_class"]
        ),
        macro_f1=data["macro_f1"],
        support=np.asarray(data["support"], dtype=np.int64),
        zero_division_classes=tuple(data["zero_division_classes"]),
    )


def save_report(report: EvalReport, path):
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2)
        fh.write("\n")


def load_report(path) -> EvalReport:
    with open(path) as fh:
        return report_from_dict(json.load(fh))
