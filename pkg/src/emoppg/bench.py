"""Single-threaded latency and size measurement for source vs compiled models."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .compile import CompiledEnsemble, predict_compiled_proba
from .errors import NoProbes
from .models.base import predict_proba
from .models.persistence import model_size_bytes


@dataclass(frozen=True)
class LatencyStats:
    mean_us: float
    p50_us: float
    p99_us: float
    min_us: float
    max_us: float


@dataclass(frozen=True)
class BenchReport:
    model_name: str
    variant: str  # "source" | "compiled"
    size_bytes: int
    latency: LatencyStats
    reps: int
    warmup: int
    single_thread: bool = True


def benchmark(model_or_compiled, probe_rows, reps=10000, warmup=1000, name="model") -> BenchReport:
    """Time one-row inference on a monotonic clock, cycling the probe rows.

    The source variant runs the naive recursive node-tree traversal; the
    compiled variant runs the iterative flat-array traversal.  Warmup
    iterations are excluded from the statistics.
    """
    probes = np.asarray(probe_rows, dtype=np.float64)
    if probes.ndim == 1:
        probes = probes[None, :]
    if probes.shape[0] == 0:
        raise NoProbes("benchmark needs at least one probe row")
    if reps < 100:
        raise ValueError("reps must be >= 100")

    if isinstance(model_or_compiled, CompiledEnsemble):
        variant = "compiled"
        score = predict_compiled_proba
    else:
        variant = "source"
        score = predict_proba

    n_probes = probes.shape[0]
    for i in range(warmup):
        score(model_or_compiled, probes[i % n_probes])

    samples_ns = np.empty(reps)
    for i in range(reps):
        row = probes[i % n_probes]
        t0 = time.perf_counter_ns()
        score(model_or_compiled, row)
        samples_ns[i] = time.perf_counter_ns() - t0

    us = samples_ns / 1000.0
    latency = LatencyStats(
        mean_us=float(us.mean()),
        p50_us=float(np.percentile(us, 50)),
        p99_us=float(np.percentile(us, 99)),
        min_us=float(us.min()),
        max_us=float(us.max()),
    )
    return BenchReport(
        model_name=name,
        variant=variant,
        size_bytes=model_size_bytes(model_or_compiled),
        latency=latency,
        reps=reps,
        warmup=warmup,
    )


def report_to_dict(report: BenchReport) -> dict:
    return {
        "model_name": report.model_name,
        "variant": report.variant,
        "size_bytes": report.size_bytes,
        "latency_us": {
            "mean": report.latency.mean_us,
            "p50": report.latency.p50_us,
            "p99": report.latency.p99_us,
            "min": report.latency.min_us,
            "max": report.latency.max_us,
        },
        "reps": report.reps,
        "warmup": report.warmup,
        "single_thread": report.single_thread,
    }


def report_from_dict(data: dict) -> BenchReport:
    lat = data["latency_us"]
    return BenchReport(
        model_name=data["model_name"],
        variant=data["variant"],
        size_bytes=data["size_bytes"],
        latency=LatencyStats(
            mean_us=lat["mean"],
            p50_us=lat["p50"],
            p99_us=lat["p99"],
            min_us=lat["min"],
            max_us=lat["max"],
        ),
        reps=data["reps"],
        warmup=data["warmup"],
        single_thread=data["single_thread"],
    )


def report_to_text(report: BenchReport) -> str:
    lat = report.latency
    return (
        f"{report.model_name} [{report.variant}]  size={report.size_bytes} B  "
        f"mean={lat.mean_us:.2f}us p50={lat.p50_us:.2f}us p99={lat.p99_us:.2f}us "
        f"min={lat.min_us:.2f}us max={lat.max_us:.2f}us "
        f"(reps={report.reps}, warmup={report.warmup})\n"
    )


def save_report(report: BenchReport, path):
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2)
        fh.write("\n")


def load_report(path) -> BenchReport:
    with open(path) as fh:
        return report_from_dict(json.load(fh))


def frontier_csv_rows(entries) -> str:
    """Plot-ready CSV: one line per (model, size, macro_f1) entry."""
    lines = ["model,variant,size_bytes,macro_f1"]
    for name, variant, size_bytes, macro_f1 in entries:
        lines.append(f"{name},{variant},{size_bytes},{macro_f1:.6f}")
    return "\n".join(lines) + "\n"
