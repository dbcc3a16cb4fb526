"""Train a forest on synthetic windows, flatten it, and race the two engines.

Shows the full model lifecycle: feature extraction, stratified split,
training, compilation to the flat-array form, equivalence spot-check, and a
latency comparison.
"""

import numpy as np

from emoppg import models
from emoppg.bench import benchmark, report_to_text
from emoppg.compile import compile_ensemble, predict_compiled_proba
from emoppg.dataset import (
    Scenario,
    apply_normalizer,
    feature_matrix,
    fit_normalizer,
    make_windows,
    stratified_split,
)
from emoppg.evaluate import evaluate, report_to_text as eval_text
from emoppg.models import predict, predict_proba
from emoppg.synth import StateProfile, synth_ibi

profiles = [
    StateProfile(label=0, mean_rr_ms=900, sdnn_target_ms=60, rsa_depth_ms=20, seed=11),
    StateProfile(label=1, mean_rr_ms=650, sdnn_target_ms=25, rsa_depth_ms=5, seed=12),
    StateProfile(label=2, mean_rr_ms=820, sdnn_target_ms=40, rsa_depth_ms=35, seed=13),
]
rows = []
for profile in profiles:
    ibi, labels = synth_ibi(profile, 3720.0)  # 61 windows each
    rows.extend(make_windows(ibi, labels, Scenario.WRIST_ALL))
print(f"{len(rows)} windows, three states")

X, y = feature_matrix(rows)
split = stratified_split(y, test_frac=0.2, seed=42)
norm = fit_normalizer(X[split.train])
Xtr = apply_normalizer(norm, X[split.train])
model = models.train_random_forest(
    Xtr, y[split.train], n_trees=100, seed=42,
    normalization=norm, feature_names=Scenario.WRIST_ALL.feature_names,
)

preds = [predict(model, x).label for x in X[split.test]]
print(eval_text(evaluate(y[split.test], preds)))

compiled = compile_ensemble(model)
print(f"compiled: {compiled.n_nodes} nodes, {len(compiled.tree_roots)} trees, "
      f"max depth {compiled.max_depth}")

# Spot-check equivalence before trusting the fast path.
rng = np.random.default_rng(0)
worst = max(
    float(np.max(np.abs(predict_proba(model, x) - predict_compiled_proba(compiled, x))))
    for x in X[rng.permutation(len(X))[:50]]
)
print(f"max probability difference over 50 probes: {worst:.2e}")

probes = X[split.test]
print(report_to_text(benchmark(model, probes, reps=300, warmup=50, name="forest")))
print(report_to_text(benchmark(compiled, probes, reps=2000, warmup=500, name="forest")))
