"""Random Forest and ExtraTrees trained from scratch on numpy arrays."""

from __future__ import annotations

import math

import numpy as np

from ..dataset import NormalizationParams
from ..errors import EmptyDataset
from .base import TreeEnsembleModel, TreeNode

MIN_SAMPLES_SPLIT = 2

_MASK64 = (1 << 64) - 1


def mix_seed(seed: int, index: int) -> int:
    """splitmix64-style mix of (master seed, tree index) -> per-tree seed."""
    z = (seed * 0x9E3779B97F4A7C15 + index + 1) & _MASK64
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def _leaf(y, n_classes):
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    return TreeNode(leaf_distribution=counts / counts.sum())


def _weighted_gini_counts(left_counts, right_counts):
    nl = left_counts.sum()
    nr = right_counts.sum()
    gl = 1.0 - np.sum((left_counts / nl) ** 2)
    gr = 1.0 - np.sum((right_counts / nr) ** 2)
    return (nl * gl + nr * gr) / (nl + nr)


def _best_split_exact(X, y, features, n_classes):
    """Best Gini split over the given features; exhaustive threshold scan."""
    n = len(y)
    onehot = np.eye(n_classes, dtype=np.float64)[y]
    best = None  # (score, feature, threshold)
    for f in features:
        v = X[:, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        if sv[0] == sv[-1]:
            continue
        cum = np.cumsum(onehot[order], axis=0)
        total = cum[-1]
        nl = np.arange(1, n, dtype=np.float64)
        nr = n - nl
        cl = cum[:-1]
        cr = total - cl
        gl = 1.0 - np.sum((cl / nl[:, None]) ** 2, axis=1)
        gr = 1.0 - np.sum((cr / nr[:, None]) ** 2, axis=1)
        score = (nl * gl + nr * gr) / n
        valid = sv[1:] > sv[:-1]
        score[~valid] = np.inf
        i = int(np.argmin(score))
        if np.isfinite(score[i]) and (best is None or score[i] < best[0]):
            best = (score[i], f, (sv[i] + sv[i + 1]) / 2.0)
    return best


def _best_split_random(X, y, features, n_classes, rng):
    """ExtraTrees split: one uniform-random threshold per feature, best by Gini."""
    best = None
    for f in features:
        v = X[:, f]
        lo, hi = v.min(), v.max()
        if lo == hi:
            continue
        threshold = rng.uniform(lo, hi)
        mask = v <= threshold
        if not mask.any() or mask.all():
            continue
        lc = np.bincount(y[mask], minlength=n_classes).astype(np.float64)
        rc = np.bincount(y[~mask], minlength=n_classes).astype(np.float64)
        score = _weighted_gini_counts(lc, rc)
        if best is None or score < best[0]:
            best = (score, f, threshold)
    return best


def _grow_tree(X, y, n_classes, rng, n_candidate_features, randomized):
    if len(y) < MIN_SAMPLES_SPLIT or len(np.unique(y)) == 1:
        return _leaf(y, n_classes)
    d = X.shape[1]
    features = rng.permutation(d)[:n_candidate_features]
    if randomized:
        best = _best_split_random(X, y, features, n_classes, rng)
    else:
        best = _best_split_exact(X, y, features, n_classes)
    if best is None:
        return _leaf(y, n_classes)
    _, f, threshold = best
    mask = X[:, f] <= threshold
    return TreeNode(
        feature_index=int(f),
        threshold=float(threshold),
        left=_grow_tree(X[mask], y[mask], n_classes, rng, n_candidate_features, randomized),
        right=_grow_tree(X[~mask], y[~mask], n_classes, rng, n_candidate_features, randomized),
    )


def _train_forest(X, y, n_trees, seed, bootstrap, randomized, normalization, feature_names):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(y) == 0:
        raise EmptyDataset("cannot train a forest on zero rows")
    n, d = X.shape
    n_classes = 3
    n_candidates = max(1, math.ceil(math.sqrt(d)))
    trees = []
    for t in range(n_trees):
        rng = np.random.default_rng(mix_seed(seed, t))
        if bootstrap:
            sample = rng.integers(0, n, size=n)
            Xs, ys = X[sample], y[sample]
        else:
            Xs, ys = X, y
        trees.append(_grow_tree(Xs, ys, n_classes, rng, n_candidates, randomized))
    kind = "extra_trees" if randomized else "random_forest"
    if normalization is None:
        normalization = NormalizationParams.identity(d)
    return TreeEnsembleModel(
        trees=trees,
        kind=kind,
        n_classes=n_classes,
        n_features=d,
        normalization=normalization,
        feature_names=tuple(feature_names or ()),
    )


def train_random_forest(X, y, n_trees=200, seed=42, normalization=None, feature_names=()):
    """Bagged trees: bootstrap per tree, best Gini split over ceil(sqrt(d))
    random candidate features, grown to purity."""
    return _train_forest(X, y, n_trees, seed, True, False, normalization, feature_names)


def train_extra_trees(X, y, n_trees=200, seed=42, normalization=None, feature_names=()):
    """Extremely randomized trees: full sample per tree, uniform-random
    thresholds, best-of-random by Gini."""
    return _train_forest(X, y, n_trees, seed, False, True, normalization, feature_names)
