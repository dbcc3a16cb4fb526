"""Gradient-boosted trees with multiclass softmax loss.

Each round fits one regression tree per class to the first-order softmax
gradients, with second-order (Newton) leaf weights.  Trees are stored
round-major: trees[r * n_classes + c] is round r, class c.
"""

from __future__ import annotations

import numpy as np

from ..dataset import NormalizationParams
from ..errors import DegenerateLabels
from .base import TreeEnsembleModel, TreeNode, softmax

REG_LAMBDA = 1.0
MIN_GAIN = 1e-12


def _leaf_weight(g_sum, h_sum):
    return -g_sum / (h_sum + REG_LAMBDA)


def _best_split(X, g, h):
    """xgboost-style exact greedy split over all features."""
    n, d = X.shape
    G, H = g.sum(), h.sum()
    parent = G * G / (H + REG_LAMBDA)
    best = None  # (gain, feature, threshold)
    for f in range(d):
        v = X[:, f]
        order = np.argsort(v, kind="stable")
        sv = v[order]
        if sv[0] == sv[-1]:
            continue
        gl = np.cumsum(g[order])[:-1]
        hl = np.cumsum(h[order])[:-1]
        gr = G - gl
        hr = H - hl
        gain = gl * gl / (hl + REG_LAMBDA) + gr * gr / (hr + REG_LAMBDA) - parent
        valid = sv[1:] > sv[:-1]
        gain[~valid] = -np.inf
        i = int(np.argmax(gain))
        if gain[i] > MIN_GAIN and (best is None or gain[i] > best[0]):
            best = (gain[i], f, (sv[i] + sv[i + 1]) / 2.0)
    return best


def _grow_regression_tree(X, g, h, depth, max_depth):
    if depth >= max_depth or len(g) < 2:
        return TreeNode(leaf_value=float(_leaf_weight(g.sum(), h.sum())))
    best = _best_split(X, g, h)
    if best is None:
        return TreeNode(leaf_value=float(_leaf_weight(g.sum(), h.sum())))
    _, f, threshold = best
    mask = X[:, f] <= threshold
    return TreeNode(
        feature_index=int(f),
        threshold=float(threshold),
        left=_grow_regression_tree(X[mask], g[mask], h[mask], depth + 1, max_depth),
        right=_grow_regression_tree(X[~mask], g[~mask], h[~mask], depth + 1, max_depth),
    )


def _tree_outputs(tree, X):
    out = np.empty(len(X))
    for i, x in enumerate(X):
        node = tree
        while not node.is_leaf:
            node = node.left if x[node.feature_index] <= node.threshold else node.right
        out[i] = node.leaf_value
    return out


def multiclass_log_loss(scores, y):
    p = softmax(scores)
    return float(-np.mean(np.log(np.clip(p[np.arange(len(y)), y], 1e-15, None))))


def train_gradient_boosted(
    X,
    y,
    rounds=200,
    learning_rate=0.3,
    max_depth=6,
    normalization=None,
    feature_names=(),
    loss_history=None,
):
    """Boosted ensemble from a zero base score.

    When `loss_history` is a list it receives the training log-loss after
    every round (index 0 holds the pre-training loss).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n_classes = 3
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("boosting needs at least two classes")

    onehot = np.eye(n_classes)[y]
    scores = np.zeros((len(y), n_classes))
    trees = []
    if loss_history is not None:
        loss_history.append(multiclass_log_loss(scores, y))
    for _ in range(rounds):
        p = softmax(scores)
        for c in range(n_classes):
            g = p[:, c] - onehot[:, c]
            h = np.maximum(p[:, c] * (1.0 - p[:, c]), 1e-16)
            tree = _grow_regression_tree(X, g, h, 0, max_depth)
            trees.append(tree)
            scores[:, c] += learning_rate * _tree_outputs(tree, X)
        if loss_history is not None:
            loss_history.append(multiclass_log_loss(scores, y))

    if normalization is None:
        normalization = NormalizationParams.identity(X.shape[1])
    return TreeEnsembleModel(
        trees=trees,
        kind="gradient_boosted",
        n_classes=n_classes,
        n_features=X.shape[1],
        normalization=normalization,
        feature_names=tuple(feature_names or ()),
        learning_rate=learning_rate,
        base_score=np.zeros(n_classes),
    )
