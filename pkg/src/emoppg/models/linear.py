"""Linear classifiers: multinomial logistic regression and one-vs-rest SVM."""

from __future__ import annotations

import numpy as np

from ..dataset import NormalizationParams
from ..errors import DegenerateLabels
from .base import LinearModel, softmax


def _check_labels(y):
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("training labels contain a single class")


def train_logistic(
    X,
    y,
    l2_strength=1e-3,
    max_iters=1000,
    learning_rate=0.5,
    normalization=None,
    feature_names=(),
):
    """Multinomial softmax regression by full-batch gradient descent.

    Zero-initialized and fully deterministic.  The L2 penalty applies to
    the weights only, not the bias.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _check_labels(y)
    n, d = X.shape
    n_classes = 3
    onehot = np.eye(n_classes)[y]
    W = np.zeros((n_classes, d))
    b = np.zeros(n_classes)
    for _ in range(max_iters):
        P = softmax(X @ W.T + b)
        err = (P - onehot) / n
        W -= learning_rate * (err.T @ X + l2_strength * W)
        b -= learning_rate * err.sum(axis=0)
    if normalization is None:
        normalization = NormalizationParams.identity(d)
    return LinearModel(
        weights=W,
        bias=b,
        kind="logistic_softmax",
        normalization=normalization,
        feature_names=tuple(feature_names or ()),
    )


def train_linear_svm(
    X,
    y,
    max_iters=10000,
    l2_strength=1e-3,
    learning_rate=0.1,
    normalization=None,
    feature_names=(),
):
    """One binary hinge-loss classifier per class (one-vs-rest).

    Full-batch subgradient descent with a 1/sqrt(t) step decay; decision is
    the maximum margin score.  Probabilities are the softmax of the margins
    and are deliberately uncalibrated.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    _check_labels(y)
    n, d = X.shape
    n_classes = 3
    W = np.zeros((n_classes, d))
    b = np.zeros(n_classes)
    targets = np.where(y[None, :] == np.arange(n_classes)[:, None], 1.0, -1.0)
    for t in range(1, max_iters + 1):
        step = learning_rate / np.sqrt(t)
        margins = W @ X.T + b[:, None]  # (C, n)
        active = (targets * margins < 1.0).astype(np.float64)
        grad_w = -(active * targets) @ X / n + l2_strength * W
        grad_b = -(active * targets).sum(axis=1) / n
        W -= step * grad_w
        b -= step * grad_b
    if normalization is None:
        normalization = NormalizationParams.identity(d)
    return LinearModel(
        weights=W,
        bias=b,
        kind="svm_ovr",
        normalization=normalization,
        feature_names=tuple(feature_names or ()),
    )
