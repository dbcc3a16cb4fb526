"""Model containers and the shared prediction contract."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dataset import N_CLASSES, NormalizationParams
from ..errors import DimensionMismatch


@dataclass
class TreeNode:
    """One node of a decision tree.

    Internal nodes route x[feature_index] <= threshold to the left child.
    Classification leaves carry a per-class probability distribution;
    regression leaves (boosting) carry a scalar value.
    """

    feature_index: int = -1
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    leaf_distribution: np.ndarray | None = None
    leaf_value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def n_nodes(self) -> int:
        if self.is_leaf:
            return 1
        return 1 + self.left.n_nodes() + self.right.n_nodes()

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())


@dataclass
class LinearModel:
    """Linear classifier: softmax logistic or one-vs-rest SVM margins."""

    weights: np.ndarray  # (n_classes, n_features)
    bias: np.ndarray  # (n_classes,)
    kind: str  # "logistic_softmax" | "svm_ovr"
    normalization: NormalizationParams
    feature_names: tuple[str, ...] = ()

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]


@dataclass
class TreeEnsembleModel:
    """Trained forest or boosted ensemble in node-tree form."""

    trees: list  # list[TreeNode]; for boosting, round-major then class-major
    kind: str  # "random_forest" | "extra_trees" | "gradient_boosted"
    n_classes: int
    n_features: int
    normalization: NormalizationParams
    feature_names: tuple[str, ...] = ()
    learning_rate: float = 0.0
    base_score: np.ndarray = field(default_factory=lambda: np.zeros(N_CLASSES))


@dataclass(frozen=True)
class Prediction:
    label: int
    probabilities: np.ndarray
    confidence: float


def softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - np.max(scores, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def tree_leaf(node: TreeNode, x: np.ndarray) -> TreeNode:
    """Recursive traversal to the leaf for one row (the naive path)."""
    while not node.is_leaf:
        node = node.left if x[node.feature_index] <= node.threshold else node.right
    return node


def _tree_leaf_recursive(node: TreeNode, x: np.ndarray) -> TreeNode:
    if node.is_leaf:
        return node
    if x[node.feature_index] <= node.threshold:
        return _tree_leaf_recursive(node.left, x)
    return _tree_leaf_recursive(node.right, x)


def predict_proba(model, features: np.ndarray) -> np.ndarray:
    """Class probabilities for one feature row (raw, unnormalized input).

    Applies the model's cached normalization, then the kind-specific
    scoring: softmax for linear models, mean leaf distribution for
    forests, softmax of base + lr * staged sums for boosting.
    """
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1 or len(x) != model.n_features:
        raise DimensionMismatch(f"expected {model.n_features} features, got {x.shape}")
    x = (x - model.normalization.mean) / model.normalization.std

    if isinstance(model, LinearModel):
        return softmax(model.weights @ x + model.bias)

    if model.kind == "gradient_boosted":
        scores = model.base_score.astype(np.float64).copy()
        for i, tree in enumerate(model.trees):
            leaf = _tree_leaf_recursive(tree, x)
            scores[i % model.n_classes] += model.learning_rate * leaf.leaf_value
        return softmax(scores)

    acc = np.zeros(model.n_classes)
    for tree in model.trees:
        acc += _tree_leaf_recursive(tree, x).leaf_distribution
    return acc / len(model.trees)


def predict(model, features: np.ndarray) -> Prediction:
    proba = predict_proba(model, features)
    label = int(np.argmax(proba))  # lowest code wins exact ties
    return Prediction(label=label, probabilities=proba, confidence=float(proba[label]))
