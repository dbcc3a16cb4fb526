"""Flatten tree ensembles into contiguous arrays for fast iterative inference.

Nodes are laid out depth-first per tree with children strictly after their
parent, so traversal offsets only ever increase and the hot path stays
cache-local.  Leaf payloads live in a separate contiguous array so node
records stay fixed-width.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

from .dataset import NormalizationParams
from .errors import DimensionMismatch, MalformedTree
from .models.base import Prediction, TreeEnsembleModel, softmax


@dataclass
class CompiledEnsemble:
    """Flattened ensemble: structure-of-arrays node table plus leaf values.

    leaf_base[i] is -1 for internal nodes; for leaves it indexes
    leaf_values, which holds values_per_leaf consecutive entries per leaf
    (n_classes for forests, 1 for boosted regression trees).
    """

    feature: np.ndarray  # int32[n_nodes]
    threshold: np.ndarray  # float64[n_nodes]
    left: np.ndarray  # int32[n_nodes]
    right: np.ndarray  # int32[n_nodes]
    leaf_base: np.ndarray  # int32[n_nodes]
    leaf_values: np.ndarray  # float64
    tree_roots: np.ndarray  # int32[n_trees]
    values_per_leaf: int
    max_depth: int
    kind: str
    n_classes: int
    n_features: int
    learning_rate: float
    base_score: np.ndarray
    normalization: NormalizationParams
    feature_names: tuple = ()

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def _runtime(self):
        """Derived arrays for the branchless hot loop (not serialized).

        Leaves become self-loops so traversal needs no per-level masking;
        after max_depth steps every cursor sits on its leaf.
        """
        cached = self.__dict__.get("_rt")
        if cached is None:
            idx = np.arange(self.n_nodes, dtype=np.int32)
            is_leaf = self.leaf_base >= 0
            child = np.empty(2 * self.n_nodes, dtype=np.int32)
            child[0::2] = np.where(is_leaf, idx, self.left)
            child[1::2] = np.where(is_leaf, idx, self.right)
            feat = np.where(is_leaf, 0, self.feature).astype(np.int64)
            cached = (child, feat, self.threshold)
            self.__dict__["_rt"] = cached
        return cached


def _validate_node(node, n_classes, n_features):
    if node.is_leaf:
        if node.leaf_distribution is not None:
            dist = np.asarray(node.leaf_distribution)
            if len(dist) != n_classes or abs(float(dist.sum()) - 1.0) > 1e-9:
                raise MalformedTree("leaf distribution does not sum to 1")
        elif node.leaf_value is None:
            raise MalformedTree("leaf carries neither a distribution nor a value")
        return
    if node.left is None or node.right is None:
        raise MalformedTree("internal node with a dangling child")
    if not (0 <= node.feature_index < n_features):
        raise MalformedTree(f"feature index {node.feature_index} out of range")
    if not np.isfinite(node.threshold):
        raise MalformedTree(f"non-finite threshold {node.threshold}")
    _validate_node(node.left, n_classes, n_features)
    _validate_node(node.right, n_classes, n_features)


def compile_ensemble(model: TreeEnsembleModel) -> CompiledEnsemble:
    """Lay the ensemble's trees out as one contiguous node table.

    Scoring over the compiled form is semantically identical to the
    node-tree form; the node count is preserved exactly.
    """
    regression = model.kind == "gradient_boosted"
    values_per_leaf = 1 if regression else model.n_classes

    feature, threshold, left, right, leaf_base = [], [], [], [], []
    leaf_values = []
    roots = []
    max_depth = 0

    for root in model.trees:
        _validate_node(root, model.n_classes, model.n_features)
        roots.append(len(feature))
        max_depth = max(max_depth, root.depth())
        # Depth-first, children after parents so offsets increase downward.
        stack = [(root, -1, False)]
        while stack:
            node, parent, is_right = stack.pop()
            idx = len(feature)
            if parent >= 0:
                (right if is_right else left)[parent] = idx
            if node.is_leaf:
                feature.append(-1)
                threshold.append(0.0)
                left.append(-1)
                right.append(-1)
                leaf_base.append(len(leaf_values))
                if regression:
                    leaf_values.append(node.leaf_value)
                else:
                    leaf_values.extend(node.leaf_distribution)
            else:
                feature.append(node.feature_index)
                threshold.append(node.threshold)
                left.append(-1)
                right.append(-1)
                leaf_base.append(-1)
                stack.append((node.right, idx, True))
                stack.append((node.left, idx, False))

    return CompiledEnsemble(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        leaf_base=np.asarray(leaf_base, dtype=np.int32),
        leaf_values=np.asarray(leaf_values, dtype=np.float64),
        tree_roots=np.asarray(roots, dtype=np.int32),
        values_per_leaf=values_per_leaf,
        max_depth=max_depth,
        kind=model.kind,
        n_classes=model.n_classes,
        n_features=model.n_features,
        learning_rate=model.learning_rate,
        base_score=np.asarray(model.base_score, dtype=np.float64).copy(),
        normalization=model.normalization,
        feature_names=model.feature_names,
    )


if numba is not None:

    @numba.njit(cache=True)
    def _traverse_kernel(roots, feature, threshold, left, right, leaf_base, x):
        out = np.empty(roots.shape[0], dtype=np.int64)
        for t in range(roots.shape[0]):
            cur = roots[t]
            while leaf_base[cur] < 0:
                if x[feature[cur]] <= threshold[cur]:
                    cur = left[cur]
                else:
                    cur = right[cur]
            out[t] = cur
        return out


def _traverse_all(compiled: CompiledEnsemble, x: np.ndarray) -> np.ndarray:
    """Advance every tree from root to leaf; returns the leaf index per tree."""
    if numba is not None:
        return _traverse_kernel(
            compiled.tree_roots,
            compiled.feature,
            compiled.threshold,
            compiled.left,
            compiled.right,
            compiled.leaf_base,
            x,
        )
    # Lockstep numpy fallback: leaves self-loop, so after max_depth steps
    # every cursor sits on its leaf.
    child, feat, threshold = compiled._runtime()
    cur = compiled.tree_roots.astype(np.int64)
    for _ in range(compiled.max_depth):
        # go-right bit folds into the flattened child index: 2*cur + (x > thr)
        cur = child[2 * cur + (x[feat[cur]] > threshold[cur])]
    if (compiled.leaf_base[cur] < 0).any():
        raise MalformedTree("traversal exceeded the precomputed max depth")
    return cur


def traversal_steps(compiled: CompiledEnsemble, tree_index: int, x: np.ndarray) -> int:
    """Steps taken from one root to its leaf (termination witness for tests)."""
    cur = int(compiled.tree_roots[tree_index])
    steps = 0
    while compiled.leaf_base[cur] < 0:
        if x[compiled.feature[cur]] <= compiled.threshold[cur]:
            cur = int(compiled.left[cur])
        else:
            cur = int(compiled.right[cur])
        steps += 1
        if steps > compiled.max_depth:
            raise MalformedTree("traversal exceeded the precomputed max depth")
    return steps


def predict_compiled_proba(compiled: CompiledEnsemble, features: np.ndarray) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1 or len(x) != compiled.n_features:
        raise DimensionMismatch(f"expected {compiled.n_features} features, got {x.shape}")
    x = (x - compiled.normalization.mean) / compiled.normalization.std

    leaves = _traverse_all(compiled, x)
    bases = compiled.leaf_base[leaves]
    if compiled.kind == "gradient_boosted":
        # Trees are round-major: value i belongs to class i % n_classes.
        staged = compiled.leaf_values[bases].reshape(-1, compiled.n_classes).sum(axis=0)
        return softmax(compiled.base_score + compiled.learning_rate * staged)
    vals = compiled.leaf_values[bases[:, None] + np.arange(compiled.n_classes)]
    return vals.mean(axis=0)


def predict_compiled(compiled: CompiledEnsemble, features: np.ndarray) -> Prediction:
    proba = predict_compiled_proba(compiled, features)
    label = int(np.argmax(proba))
    return Prediction(label=label, probabilities=proba, confidence=float(proba[label]))


# ---------------------------------------------------------------------------
# Container (de)serialization; the CMPL section of the model file format.


def pack_compiled(compiled: CompiledEnsemble) -> bytes:
    head = struct.pack(
        "<IIIII",
        compiled.n_nodes,
        len(compiled.leaf_values),
        len(compiled.tree_roots),
        compiled.values_per_leaf,
        compiled.max_depth,
    )
    return b"".join(
        [
            head,
            compiled.feature.astype("<i4").tobytes(),
            compiled.threshold.astype("<f8").tobytes(),
            compiled.left.astype("<i4").tobytes(),
            compiled.right.astype("<i4").tobytes(),
            compiled.leaf_base.astype("<i4").tobytes(),
            compiled.leaf_values.astype("<f8").tobytes(),
            compiled.tree_roots.astype("<i4").tobytes(),
        ]
    )


def unpack_compiled(
    payload, kind, n_classes, n_features, learning_rate, normalization, feature_names, base_score
) -> CompiledEnsemble:
    from .errors import CorruptFile

    try:
        n_nodes, n_values, n_trees, values_per_leaf, max_depth = struct.unpack_from(
            "<IIIII", payload, 0
        )
    except struct.error as exc:
        raise CorruptFile("truncated compiled header") from exc
    expect = 20 + n_nodes * (4 + 8 + 4 + 4 + 4) + n_values * 8 + n_trees * 4
    if len(payload) != expect:
        raise CorruptFile("compiled section has wrong length")
    pos = 20

    def take(dtype, count, width):
        nonlocal pos
        arr = np.frombuffer(payload, dtype=dtype, count=count, offset=pos).copy()
        pos += count * width
        return arr

    return CompiledEnsemble(
        feature=take("<i4", n_nodes, 4),
        threshold=take("<f8", n_nodes, 8),
        left=take("<i4", n_nodes, 4),
        right=take("<i4", n_nodes, 4),
        leaf_base=take("<i4", n_nodes, 4),
        leaf_values=take("<f8", n_values, 8),
        tree_roots=take("<i4", n_trees, 4),
        values_per_leaf=values_per_leaf,
        max_depth=max_depth,
        kind=kind,
        n_classes=n_classes,
        n_features=n_features,
        learning_rate=learning_rate,
        base_score=base_score,
        normalization=normalization,
        feature_names=feature_names,
    )
