"""Versioned binary model container.

Layout (little-endian; full byte map in docs/model_format.md):

  magic "PAFM" | version u16 | kind u8 | n_classes u8 | n_features u32
  | learning_rate f64 | sections...

Each section is a 4-byte tag, a u64 payload length, and the payload:

  NORM  per-feature mean then std (f64 each)
  FNAM  u32 count, then u32 length + utf-8 bytes per name
  LINW  weights row-major (C*F f64) then bias (C f64)
  BASE  per-class base score (C f64)
  TRES  node-tree ensemble: u32 n_trees, then per tree u32 n_nodes and
        preorder node records (i32 feature, f64 threshold, i32 left,
        i32 right, u8 is_leaf, C f64 values)
  CMPL  compiled ensemble (flat arrays; see docs)

Serialization is deterministic: identical models produce identical bytes.
"""

from __future__ import annotations

import struct

import numpy as np

from ..dataset import NormalizationParams
from ..errors import CorruptFile, VersionMismatch
from .base import LinearModel, TreeEnsembleModel, TreeNode

MAGIC = b"PAFM"
VERSION = 1

KIND_CODES = {
    "logistic_softmax": 0,
    "svm_ovr": 1,
    "random_forest": 2,
    "extra_trees": 3,
    "gradient_boosted": 4,
}
KIND_NAMES = {v: k for k, v in KIND_CODES.items()}

_HEADER = struct.Struct("<4sHBBId")


def _flatten_tree(root: TreeNode, n_classes: int):
    """Preorder node table with explicit child indices."""
    nodes = []

    def visit(node):
        idx = len(nodes)
        nodes.append(None)
        if node.is_leaf:
            values = np.zeros(n_classes)
            if node.leaf_distribution is not None:
                values[:] = node.leaf_distribution
            else:
                values[0] = node.leaf_value
            nodes[idx] = (-1, 0.0, -1, -1, 1, values)
        else:
            left = visit(node.left)
            right = visit(node.right)
            nodes[idx] = (
                node.feature_index,
                node.threshold,
                left,
                right,
                0,
                np.zeros(n_classes),
            )
        return idx

    visit(root)
    return nodes


def _pack_tree(root: TreeNode, n_classes: int) -> bytes:
    nodes = _flatten_tree(root, n_classes)
    out = [struct.pack("<I", len(nodes))]
    # i32 feature, f64 threshold, i32 left, i32 right, u8 leaf flag, C values
    rec = struct.Struct(f"<idiiB{n_classes}d")
    for f, thr, left, right, leaf, values in nodes:
        out.append(rec.pack(f, thr, left, right, leaf, *values))
    return b"".join(out)


def _unpack_tree(payload: bytes, offset: int, n_classes: int, regression: bool):
    (n_nodes,) = struct.unpack_from("<I", payload, offset)
    offset += 4
    rec = struct.Struct(f"<idiiB{n_classes}d")
    raw = []
    for _ in range(n_nodes):
        raw.append(rec.unpack_from(payload, offset))
        offset += rec.size
    nodes = []
    for f, thr, left, right, leaf, *values in raw:
        if leaf:
            if regression:
                nodes.append(TreeNode(leaf_value=values[0]))
            else:
                nodes.append(TreeNode(leaf_distribution=np.array(values)))
        else:
            nodes.append(TreeNode(feature_index=f, threshold=thr))
    for node, (f, thr, left, right, leaf, *_) in zip(nodes, raw):
        if not leaf:
            node.left = nodes[left]
            node.right = nodes[right]
    return nodes[0], offset


def _section(tag: bytes, payload: bytes) -> bytes:
    return tag + struct.pack("<Q", len(payload)) + payload


def _pack_floats(values) -> bytes:
    return np.asarray(values, dtype="<f8").tobytes()


def serialize_model(model) -> bytes:
    from .. import compile as compile_mod  # deferred: compile imports models.base

    if isinstance(model, LinearModel):
        kind = model.kind
        n_features = model.n_features
        learning_rate = 0.0
    elif isinstance(model, (TreeEnsembleModel, compile_mod.CompiledEnsemble)):
        kind = model.kind
        n_features = model.n_features
        learning_rate = model.learning_rate
    else:
        raise TypeError(f"cannot serialize {type(model)!r}")

    out = [
        _HEADER.pack(MAGIC, VERSION, KIND_CODES[kind], model.n_classes, n_features, learning_rate)
    ]
    norm = model.normalization
    out.append(_section(b"NORM", _pack_floats(norm.mean) + _pack_floats(norm.std)))
    names_payload = [struct.pack("<I", len(model.feature_names))]
    for name in model.feature_names:
        raw = name.encode("utf-8")
        names_payload.append(struct.pack("<I", len(raw)) + raw)
    out.append(_section(b"FNAM", b"".join(names_payload)))

    if isinstance(model, LinearModel):
        out.append(_section(b"LINW", _pack_floats(model.weights) + _pack_floats(model.bias)))
    elif isinstance(model, TreeEnsembleModel):
        if kind == "gradient_boosted":
            out.append(_section(b"BASE", _pack_floats(model.base_score)))
        trees = [struct.pack("<I", len(model.trees))]
        trees.extend(_pack_tree(t, model.n_classes) for t in model.trees)
        out.append(_section(b"TRES", b"".join(trees)))
    else:
        if kind == "gradient_boosted":
            out.append(_section(b"BASE", _pack_floats(model.base_score)))
        out.append(_section(b"CMPL", compile_mod.pack_compiled(model)))
    return b"".join(out)


def deserialize_model(blob: bytes):
    from .. import compile as compile_mod

    if len(blob) < _HEADER.size:
        raise CorruptFile("file shorter than header")
    magic, version, kind_code, n_classes, n_features, learning_rate = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise CorruptFile(f"bad magic {magic!r}")
    if version != VERSION:
        raise VersionMismatch(f"unsupported format version {version}")
    if kind_code not in KIND_NAMES:
        raise CorruptFile(f"unknown kind code {kind_code}")
    kind = KIND_NAMES[kind_code]

    sections = {}
    offset = _HEADER.size
    while offset < len(blob):
        if offset + 12 > len(blob):
            raise CorruptFile("truncated section header")
        tag = blob[offset : offset + 4]
        (length,) = struct.unpack_from("<Q", blob, offset + 4)
        offset += 12
        if offset + length > len(blob):
            raise CorruptFile(f"truncated section {tag!r}")
        sections[tag] = blob[offset : offset + length]
        offset += length

    if b"NORM" not in sections or b"FNAM" not in sections:
        raise CorruptFile("missing NORM or FNAM section")
    norm_raw = np.frombuffer(sections[b"NORM"], dtype="<f8")
    if len(norm_raw) != 2 * n_features:
        raise CorruptFile("NORM section has wrong length")
    normalization = NormalizationParams(mean=norm_raw[:n_features], std=norm_raw[n_features:])

    payload = sections[b"FNAM"]
    (count,) = struct.unpack_from("<I", payload, 0)
    pos = 4
    names = []
    for _ in range(count):
        (length,) = struct.unpack_from("<I", payload, pos)
        pos += 4
        names.append(payload[pos : pos + length].decode("utf-8"))
        pos += length
    feature_names = tuple(names)

    if kind in ("logistic_softmax", "svm_ovr"):
        raw = np.frombuffer(sections[b"LINW"], dtype="<f8")
        if len(raw) != n_classes * n_features + n_classes:
            raise CorruptFile("LINW section has wrong length")
        weights = raw[: n_classes * n_features].reshape(n_classes, n_features).copy()
        bias = raw[n_classes * n_features :].copy()
        return LinearModel(
            weights=weights,
            bias=bias,
            kind=kind,
            normalization=normalization,
            feature_names=feature_names,
        )

    base_score = np.zeros(n_classes)
    if b"BASE" in sections:
        base_score = np.frombuffer(sections[b"BASE"], dtype="<f8").copy()

    if b"CMPL" in sections:
        return compile_mod.unpack_compiled(
            sections[b"CMPL"], kind, n_classes, n_features, learning_rate, normalization,
            feature_names, base_score,
        )

    if b"TRES" not in sections:
        raise CorruptFile("missing TRES section")
    payload = sections[b"TRES"]
    (n_trees,) = struct.unpack_from("<I", payload, 0)
    pos = 4
    regression = kind == "gradient_boosted"
    trees = []
    try:
        for _ in range(n_trees):
            root, pos = _unpack_tree(payload, pos, n_classes, regression)
            trees.append(root)
    except struct.error as exc:
        raise CorruptFile("truncated tree table") from exc
    return TreeEnsembleModel(
        trees=trees,
        kind=kind,
        n_classes=n_classes,
        n_features=n_features,
        normalization=normalization,
        feature_names=feature_names,
        learning_rate=learning_rate,
        base_score=base_score,
    )


def save_model(model, path) -> int:
    """Write the model; returns the serialized size in bytes."""
    blob = serialize_model(model)
    with open(path, "wb") as fh:
        fh.write(blob)
    return len(blob)


def load_model(path):
    with open(path, "rb") as fh:
        return deserialize_model(fh.read())


def model_size_bytes(model) -> int:
    return len(serialize_model(model))
