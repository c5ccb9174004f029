"""Information-gain decision trees over mixed nominal/numeric attributes.

Nominal splits branch once per declared value and exhaust the attribute
for the subtree; numeric splits are binary at a midpoint threshold and
the attribute stays available. Trees grow until a node is pure or no
candidate attribute improves information gain.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..ingest import Dataset
from .base import EncodedDataset, Schema, encode_dataset, entropy_bits

_TIE_TOL = 1e-12


@dataclass
class Node:
    counts: np.ndarray  # training class counts reaching this node
    attr: Optional[int] = None  # split column; None marks a leaf
    threshold: Optional[float] = None  # set for numeric splits
    children: Optional[list["Node"]] = None

    @property
    def is_leaf(self) -> bool:
        return self.attr is None

    def distribution(self) -> np.ndarray:
        total = self.counts.sum()
        if total == 0:
            return np.full(len(self.counts), 1.0 / len(self.counts))
        return self.counts / total


def traverse(node: Node, x: np.ndarray) -> Node:
    while node.attr is not None:
        if node.threshold is None:
            node = node.children[int(x[node.attr])]
        else:
            node = node.children[0] if x[node.attr] <= node.threshold else node.children[1]
    return node


class _Grower:
    """Grows one tree; an rng makes feature subsets and tie-breaks reproducible.

    With `allow_zero_gain` (the standalone-tree mode) an impure node
    splits on the best partitionable attribute even at zero gain; the
    forest mode stops as soon as no attribute improves gain.
    """

    def __init__(self, enc: EncodedDataset, subset_size: Optional[int],
                 rng: Optional[np.random.Generator], allow_zero_gain: bool = False):
        self.enc = enc
        self.subset_size = subset_size
        self.rng = rng
        self.allow_zero_gain = allow_zero_gain
        self.n_classes = enc.n_classes

    def grow(self, idx: np.ndarray) -> Node:
        available = np.arange(self.enc.X.shape[1])
        return self._grow(idx, available)

    def _grow(self, idx: np.ndarray, available: np.ndarray) -> Node:
        y_node = self.enc.y[idx]
        counts = np.bincount(y_node, minlength=self.n_classes).astype(np.float64)
        node = Node(counts=counts)
        if len(idx) < 2 or entropy_bits(counts) == 0.0 or len(available) == 0:
            return node
        candidates = self._candidate_attrs(available)
        best_gain = -1.0
        best: list[tuple[int, Optional[float]]] = []
        for a in candidates:
            scored = self._gain(idx, y_node, counts, int(a))
            if scored is None:  # attribute constant within the node
                continue
            gain, threshold = scored
            if gain > best_gain + _TIE_TOL:
                best_gain, best = gain, [(int(a), threshold)]
            elif best and abs(gain - best_gain) <= _TIE_TOL:
                best.append((int(a), threshold))
        min_gain = -_TIE_TOL if self.allow_zero_gain else _TIE_TOL
        if not best or best_gain <= min_gain:
            return node
        if len(best) > 1 and self.rng is not None:
            attr, threshold = best[self.rng.integers(len(best))]
        else:
            attr, threshold = best[0]
        node.attr = attr
        values = self.enc.X[idx, attr]
        if self.enc.nominal[attr]:
            remaining = available[available != attr]
            node.children = []
            for v in range(int(self.enc.n_values[attr])):
                child_idx = idx[values == v]
                if len(child_idx) == 0:
                    node.children.append(Node(counts=counts.copy()))  # parent distribution
                else:
                    node.children.append(self._grow(child_idx, remaining))
        else:
            node.threshold = threshold
            left = idx[values <= threshold]
            right = idx[values > threshold]
            node.children = [self._grow(left, available), self._grow(right, available)]
        return node

    def _candidate_attrs(self, available: np.ndarray) -> np.ndarray:
        if self.subset_size is None or self.rng is None:
            return available
        k = min(self.subset_size, len(available))
        return self.rng.choice(available, size=k, replace=False)

    def _gain(self, idx, y_node, counts, attr: int) -> Optional[tuple[float, Optional[float]]]:
        h_node = entropy_bits(counts)
        n = len(idx)
        values = self.enc.X[idx, attr]
        if self.enc.nominal[attr]:
            codes = values.astype(np.int64)
            nv = int(self.enc.n_values[attr])
            joint = np.bincount(codes * self.n_classes + y_node,
                                minlength=nv * self.n_classes).reshape(nv, self.n_classes)
            sizes = joint.sum(axis=1)
            if np.count_nonzero(sizes) < 2:
                return None
            cond = sum((s / n) * entropy_bits(row) for row, s in zip(joint, sizes) if s > 0)
            return h_node - cond, None
        order = np.argsort(values, kind="stable")
        sv = values[order]
        sy = y_node[order]
        boundaries = np.nonzero(sv[:-1] < sv[1:])[0]
        if len(boundaries) == 0:
            return None
        onehot = np.zeros((n, self.n_classes))
        onehot[np.arange(n), sy] = 1.0
        cum = np.cumsum(onehot, axis=0)
        left = cum[boundaries]
        right = counts - left
        n_left = boundaries + 1.0
        n_right = n - n_left
        h_left = _entropy_rows(left)
        h_right = _entropy_rows(right)
        gains = h_node - (n_left / n) * h_left - (n_right / n) * h_right
        best = int(np.argmax(gains))
        return float(gains[best]), float((sv[boundaries[best]] + sv[boundaries[best] + 1]) / 2.0)


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.maximum(totals, 1), 0.0)
        logs = np.where(p > 0, np.log2(p, where=p > 0), 0.0)
    return -(p * logs).sum(axis=1)


@dataclass
class TreeModel:
    """A single decision tree, optionally reduced-error pruned."""

    schema: Schema
    root: Node
    train_time: float = 0.0
    params: dict = field(default_factory=dict)

    def predict_proba(self, row) -> dict[str, float]:
        x = self.schema.encode_instance(row)
        dist = traverse(self.root, x).distribution()
        return {label: float(p) for label, p in zip(self.schema.class_labels, dist)}

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        out = np.empty((len(X), len(self.schema.class_labels)))
        for i, x in enumerate(X):
            out[i] = traverse(self.root, x).distribution()
        return out


def train_pruned_tree(train: Dataset, prune_fraction: float = 0.25, seed: int = 0) -> TreeModel:
    """Grow an information-gain tree, then reduced-error prune it.

    The tree is grown on (1 - prune_fraction) of the rows and pruned
    bottom-up against the held-out fraction: a subtree collapses to a
    leaf whenever the leaf misclassifies no more held-out rows than the
    subtree did. prune_fraction 0 skips pruning entirely.
    """
    import time

    if not 0 <= prune_fraction < 1:
        raise ValueError("prune_fraction must be in [0, 1)")
    if len(train.rows) == 0:
        raise ValueError("training set is empty")
    t0 = time.perf_counter()
    enc = encode_dataset(train)
    n = len(train.rows)
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_prune = int(round(prune_fraction * n))
    prune_idx, grow_idx = order[:n_prune], order[n_prune:]
    if prune_fraction > 0 and (len(prune_idx) == 0 or len(grow_idx) == 0):
        warnings.warn("training set too small to hold out a pruning set; skipping pruning")
        prune_idx = np.array([], dtype=np.int64)
        grow_idx = np.arange(n)
    root = _Grower(enc, subset_size=None, rng=None, allow_zero_gain=True).grow(np.sort(grow_idx))
    if len(prune_idx) > 0:
        _reduced_error_prune(root, enc, np.sort(prune_idx))
    return TreeModel(
        schema=enc.schema(),
        root=root,
        train_time=time.perf_counter() - t0,
        params={"prune_fraction": prune_fraction, "seed": seed},
    )


def _reduced_error_prune(node: Node, enc: EncodedDataset, idx: np.ndarray) -> int:
    """Prune bottom-up; returns the subtree's error count on idx."""
    y_node = enc.y[idx]
    majority = int(np.argmax(node.counts))
    leaf_errors = int((y_node != majority).sum())
    if node.is_leaf:
        return leaf_errors
    values = enc.X[idx, node.attr]
    subtree_errors = 0
    if node.threshold is None:
        for v, child in enumerate(node.children):
            subtree_errors += _reduced_error_prune(child, enc, idx[values == v])
    else:
        subtree_errors += _reduced_error_prune(node.children[0], enc, idx[values <= node.threshold])
        subtree_errors += _reduced_error_prune(node.children[1], enc, idx[values > node.threshold])
    if leaf_errors <= subtree_errors:
        node.attr = None
        node.threshold = None
        node.children = None
        return leaf_errors
    return subtree_errors
