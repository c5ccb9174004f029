"""Attribute ranking by information gain, with supervised discretization.

Nominal attributes score H(class) - H(class | attribute) directly, in
bits. Numeric attributes are first discretized by recursive entropy
minimization with the minimum-description-length stopping rule, then
scored as if nominal; an attribute the rule refuses to cut at all scores
zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..ingest import Dataset
from .base import EncodedDataset, encode_dataset, entropy_bits


@dataclass(frozen=True)
class AttributeRanking:
    """Attributes sorted by descending information gain (bits)."""

    entries: tuple[tuple[str, float], ...]

    def gain(self, name: str) -> float:
        for entry_name, gain in self.entries:
            if entry_name == name:
                return gain
        raise KeyError(name)

    def names(self) -> list[str]:
        return [name for name, _ in self.entries]

    def __iter__(self):
        return iter(self.entries)


def info_gain_rank(dataset: Dataset) -> AttributeRanking:
    """Rank every non-class attribute by information gain in bits."""
    enc = encode_dataset(dataset)
    if len(np.unique(enc.y)) < 2:
        raise ValueError("degenerate class")
    gains = []
    for j, spec in enumerate(enc.attributes):
        if enc.nominal[j]:
            gain = _nominal_gain(enc.X[:, j].astype(np.int64), enc.y,
                                 int(enc.n_values[j]), enc.n_classes)
        else:
            gain = _discretized_gain(enc.X[:, j], enc.y, enc.n_classes)
        gains.append((spec.name, max(gain, 0.0)))
    # descending by gain; original attribute order breaks exact ties
    gains.sort(key=lambda item: -item[1])
    return AttributeRanking(tuple(gains))


def select_features(ranking: AttributeRanking, epsilon: float = 0.0) -> set[str]:
    """Attributes whose information gain exceeds epsilon."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    return {name for name, gain in ranking if gain > epsilon}


def _nominal_gain(codes: np.ndarray, y: np.ndarray, n_values: int, n_classes: int) -> float:
    joint = np.bincount(codes * n_classes + y, minlength=n_values * n_classes)
    joint = joint.reshape(n_values, n_classes).astype(np.float64)
    return _gain_from_joint(joint)


def _gain_from_joint(joint: np.ndarray) -> float:
    n = joint.sum()
    class_counts = joint.sum(axis=0)
    h_class = entropy_bits(class_counts)
    group_sizes = joint.sum(axis=1)
    cond = 0.0
    for counts, size in zip(joint, group_sizes):
        if size > 0:
            cond += (size / n) * entropy_bits(counts)
    return h_class - cond


def _discretized_gain(values: np.ndarray, y: np.ndarray, n_classes: int) -> float:
    cuts = mdl_cut_points(values, y, n_classes)
    if not cuts:
        return 0.0
    bins = np.searchsorted(np.asarray(cuts), values, side="right")
    joint = np.bincount(bins * n_classes + y, minlength=(len(cuts) + 1) * n_classes)
    return _gain_from_joint(joint.reshape(len(cuts) + 1, n_classes).astype(np.float64))


def mdl_cut_points(values: np.ndarray, y: np.ndarray, n_classes: int) -> list[float]:
    """Supervised binary cut points accepted by the MDL stopping rule.

    Recursively picks the cut minimizing the class entropy of the two
    halves, keeping it only when the information gain beats
    (log2(n-1) + log2(3^k - 2) - k*H + k1*H1 + k2*H2) / n.
    """
    order = np.argsort(values, kind="stable")
    cuts: list[float] = []
    _mdl_recurse(values[order], y[order], n_classes, cuts)
    return sorted(cuts)


def _mdl_recurse(sv: np.ndarray, sy: np.ndarray, n_classes: int, cuts: list[float]) -> None:
    n = len(sv)
    if n < 2:
        return
    # cumulative class counts over the sorted prefix
    onehot = np.zeros((n, n_classes), dtype=np.float64)
    onehot[np.arange(n), sy] = 1.0
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]
    h_all = entropy_bits(total)
    if h_all == 0.0:
        return
    boundaries = np.nonzero(sv[:-1] < sv[1:])[0]  # cut after position i
    if len(boundaries) == 0:
        return
    left = cum[boundaries]
    right = total - left
    n_left = boundaries + 1.0
    n_right = n - n_left
    h_left = _entropy_rows(left)
    h_right = _entropy_rows(right)
    gains = h_all - (n_left / n) * h_left - (n_right / n) * h_right
    best = int(np.argmax(gains))
    gain = float(gains[best])
    if gain <= 0.0:
        return
    k = int((total > 0).sum())
    k1 = int((left[best] > 0).sum())
    k2 = int((right[best] > 0).sum())
    delta = np.log2(3.0**k - 2.0) - (k * h_all - k1 * h_left[best] - k2 * h_right[best])
    threshold = (np.log2(n - 1.0) + delta) / n
    if gain <= threshold:
        return
    i = boundaries[best]
    cuts.append(float((sv[i] + sv[i + 1]) / 2.0))
    _mdl_recurse(sv[: i + 1], sy[: i + 1], n_classes, cuts)
    _mdl_recurse(sv[i + 1 :], sy[i + 1 :], n_classes, cuts)


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.maximum(totals, 1), 0.0)
        logs = np.where(p > 0, np.log2(p, where=p > 0), 0.0)
    return -(p * logs).sum(axis=1)
