"""Bagged ensemble of information-gain trees with random feature subsets."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..ingest import Dataset
from .base import Schema, encode_dataset
from .tree import Node, _Grower, traverse


@dataclass
class ForestModel:
    """Ensemble predictions are vote fractions: P(c) = votes(c) / n_trees."""

    schema: Schema
    trees: list[Node]
    tie_orders: list[np.ndarray]  # per-tree class priority for leaf-vote ties
    n_trees: int
    feature_subset_size: int
    seed: int
    train_time: float = 0.0
    params: dict = field(default_factory=dict)

    def predict_proba(self, row) -> dict[str, float]:
        x = self.schema.encode_instance(row)
        votes = np.zeros(len(self.schema.class_labels))
        for root, tie_order in zip(self.trees, self.tie_orders):
            votes[_vote(traverse(root, x), tie_order)] += 1.0
        dist = votes / len(self.trees)
        return {label: float(p) for label, p in zip(self.schema.class_labels, dist)}

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        votes = np.zeros((len(X), len(self.schema.class_labels)))
        for root, tie_order in zip(self.trees, self.tie_orders):
            for i in range(len(X)):
                votes[i, _vote(traverse(root, X[i]), tie_order)] += 1.0
        return votes / len(self.trees)


def _vote(leaf: Node, tie_order: np.ndarray) -> int:
    # first class in the tree's tie order among those with maximal count
    counts = leaf.counts[tie_order]
    return int(tie_order[int(np.argmax(counts))])


def default_subset_size(n_attributes: int) -> int:
    return int(math.floor(math.log2(max(n_attributes, 2)))) + 1


def train_random_forest(
    train: Dataset,
    n_trees: int = 100,
    feature_subset_size: int | None = None,
    seed: int = 0,
) -> ForestModel:
    """Train a forest of unpruned trees on bootstrap samples.

    Each tree gets its own generator spawned from the master seed, so the
    model is identical no matter how the per-tree work is scheduled. At
    every node a fresh random subset of attributes is considered and
    equal-gain splits are settled by the tree's stream; a subset size
    larger than the attribute count is clamped, not an error.
    """
    if len(train.rows) == 0:
        raise ValueError("training set is empty")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    t0 = time.perf_counter()
    enc = encode_dataset(train)
    m = enc.X.shape[1]
    subset = feature_subset_size if feature_subset_size is not None else default_subset_size(m)
    if subset < 1:
        raise ValueError("feature_subset_size must be >= 1")
    subset = min(subset, m)
    n = len(enc.y)
    trees: list[Node] = []
    tie_orders: list[np.ndarray] = []
    for child_seed in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child_seed)
        tie_orders.append(rng.permutation(enc.n_classes))
        bootstrap = rng.integers(0, n, size=n)
        trees.append(_Grower(enc, subset_size=subset, rng=rng).grow(bootstrap))
    return ForestModel(
        schema=enc.schema(),
        trees=trees,
        tie_orders=tie_orders,
        n_trees=n_trees,
        feature_subset_size=subset,
        seed=seed,
        train_time=time.perf_counter() - t0,
        params={"n_trees": n_trees, "feature_subset_size": subset, "seed": seed},
    )
