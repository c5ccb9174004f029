"""Shared dataset encoding and entropy helpers for the classifiers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import SchemaMismatchError
from ..ingest import AttributeSpec, Dataset


def entropy_bits(counts) -> float:
    """Shannon entropy in bits of a vector of non-negative counts."""
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class Schema:
    """The attribute layout a model was trained on."""

    attributes: tuple[AttributeSpec, ...]  # non-class attributes
    class_labels: tuple[str, ...]
    class_index: int

    def encode_instance(self, row) -> np.ndarray:
        """Encode one instance; accepts rows with or without the class value."""
        m = len(self.attributes)
        row = list(row)
        if len(row) == m + 1 and 0 <= self.class_index <= m:
            del row[self.class_index]
        if len(row) != m:
            raise SchemaMismatchError(f"expected {m} attribute values, got {len(row)}")
        out = np.empty(m, dtype=np.float64)
        for j, (spec, value) in enumerate(zip(self.attributes, row)):
            if spec.is_nominal:
                try:
                    out[j] = spec.domain.index(value)
                except ValueError:
                    raise SchemaMismatchError(
                        f"value {value!r} not in domain of attribute {spec.name!r}"
                    ) from None
            else:
                try:
                    out[j] = float(value)
                except (TypeError, ValueError):
                    raise SchemaMismatchError(
                        f"non-numeric value {value!r} for attribute {spec.name!r}"
                    ) from None
        return out


@dataclass
class EncodedDataset:
    """Numeric view of a Dataset: nominal values as integer codes.

    Columns follow the original attribute order with the class column
    removed; `X` stores nominal codes and numeric values side by side in
    one float64 matrix.
    """

    attributes: list[AttributeSpec]  # non-class attributes, original order
    class_labels: tuple[str, ...]
    X: np.ndarray  # (n, m) float64
    y: np.ndarray  # (n,) int64 class codes
    nominal: np.ndarray  # (m,) bool
    n_values: np.ndarray  # (m,) domain size for nominal columns, 0 otherwise
    class_index: int = -1  # position of the class column in the original schema

    @property
    def n_classes(self) -> int:
        return len(self.class_labels)

    def schema(self) -> Schema:
        return Schema(tuple(self.attributes), tuple(self.class_labels), self.class_index)

    def encode_instance(self, row) -> np.ndarray:
        return self.schema().encode_instance(row)


def encode_dataset(dataset: Dataset) -> EncodedDataset:
    """Encode a Dataset for the classifiers; the class column is split off."""
    c = dataset.class_attribute
    attrs = [a for i, a in enumerate(dataset.attributes) if i != c]
    labels = dataset.class_labels
    label_code = {label: k for k, label in enumerate(labels)}
    n, m = len(dataset.rows), len(attrs)
    X = np.empty((n, m), dtype=np.float64)
    y = np.empty(n, dtype=np.int64)
    value_code = [
        {v: float(k) for k, v in enumerate(a.domain)} if a.is_nominal else None for a in attrs
    ]
    for i, row in enumerate(dataset.rows):
        values = list(row[:c]) + list(row[c + 1 :])
        for j in range(m):
            codes = value_code[j]
            X[i, j] = codes[values[j]] if codes is not None else float(values[j])
        y[i] = label_code[row[c]]
    return EncodedDataset(
        attributes=attrs,
        class_labels=labels,
        X=X,
        y=y,
        nominal=np.array([a.is_nominal for a in attrs]),
        n_values=np.array([len(a.domain) for a in attrs]),
        class_index=c,
    )


def split_dataset(dataset: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Deterministic shuffled partition into (train, test).

    The train size is round(train_fraction * n), so it differs from the
    exact fraction by less than one row; the same seed always yields the
    same partition.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be strictly between 0 and 1")
    n = len(dataset.rows)
    if n == 0:
        raise ValueError("cannot split an empty dataset")
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(round(train_fraction * n))
    train_idx = sorted(order[:n_train].tolist())
    test_idx = sorted(order[n_train:].tolist())
    train = dataset.replace_rows([dataset.rows[i] for i in train_idx])
    test = dataset.replace_rows([dataset.rows[i] for i in test_idx])
    return train, test
