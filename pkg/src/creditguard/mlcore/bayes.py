"""Naive Bayes: add-one smoothed frequency tables, per-class Gaussians."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from ..ingest import Dataset
from .base import Schema, encode_dataset

VARIANCE_FLOOR = 1e-9


@dataclass
class NBModel:
    schema: Schema
    priors: np.ndarray  # (n_classes,) relative class frequencies
    nominal_log_tables: dict[int, np.ndarray]  # col -> (n_values, n_classes) log P(v|c)
    gaussians: dict[int, tuple[np.ndarray, np.ndarray]]  # col -> (means, variances)
    train_time: float = 0.0
    params: dict = field(default_factory=dict)

    def predict_proba(self, row) -> dict[str, float]:
        x = self.schema.encode_instance(row)
        dist = self._posterior(x)
        return {label: float(p) for label, p in zip(self.schema.class_labels, dist)}

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        return np.vstack([self._posterior(x) for x in X])

    def _posterior(self, x: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            log_post = np.log(self.priors)
        for col, table in self.nominal_log_tables.items():
            log_post = log_post + table[int(x[col])]
        for col, (means, variances) in self.gaussians.items():
            log_post = log_post - 0.5 * (
                np.log(2.0 * np.pi * variances) + (x[col] - means) ** 2 / variances
            )
        log_post -= log_post.max()
        post = np.exp(log_post)
        return post / post.sum()


def train_naive_bayes(train: Dataset) -> NBModel:
    """Fit class priors plus per-attribute conditional distributions.

    Nominal attributes get add-one smoothed frequency tables; numeric
    attributes get a per-class Gaussian with the variance floored at
    1e-9 (sample variance, zero when a class has a single row).
    """
    if len(train.rows) == 0:
        raise ValueError("training set is empty")
    t0 = time.perf_counter()
    enc = encode_dataset(train)
    n_classes = enc.n_classes
    class_counts = np.bincount(enc.y, minlength=n_classes).astype(np.float64)
    priors = class_counts / class_counts.sum()
    nominal_log_tables: dict[int, np.ndarray] = {}
    gaussians: dict[int, tuple[np.ndarray, np.ndarray]] = {}
    for j in range(enc.X.shape[1]):
        if enc.nominal[j]:
            nv = int(enc.n_values[j])
            codes = enc.X[:, j].astype(np.int64)
            joint = np.bincount(codes * n_classes + enc.y,
                                minlength=nv * n_classes).reshape(nv, n_classes)
            table = (joint + 1.0) / (class_counts + nv)
            nominal_log_tables[j] = np.log(table)
        else:
            means = np.zeros(n_classes)
            variances = np.full(n_classes, VARIANCE_FLOOR)
            for c in range(n_classes):
                values = enc.X[enc.y == c, j]
                if len(values) >= 1:
                    means[c] = values.mean()
                if len(values) >= 2:
                    variances[c] = max(float(values.var(ddof=1)), VARIANCE_FLOOR)
            gaussians[j] = (means, variances)
    return NBModel(
        schema=enc.schema(),
        priors=priors,
        nominal_log_tables=nominal_log_tables,
        gaussians=gaussians,
        train_time=time.perf_counter() - t0,
        params={},
    )
