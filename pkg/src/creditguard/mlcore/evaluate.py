"""Holdout evaluation, the offline risk table, and the prediction report."""

from __future__ import annotations

import datetime as dt
import io
import time
from dataclasses import dataclass

import numpy as np

from ..ingest import Dataset


@dataclass(frozen=True)
class Metrics:
    cci_pct: float  # correctly classified instances, percent
    ici_pct: float
    avg_tp_rate: float  # class-support-weighted averages
    avg_fp_rate: float
    precision: float
    recall: float
    train_time: float
    test_time: float


@dataclass
class OfflineRiskRecord:
    account_id: str
    r_offline: float  # percent in [0, 100]
    source: str  # "model" | "feedback" | "manual"
    updated_at: dt.datetime


def _encode_test(model, test: Dataset) -> tuple[np.ndarray, np.ndarray]:
    schema = model.schema
    label_code = {label: k for k, label in enumerate(schema.class_labels)}
    X = np.vstack([schema.encode_instance(row) for row in test.rows])
    y = np.array([label_code[row[test.class_attribute]] for row in test.rows])
    return X, y


def evaluate(model, test: Dataset) -> Metrics:
    """Score a trained model on a test split.

    TP rate, FP rate, precision and recall are computed per class and
    averaged weighted by class support; a class the model never predicts
    contributes precision 0.
    """
    if len(test.rows) == 0:
        raise ValueError("test set is empty")
    X, y = _encode_test(model, test)
    t0 = time.perf_counter()
    probs = model.predict_proba_batch(X)
    test_time = time.perf_counter() - t0
    pred = np.argmax(probs, axis=1)  # distribution ties go to the first label
    n = len(y)
    n_classes = len(model.schema.class_labels)
    cci = 100.0 * float((pred == y).sum()) / n
    tp_rate = np.zeros(n_classes)
    fp_rate = np.zeros(n_classes)
    precision = np.zeros(n_classes)
    support = np.zeros(n_classes)
    for c in range(n_classes):
        actual = y == c
        predicted = pred == c
        support[c] = actual.sum()
        tp = float((actual & predicted).sum())
        fp = float((~actual & predicted).sum())
        fn = float((actual & ~predicted).sum())
        tn = float((~actual & ~predicted).sum())
        tp_rate[c] = tp / (tp + fn) if tp + fn > 0 else 0.0
        fp_rate[c] = fp / (fp + tn) if fp + tn > 0 else 0.0
        precision[c] = tp / (tp + fp) if tp + fp > 0 else 0.0
    weights = support / n
    return Metrics(
        cci_pct=cci,
        ici_pct=100.0 - cci,
        avg_tp_rate=float((weights * tp_rate).sum()),
        avg_fp_rate=float((weights * fp_rate).sum()),
        precision=float((weights * precision).sum()),
        recall=float((weights * tp_rate).sum()),
        train_time=getattr(model, "train_time", 0.0),
        test_time=test_time,
    )


def offline_risk_table(
    model,
    accounts: Dataset,
    bad_label: str = "bad",
    now: dt.datetime | None = None,
) -> list[OfflineRiskRecord]:
    """Per-account offline risk: P(bad) * 100, full precision.

    Account ids are the 1-based row positions of the accounts table.
    """
    if bad_label not in model.schema.class_labels:
        raise ValueError(f"model has no class label {bad_label!r}")
    stamp = now or dt.datetime.now(dt.timezone.utc)
    records = []
    for i, row in enumerate(accounts.rows, start=1):
        p_bad = model.predict_proba(row)[bad_label]
        records.append(OfflineRiskRecord(str(i), p_bad * 100.0, "model", stamp))
    return records


def prediction_report(model, test: Dataset) -> str:
    """CSV of per-account class probabilities against the actual labels."""
    labels = model.schema.class_labels
    out = io.StringIO()
    out.write("account_id,p_good,p_bad,predicted,actual\n")
    for i, row in enumerate(test.rows, start=1):
        probs = model.predict_proba(row)
        predicted = max(labels, key=lambda lbl: (probs[lbl], -labels.index(lbl)))
        actual = row[test.class_attribute]
        out.write(
            f"{i},{probs.get('good', 0.0):.6f},{probs.get('bad', 0.0):.6f},{predicted},{actual}\n"
        )
    return out.getvalue()
