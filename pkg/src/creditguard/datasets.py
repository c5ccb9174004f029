"""Locate or synthesize the credit summary dataset.

The real Statlog German credit file (`german.data`, 1000 accounts, 20
attributes, class 700 good / 300 bad) is preferred whenever it is
available: point GERMAN_CREDIT_DATA at it or drop it into the repo's
`data/` directory.

When the real file is absent, `surrogate_german_credit` builds a
deterministic stand-in in the same file format. Every qualitative
attribute is allocated so its (value x class) joint counts equal the
published contingency tables of the real dataset, so any statistic that
is a function of those counts (class priors, per-attribute information
gain, naive-Bayes frequency tables) is identical to the real file's by
construction. Numeric attributes are drawn from per-class distributions
calibrated to the published class-conditional summary statistics.
Attributes are allocated independently within each class, which is the
one respect in which the surrogate is weaker than the real data: it
carries no cross-attribute correlation beyond the class.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .ingest import Dataset, GERMAN_CREDIT_ATTRIBUTES, parse_german_credit

ENV_VAR = "GERMAN_CREDIT_DATA"
SURROGATE_SEED = 20
SURROGATE_FILENAME = "german_credit_surrogate.data"

# (value -> (good count, bad count)) for each qualitative attribute of the
# public dataset; each table sums to 700 good / 300 bad.
NOMINAL_CLASS_COUNTS: dict[str, dict[str, tuple[int, int]]] = {
    "status of existing checking account": {
        "A11": (139, 135), "A12": (164, 105), "A13": (49, 14), "A14": (348, 46),
    },
    "credit history": {
        "A30": (15, 25), "A31": (21, 28), "A32": (361, 169), "A33": (60, 28), "A34": (243, 50),
    },
    "purpose": {
        "A40": (145, 89), "A41": (86, 17), "A42": (123, 58), "A43": (218, 62),
        "A44": (8, 4), "A45": (14, 8), "A46": (28, 22), "A48": (8, 1),
        "A49": (63, 34), "A410": (7, 5),
    },
    "savings account and bonds": {
        "A61": (386, 217), "A62": (69, 34), "A63": (52, 11), "A64": (42, 6), "A65": (151, 32),
    },
    "present employment since": {
        "A71": (39, 23), "A72": (102, 70), "A73": (235, 104), "A74": (135, 39), "A75": (189, 64),
    },
    "personal status and sex": {
        "A91": (30, 20), "A92": (201, 109), "A93": (402, 146), "A94": (67, 25),
    },
    "other debtors or guarantors": {
        "A101": (635, 272), "A102": (23, 18), "A103": (42, 10),
    },
    "property": {
        "A121": (222, 60), "A122": (161, 71), "A123": (230, 102), "A124": (87, 67),
    },
    "other installment plans": {
        "A141": (82, 57), "A142": (28, 19), "A143": (590, 224),
    },
    "housing": {
        "A151": (109, 70), "A152": (527, 186), "A153": (64, 44),
    },
    "job": {
        "A171": (15, 7), "A172": (144, 56), "A173": (444, 186), "A174": (97, 51),
    },
    "telephone": {
        "A191": (409, 187), "A192": (291, 113),
    },
    "foreign worker": {
        "A201": (667, 296), "A202": (33, 4),
    },
}

# small-support integer attributes: exact per-class counts over their values
INTEGER_CLASS_COUNTS: dict[str, dict[int, tuple[int, int]]] = {
    "installment rate in percentage of disposable income": {
        1: (102, 34), 2: (169, 62), 3: (112, 45), 4: (317, 159),
    },
    "present residence since": {
        1: (91, 39), 2: (216, 92), 3: (104, 45), 4: (289, 124),
    },
    "number of existing credits at this bank": {
        1: (443, 190), 2: (233, 100), 3: (20, 8), 4: (4, 2),
    },
    "number of people being liable to provide maintenance for": {
        1: (591, 254), 2: (109, 46),
    },
}

# class-conditional (mean, std, low, high) for the wide-range numerics
CONTINUOUS_CLASS_STATS: dict[str, dict[str, tuple[float, float, int, int]]] = {
    "duration in month": {
        "good": (19.21, 11.08, 4, 72), "bad": (24.86, 13.28, 4, 72),
    },
    "credit amount": {
        "good": (2985.46, 2401.47, 250, 18424), "bad": (3938.13, 3535.82, 250, 18424),
    },
    "age in years": {
        "good": (36.22, 11.38, 19, 75), "bad": (33.96, 11.22, 19, 75),
    },
}

CLASS_COUNTS = {"good": 700, "bad": 300}


def _allocate_exact(counts: dict, n: int, rng: np.random.Generator) -> list:
    values = []
    for value, count in counts.items():
        values.extend([value] * count)
    assert len(values) == n
    rng.shuffle(values)
    return values


def _draw_lognormal(mean: float, std: float, low: int, high: int, n: int,
                    rng: np.random.Generator) -> list[float]:
    sigma2 = np.log1p((std / mean) ** 2)
    mu = np.log(mean) - sigma2 / 2.0
    draws = rng.lognormal(mu, np.sqrt(sigma2), size=n)
    return [float(v) for v in np.clip(np.rint(draws), low, high)]


def surrogate_german_credit(seed: int = SURROGATE_SEED) -> Dataset:
    """Build the deterministic surrogate dataset (1000 rows, 700/300)."""
    attrs = GERMAN_CREDIT_ATTRIBUTES
    columns: dict[str, dict[str, list]] = {}
    rng = np.random.default_rng(seed)
    for spec in attrs[:-1]:
        per_class = {}
        for label, n in CLASS_COUNTS.items():
            cls = 0 if label == "good" else 1
            if spec.name in NOMINAL_CLASS_COUNTS:
                counts = {v: gb[cls] for v, gb in NOMINAL_CLASS_COUNTS[spec.name].items()}
                per_class[label] = _allocate_exact(counts, n, rng)
            elif spec.name in INTEGER_CLASS_COUNTS:
                counts = {float(v): gb[cls] for v, gb in INTEGER_CLASS_COUNTS[spec.name].items()}
                per_class[label] = _allocate_exact(counts, n, rng)
            else:
                mean, std, low, high = CONTINUOUS_CLASS_STATS[spec.name][label]
                per_class[label] = _draw_lognormal(mean, std, low, high, n, rng)
        columns[spec.name] = per_class
    rows = []
    for label, n in CLASS_COUNTS.items():
        for i in range(n):
            rows.append(tuple(columns[spec.name][label][i] for spec in attrs[:-1]) + (label,))
    order = rng.permutation(len(rows))
    rows = [rows[i] for i in order]
    return Dataset("german_credit_surrogate", list(attrs), rows)


def dump_german_credit(dataset: Dataset) -> str:
    """Serialize a Dataset with the credit summary schema back to file format."""
    digit = {"good": "1", "bad": "2"}
    lines = []
    for row in dataset.rows:
        fields = []
        for spec, value in zip(dataset.attributes, row):
            if spec.name == "class":
                fields.append(digit[value])
            elif spec.is_nominal:
                fields.append(value)
            else:
                fields.append(str(int(value)))
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def _repo_data_dir() -> Path:
    return Path(__file__).resolve().parents[2] / "data"


def locate_german_credit(path: str | os.PathLike | None = None) -> tuple[Path | None, str]:
    """Resolve the dataset source: explicit path, env var, data/, or surrogate.

    Returns (path, source) where source is "real" or "surrogate"; path is
    None when the surrogate must be generated in memory.
    """
    if path is not None:
        return Path(path), "real"
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env), "real"
    data_dir = _repo_data_dir()
    real = data_dir / "german.data"
    if real.exists():
        return real, "real"
    surrogate = data_dir / SURROGATE_FILENAME
    if surrogate.exists():
        return surrogate, "surrogate"
    return None, "surrogate"


def load_german_credit(path: str | os.PathLike | None = None) -> tuple[Dataset, str]:
    """Load the credit summary dataset, preferring the real file.

    Returns (dataset, source) with source "real" or "surrogate".
    """
    resolved, source = locate_german_credit(path)
    if resolved is None:
        return surrogate_german_credit(), "surrogate"
    with open(resolved, "rb") as fh:
        return parse_german_credit(fh), source
