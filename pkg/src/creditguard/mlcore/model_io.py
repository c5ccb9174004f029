"""Versioned JSON snapshots of trained models.

Format: one JSON object with `format_version`, `kind` (forest /
naive_bayes / tree), the training schema, and the kind-specific payload.
Floats survive the round trip exactly (shortest-repr encoding).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ParseError
from ..ingest import AttributeSpec
from .base import Schema
from .bayes import NBModel
from .forest import ForestModel
from .tree import Node, TreeModel

FORMAT_VERSION = 1


def _schema_to_obj(schema: Schema) -> dict:
    return {
        "attributes": [
            {"name": a.name, "kind": a.kind, "domain": list(a.domain)}
            for a in schema.attributes
        ],
        "class_labels": list(schema.class_labels),
        "class_index": schema.class_index,
    }


def _schema_from_obj(obj: dict) -> Schema:
    attrs = tuple(
        AttributeSpec(a["name"], a["kind"], tuple(a["domain"])) for a in obj["attributes"]
    )
    return Schema(attrs, tuple(obj["class_labels"]), obj["class_index"])


def _node_to_obj(node: Node) -> dict:
    obj: dict = {"counts": node.counts.tolist()}
    if node.attr is not None:
        obj["attr"] = node.attr
        if node.threshold is not None:
            obj["threshold"] = node.threshold
        obj["children"] = [_node_to_obj(c) for c in node.children]
    return obj


def _node_from_obj(obj: dict) -> Node:
    node = Node(counts=np.array(obj["counts"], dtype=np.float64))
    if "attr" in obj:
        node.attr = obj["attr"]
        node.threshold = obj.get("threshold")
        node.children = [_node_from_obj(c) for c in obj["children"]]
    return node


def save_model(model, path) -> None:
    if isinstance(model, ForestModel):
        payload = {
            "trees": [_node_to_obj(t) for t in model.trees],
            "tie_orders": [t.tolist() for t in model.tie_orders],
            "n_trees": model.n_trees,
            "feature_subset_size": model.feature_subset_size,
            "seed": model.seed,
        }
        kind = "forest"
    elif isinstance(model, NBModel):
        payload = {
            "priors": model.priors.tolist(),
            "nominal_log_tables": {
                str(col): table.tolist() for col, table in model.nominal_log_tables.items()
            },
            "gaussians": {
                str(col): [means.tolist(), variances.tolist()]
                for col, (means, variances) in model.gaussians.items()
            },
        }
        kind = "naive_bayes"
    elif isinstance(model, TreeModel):
        payload = {"root": _node_to_obj(model.root), "params": model.params}
        kind = "tree"
    else:
        raise TypeError(f"cannot persist model of type {type(model).__name__}")
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "schema": _schema_to_obj(model.schema),
        "train_time": getattr(model, "train_time", 0.0),
        "payload": payload,
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format_version") != FORMAT_VERSION:
        raise ParseError(f"unsupported model format version {doc.get('format_version')!r}")
    schema = _schema_from_obj(doc["schema"])
    payload = doc["payload"]
    train_time = doc.get("train_time", 0.0)
    kind = doc.get("kind")
    if kind == "forest":
        return ForestModel(
            schema=schema,
            trees=[_node_from_obj(t) for t in payload["trees"]],
            tie_orders=[np.array(t, dtype=np.int64) for t in payload["tie_orders"]],
            n_trees=payload["n_trees"],
            feature_subset_size=payload["feature_subset_size"],
            seed=payload["seed"],
            train_time=train_time,
        )
    if kind == "naive_bayes":
        return NBModel(
            schema=schema,
            priors=np.array(payload["priors"], dtype=np.float64),
            nominal_log_tables={
                int(col): np.array(table, dtype=np.float64)
                for col, table in payload["nominal_log_tables"].items()
            },
            gaussians={
                int(col): (np.array(mv[0], dtype=np.float64), np.array(mv[1], dtype=np.float64))
                for col, mv in payload["gaussians"].items()
            },
            train_time=train_time,
        )
    if kind == "tree":
        return TreeModel(
            schema=schema,
            root=_node_from_obj(payload["root"]),
            train_time=train_time,
            params=payload.get("params", {}),
        )
    raise ParseError(f"unknown model kind {kind!r}")
