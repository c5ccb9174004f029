"""Native classifiers and attribute ranking over credit summary datasets."""

from .base import EncodedDataset, encode_dataset, split_dataset
from .ranking import AttributeRanking, info_gain_rank, select_features
from .tree import TreeModel, train_pruned_tree
from .forest import ForestModel, train_random_forest
from .bayes import NBModel, train_naive_bayes
from .evaluate import Metrics, OfflineRiskRecord, evaluate, offline_risk_table, prediction_report
from .model_io import load_model, save_model


def predict_proba(model, instance):
    """Class distribution (label -> probability) for one instance."""
    return model.predict_proba(instance)


__all__ = [
    "predict_proba",
    "AttributeRanking",
    "EncodedDataset",
    "ForestModel",
    "Metrics",
    "NBModel",
    "OfflineRiskRecord",
    "TreeModel",
    "encode_dataset",
    "evaluate",
    "info_gain_rank",
    "load_model",
    "offline_risk_table",
    "prediction_report",
    "save_model",
    "select_features",
    "split_dataset",
    "train_naive_bayes",
    "train_pruned_tree",
    "train_random_forest",
]
