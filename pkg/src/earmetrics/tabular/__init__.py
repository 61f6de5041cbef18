"""Classical classifiers over geometric feature vectors, built from scratch."""

from .base import (
    EvalReport,
    LabeledDataset,
    evaluate,
    load_model,
    predict,
    preprocess,
    save_model,
)
from .forest import ForestModel, feature_importances, train_forest
from .logreg import LogRegModel, train_logreg
from .mlp import MlpModel, train_mlp
from .svm import BinarySvm, SvmModel, kkt_max_violation, rbf_kernel, train_svm

__all__ = [
    "BinarySvm",
    "EvalReport",
    "ForestModel",
    "LabeledDataset",
    "LogRegModel",
    "MlpModel",
    "SvmModel",
    "evaluate",
    "feature_importances",
    "kkt_max_violation",
    "load_model",
    "predict",
    "preprocess",
    "rbf_kernel",
    "save_model",
    "train_forest",
    "train_logreg",
    "train_mlp",
    "train_svm",
]
