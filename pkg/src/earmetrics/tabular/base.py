"""Shared dataset/evaluation plumbing for the classical classifiers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataError, DimensionMismatch
from ..geometry import FeatureMask, NormalizationStats


@dataclass
class LabeledDataset:
    """Feature matrix with integer class labels and per-row subject ids."""

    features: np.ndarray
    labels: np.ndarray
    class_names: list[str]
    subject_ids: list[str] | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"features must be a non-empty (n, d) matrix, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(f"labels shape {y.shape} does not match {X.shape[0]} rows")
        if not np.all(np.isfinite(X)):
            raise DataError("features contain NaN or Inf")
        if y.min() < 0 or y.max() >= len(self.class_names):
            raise DataError("labels must index into class_names")
        if self.subject_ids is not None and len(self.subject_ids) != X.shape[0]:
            raise DataError("subject_ids length does not match rows")
        self.features = X
        self.labels = y

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def present_classes(self) -> np.ndarray:
        return np.unique(self.labels)

    def select(self, indices) -> "LabeledDataset":
        ids = [self.subject_ids[i] for i in indices] if self.subject_ids else None
        return LabeledDataset(self.features[indices], self.labels[indices], self.class_names, ids)


def as_matrix(x, d: int) -> np.ndarray:
    """Coerce a single feature vector or a matrix to (n, d); check dimension."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != d:
        raise DimensionMismatch(f"expected feature dimension {d}, got shape {arr.shape}")
    return arr


def predict(model, x):
    """Predict class ids with any trained model; scalar in, scalar out."""
    arr = np.asarray(x, dtype=np.float64)
    out = model.predict(arr)
    return int(out[0]) if arr.ndim == 1 else out


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    confusion: np.ndarray  # rows: true class, columns: predicted
    per_class_recall: np.ndarray

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "per_class_recall": [None if np.isnan(r) else r for r in self.per_class_recall],
        }


def evaluate(model, ds: LabeledDataset) -> EvalReport:
    """Accuracy and confusion counts of ``model`` on ``ds``."""
    preds = model.predict(ds.features)
    k = ds.n_classes
    confusion = np.zeros((k, k), dtype=np.int64)
    for t, p in zip(ds.labels, preds):
        confusion[t, p] += 1
    accuracy = float(np.trace(confusion)) / ds.n
    row_sums = confusion.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        recall = np.where(row_sums > 0, np.diag(confusion) / row_sums, np.nan)
    return EvalReport(accuracy, confusion, recall)


# ---------------------------------------------------------------------------
# model files

MODEL_FORMAT = "earmetrics-model"
MODEL_VERSION = 1


def _preprocessing_to_json(model) -> dict:
    return {
        "feature_mask": model.feature_mask.to_json() if model.feature_mask else None,
        "norm_stats": model.norm_stats.to_json() if model.norm_stats else None,
    }


def _preprocessing_from_json(obj: dict) -> dict:
    mask = obj.get("feature_mask")
    stats = obj.get("norm_stats")
    return {
        "feature_mask": FeatureMask.from_json(mask) if mask else None,
        "norm_stats": NormalizationStats.from_json(stats) if stats else None,
    }


def preprocess(model, features: np.ndarray) -> np.ndarray:
    """Apply the model's stored normalization and feature mask to raw features."""
    X = np.asarray(features, dtype=np.float64)
    if model.norm_stats is not None:
        X = (X - model.norm_stats.mean) / model.norm_stats.std
    if model.feature_mask is not None:
        X = X[..., model.feature_mask.selected]
    return X


def save_model(model, path):
    from .._io import atomic_write_text

    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "class_names": list(model.class_names),
        "preprocessing": _preprocessing_to_json(model),
        "config": model.config_json(),
        "params": model.params_json(),
    }
    atomic_write_text(path, json.dumps(payload, sort_keys=True) + "\n")


def load_model(path):
    from .forest import ForestModel
    from .logreg import LogRegModel
    from .mlp import MlpModel
    from .svm import SvmModel

    kinds = {m.kind: m for m in (LogRegModel, ForestModel, SvmModel, MlpModel)}
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if obj.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not an earmetrics model file")
    if obj.get("version") != MODEL_VERSION:
        raise DataError(f"{path}: unsupported model version {obj.get('version')}")
    kind = obj.get("kind")
    if kind not in kinds:
        raise DataError(f"{path}: unknown model kind {kind!r}")
    return kinds[kind].from_file_json(obj, _preprocessing_from_json(obj.get("preprocessing") or {}))
