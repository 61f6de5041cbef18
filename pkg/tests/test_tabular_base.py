import numpy as np
import pytest

from earmetrics.errors import DimensionMismatch
from earmetrics.geometry import FeatureMask, NormalizationStats
from earmetrics.tabular import (
    LabeledDataset,
    LogRegModel,
    evaluate,
    load_model,
    predict,
    preprocess,
    save_model,
    train_forest,
    train_logreg,
    train_mlp,
    train_svm,
)

from test_tabular_logreg import separable_blobs


class _FixedPredictor:
    def __init__(self, outputs):
        self.outputs = np.asarray(outputs)

    def predict(self, X):
        return self.outputs[: len(X)]


def test_evaluate_perfect_predictor():
    ds = LabeledDataset(np.ones((6, 2)), np.array([0, 1, 2, 0, 1, 2]), ["a", "b", "c"])
    report = evaluate(_FixedPredictor(ds.labels), ds)
    assert report.accuracy == 1.0
    assert np.array_equal(report.confusion, np.eye(3, dtype=int) * 2)
    assert np.all(report.per_class_recall == 1.0)


def test_evaluate_constant_predictor_on_balanced_binary():
    ds = LabeledDataset(np.ones((10, 2)), np.array([0, 1] * 5), ["a", "b"])
    report = evaluate(_FixedPredictor(np.zeros(10, dtype=int)), ds)
    assert report.accuracy == 0.5
    assert report.confusion.sum() == 10


def test_evaluate_matches_counting_oracle():
    rng = np.random.default_rng(1)
    labels = rng.integers(0, 4, size=100)
    preds = rng.integers(0, 4, size=100)
    ds = LabeledDataset(rng.normal(size=(100, 3)), labels, list("abcd"))
    report = evaluate(_FixedPredictor(preds), ds)
    matches = sum(1 for t, p in zip(labels, preds) if t == p)
    assert report.accuracy == matches / 100
    assert report.confusion.sum() == 100
    assert 0.0 <= report.accuracy <= 1.0


def test_logreg_zero_weights_predicts_largest_bias():
    model = LogRegModel(np.zeros((3, 2)), np.array([0.1, 0.9, 0.3]), 0.0, ["a", "b", "c"])
    assert predict(model, np.array([5.0, -3.0])) == 1


def test_report_json_shape():
    ds = LabeledDataset(np.ones((4, 2)), np.array([0, 0, 1, 1]), ["a", "b"])
    report = evaluate(_FixedPredictor(np.array([0, 1, 1, 1])), ds)
    obj = report.to_json()
    assert set(obj) == {"accuracy", "confusion", "per_class_recall"}
    assert obj["accuracy"] == 0.75


def test_preprocess_applies_stats_then_mask():
    stats = NormalizationStats(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 0.5]), fitted_on=5)
    mask = FeatureMask(np.array([True, False, True]), threshold=0.1)
    model = LogRegModel(np.zeros((2, 2)), np.zeros(2), 0.0, ["a", "b"],
                        feature_mask=mask, norm_stats=stats)
    out = preprocess(model, np.array([[2.0, 2.0, 4.0]]))
    assert np.allclose(out, [[1.0, 2.0]])


@pytest.mark.parametrize("trainer,kwargs", [
    (train_logreg, {"l2_lambda": 0.1}),
    (train_forest, {"n_trees": 12}),
    (train_svm, {}),
    (train_mlp, {"epochs": 60, "lr": 0.1}),
])
def test_model_file_roundtrip(tmp_path, trainer, kwargs):
    ds = separable_blobs(n_per=20, seed=11)
    stats = NormalizationStats(np.zeros(2), np.ones(2), fitted_on=40)
    model = trainer(ds, seed=0, **kwargs)
    model.norm_stats = stats
    model.feature_mask = FeatureMask(np.array([True, True]), threshold=0.0)
    path = tmp_path / "model.json"
    save_model(model, path)
    restored = load_model(path)
    assert type(restored) is type(model)
    assert restored.class_names == ds.class_names
    assert np.array_equal(restored.predict(ds.features), model.predict(ds.features))
    assert np.array_equal(restored.feature_mask.selected, model.feature_mask.selected)
    assert np.array_equal(restored.norm_stats.mean, stats.mean)


def test_predict_dimension_mismatch():
    ds = separable_blobs(n_per=10, seed=12)
    model = train_logreg(ds, l2_lambda=0.1)
    with pytest.raises(DimensionMismatch):
        predict(model, np.ones(5))
