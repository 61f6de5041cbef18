"""Multinomial logistic regression with L2 regularization, trained by
full-batch gradient descent with a backtracking line search."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, SingleClassDataset
from .base import LabeledDataset, as_matrix


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class LogRegModel:
    kind = "logreg"

    weights: np.ndarray  # (k, d)
    biases: np.ndarray  # (k,)
    l2_lambda: float
    class_names: list[str]
    feature_mask: object = None
    norm_stats: object = None
    converged: bool = True

    def __post_init__(self):
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.biases))):
            raise DataError("logistic regression parameters must be finite")

    @property
    def d(self) -> int:
        return self.weights.shape[1]

    def logits(self, X) -> np.ndarray:
        X = as_matrix(X, self.d)
        return X @ self.weights.T + self.biases

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.logits(X))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.logits(X), axis=1)

    def config_json(self) -> dict:
        return {"l2_lambda": self.l2_lambda, "converged": self.converged}

    def params_json(self) -> dict:
        return {"weights": self.weights.tolist(), "biases": self.biases.tolist()}

    @classmethod
    def from_file_json(cls, obj, preprocessing) -> "LogRegModel":
        return cls(
            np.array(obj["params"]["weights"], dtype=np.float64),
            np.array(obj["params"]["biases"], dtype=np.float64),
            float(obj["config"]["l2_lambda"]),
            list(obj["class_names"]),
            converged=bool(obj["config"].get("converged", True)),
            **preprocessing,
        )


def _ce_and_grads(X, Y, W, b):
    """Mean cross-entropy (the smooth part) and its gradients."""
    n = X.shape[0]
    P = softmax(X @ W.T + b)
    # clip avoids log(0) for fully confident mistakes
    ce = -float(np.mean(np.log(np.clip((P * Y).sum(axis=1), 1e-300, None))))
    delta = (P - Y) / n
    return ce, delta.T @ X, delta.sum(axis=0)


def train_logreg(
    ds: LabeledDataset,
    l2_lambda: float = 1.0,
    seed: int = 0,
    max_iter: int = 5000,
    grad_tol: float = 1e-6,
) -> LogRegModel:
    """Minimize mean cross-entropy + (lambda/2)*||W||^2 (biases unpenalized).

    Full-batch descent with a backtracking line search on the cross-entropy
    part; the quadratic penalty is absorbed in closed form each step
    (W <- (W - t*grad)/(1 + t*lambda)), which stays stable for any lambda --
    plain steepest descent stalls once lambda dominates the curvature.

    Deterministic: parameters start at zero, so the path depends only on the
    data and configuration; ``seed`` is accepted for API symmetry.  Stops at
    composite gradient norm < ``grad_tol`` or at the iteration cap (the model
    records which via ``converged``).
    """
    del seed
    if l2_lambda < 0:
        raise DataError("l2_lambda must be >= 0")
    if len(ds.present_classes()) < 2:
        raise SingleClassDataset("logistic regression needs at least 2 classes present")
    X, k, lam = ds.features, ds.n_classes, l2_lambda
    Y = np.zeros((ds.n, k))
    Y[np.arange(ds.n), ds.labels] = 1.0
    W = np.zeros((k, ds.d))
    b = np.zeros(k)
    converged = False
    step = 1.0
    ce, gw_ce, gb = _ce_and_grads(X, Y, W, b)
    for _ in range(max_iter):
        gw = gw_ce + lam * W
        gnorm = np.sqrt((gw * gw).sum() + (gb * gb).sum())
        if gnorm < grad_tol:
            converged = True
            break
        step = min(step * 2.0, 1e6)
        while True:
            W_new = (W - step * gw_ce) / (1.0 + step * lam)
            b_new = b - step * gb
            ce_new, gw_ce_new, gb_new = _ce_and_grads(X, Y, W_new, b_new)
            # backtrack until the quadratic majorization of the smooth part holds
            dw, db = W_new - W, b_new - b
            move_sq = float((dw * dw).sum() + (db * db).sum())
            linear = float((gw_ce * dw).sum() + (gb * db).sum())
            if ce_new <= ce + linear + move_sq / (2.0 * step) + 1e-15:
                break
            step *= 0.5
            if step < 1e-18:
                return LogRegModel(W, b, lam, ds.class_names, converged=False)
        W, b, ce, gw_ce, gb = W_new, b_new, ce_new, gw_ce_new, gb_new
    return LogRegModel(W, b, l2_lambda, ds.class_names, converged=converged)
