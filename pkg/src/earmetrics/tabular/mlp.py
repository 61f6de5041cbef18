"""Feed-forward classifier with exactly three hidden layers and a softmax
output, trained by gradient descent on cross-entropy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, SingleClassDataset
from .base import LabeledDataset, as_matrix
from .logreg import softmax

ACTIVATIONS = ("tanh", "relu")


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    return np.tanh(z) if kind == "tanh" else np.maximum(z, 0.0)


def _act_grad(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return (z > 0).astype(np.float64)


@dataclass
class MlpModel:
    kind = "mlp"

    weights: list[np.ndarray]  # 4 matrices: input->h1->h2->h3->output
    biases: list[np.ndarray]
    activation: str
    class_names: list[str]
    feature_mask: object = None
    norm_stats: object = None

    def __post_init__(self):
        if len(self.weights) != 4 or len(self.biases) != 4:
            raise DataError("an MLP here has exactly 3 hidden layers (4 weight matrices)")
        if self.activation not in ACTIVATIONS:
            raise DataError(f"activation must be one of {ACTIVATIONS}")
        if any(w.shape[1] < 1 for w in self.weights):
            raise DataError("layer widths must be positive")
        for w, b_ in zip(self.weights, self.biases):
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b_))):
                raise DataError("MLP parameters must be finite")

    @property
    def d(self) -> int:
        return self.weights[0].shape[0]

    @property
    def hidden(self) -> tuple[int, int, int]:
        return tuple(w.shape[1] for w in self.weights[:3])

    def forward(self, X):
        """Logits plus the per-layer pre-activations and activations."""
        X = as_matrix(X, self.d)
        zs, hs = [], [X]
        h = X
        for w, b in zip(self.weights[:3], self.biases[:3]):
            z = h @ w + b
            h = _act(z, self.activation)
            zs.append(z)
            hs.append(h)
        logits = h @ self.weights[3] + self.biases[3]
        return logits, zs, hs

    def predict_proba(self, X) -> np.ndarray:
        return softmax(self.forward(X)[0])

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.forward(X)[0], axis=1)

    def config_json(self) -> dict:
        return {"activation": self.activation, "hidden": list(self.hidden)}

    def params_json(self) -> dict:
        return {
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_file_json(cls, obj, preprocessing) -> "MlpModel":
        return cls(
            [np.array(w, dtype=np.float64) for w in obj["params"]["weights"]],
            [np.array(b, dtype=np.float64) for b in obj["params"]["biases"]],
            obj["config"]["activation"],
            list(obj["class_names"]),
            **preprocessing,
        )


def loss_and_grads(model: MlpModel, X: np.ndarray, Y: np.ndarray):
    """Mean cross-entropy and gradients for every weight matrix and bias."""
    logits, zs, hs = model.forward(X)
    n = X.shape[0]
    P = softmax(logits)
    loss = -float(np.mean(np.log(np.clip((P * Y).sum(axis=1), 1e-300, None))))
    delta = (P - Y) / n
    grads_w = [None] * 4
    grads_b = [None] * 4
    grads_w[3] = hs[3].T @ delta
    grads_b[3] = delta.sum(axis=0)
    upstream = delta @ model.weights[3].T
    for layer in (2, 1, 0):
        dz = upstream * _act_grad(zs[layer], model.activation)
        grads_w[layer] = hs[layer].T @ dz
        grads_b[layer] = dz.sum(axis=0)
        if layer > 0:
            upstream = dz @ model.weights[layer].T
    return loss, grads_w, grads_b


def init_mlp(d: int, hidden, n_classes: int, activation: str, seed: int) -> MlpModel:
    hidden = tuple(int(h) for h in hidden)
    if len(hidden) != 3:
        raise DataError(f"exactly 3 hidden layers required, got {len(hidden)}")
    if any(h < 1 for h in hidden):
        raise DataError(f"hidden widths must be >= 1, got {hidden}")
    rng = np.random.default_rng(seed)
    sizes = (d,) + hidden + (n_classes,)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(1.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpModel(weights, biases, activation, [""] * n_classes)


def train_mlp(
    ds: LabeledDataset,
    hidden=(32, 32, 32),
    lr: float = 0.1,
    epochs: int = 500,
    seed: int = 0,
    batch_size: int | None = None,
    activation: str = "tanh",
) -> MlpModel:
    """Gradient descent on softmax cross-entropy; full-batch unless
    ``batch_size`` is given.  Bit-deterministic for a fixed seed."""
    if len(ds.present_classes()) < 2:
        raise SingleClassDataset("MLP training needs at least 2 classes present")
    model = init_mlp(ds.d, hidden, ds.n_classes, activation, seed)
    model.class_names = ds.class_names
    Y = np.zeros((ds.n, ds.n_classes))
    Y[np.arange(ds.n), ds.labels] = 1.0
    rng = np.random.default_rng(seed + 1)
    for _ in range(epochs):
        if batch_size is None:
            batches = [np.arange(ds.n)]
        else:
            order = rng.permutation(ds.n)
            batches = [order[i : i + batch_size] for i in range(0, ds.n, batch_size)]
        for idx in batches:
            _, gw, gb = loss_and_grads(model, ds.features[idx], Y[idx])
            for layer in range(4):
                model.weights[layer] -= lr * gw[layer]
                model.biases[layer] -= lr * gb[layer]
    return model
