"""Network assembly, SGD training, gradient checking and head replacement."""

from __future__ import annotations

import copy
import io
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError, IncompatibleShapes, ShapeMismatch
from .layers import Conv, Dense, Dropout, Flatten, Layer, MaxPool, ReLU, Softmax, layer_from_spec

# preset architectures: conv channel progression under 3x3/pool blocks
ARCH_PRESETS = {
    "earnet-s": (16, 32, 64),
    "earnet-xs": (4, 8, 16),
}


@dataclass
class SgdConfig:
    """Plain SGD schedule; the final classifier layer trains at
    ``global_lr * last_layer_multiplier``."""

    global_lr: float = 0.0001
    epochs: int = 1
    batch_size: int = 32
    seed: int = 0
    last_layer_multiplier: float = 10.0

    def __post_init__(self):
        # zero is admitted so a no-op update step is expressible in tests
        if self.global_lr < 0:
            raise DataError("global_lr must be >= 0")
        if self.last_layer_multiplier < 1:
            raise DataError("last_layer_multiplier must be >= 1")
        if self.epochs < 0 or self.batch_size < 1:
            raise DataError("epochs must be >= 0 and batch_size >= 1")


class CnnModel:
    """An ordered layer stack ending in Dense -> Softmax."""

    def __init__(self, layers: list[Layer], input_shape: tuple[int, int, int]):
        if len(layers) < 2 or not isinstance(layers[-1], Softmax) or not isinstance(layers[-2], Dense):
            raise IncompatibleShapes("model must end with Dense -> Softmax")
        if sum(isinstance(l, Softmax) for l in layers) != 1:
            raise IncompatibleShapes("model must contain exactly one Softmax")
        self.layers = layers
        self.input_shape = tuple(input_shape)
        shape = self.input_shape
        for layer in layers[:-1]:
            shape = layer.out_shape(shape)

    @property
    def num_classes(self) -> int:
        return self.layers[-2].out_features

    @property
    def head(self) -> Dense:
        return self.layers[-2]

    def forward(self, x: np.ndarray, train: bool = False, rng=None) -> np.ndarray:
        if x.ndim != 4 or x.shape[1:] != self.input_shape:
            raise ShapeMismatch(
                f"expected batch of shape (n, {', '.join(map(str, self.input_shape))}), got {x.shape}"
            )
        out = x
        for layer in self.layers:
            out = layer.forward(out, train=train, rng=rng)
        return out

    def loss_and_backward(self, x, labels, train=True, rng=None) -> float:
        """Mean cross-entropy; leaves per-layer gradients in place."""
        probs = self.forward(x, train=train, rng=rng)
        n = x.shape[0]
        if labels.shape != (n,):
            raise ShapeMismatch(f"labels shape {labels.shape} does not match batch {n}")
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise ShapeMismatch("label id outside the model's class range")
        picked = probs[np.arange(n), labels]
        loss = -float(np.mean(np.log(np.clip(picked, 1e-300, None))))
        dlogits = probs.copy()
        dlogits[np.arange(n), labels] -= 1.0
        dlogits /= n
        grad = dlogits
        for layer in reversed(self.layers[:-1]):  # softmax is fused with the loss
            grad = layer.backward(grad)
        return loss

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.forward(x, train=False), axis=1)

    def parameters(self):
        for i, layer in enumerate(self.layers):
            for name, arr in layer.params().items():
                yield i, name, arr

    def n_params(self) -> int:
        return sum(arr.size for _, _, arr in self.parameters())

    def relu_kink_margin(self) -> float:
        """Smallest |pre-activation| seen by any ReLU in the last forward."""
        margins = [l.last_preactivation_min for l in self.layers if isinstance(l, ReLU)]
        return min(margins) if margins else np.inf

    def clone(self) -> "CnnModel":
        return copy.deepcopy(self)

    def specs(self) -> list[dict]:
        return [layer.spec() for layer in self.layers]


def sgd_step(model: CnnModel, cfg: SgdConfig):
    """Apply one update from the gradients left by ``loss_and_backward``."""
    for layer in model.layers:
        for name, arr in layer.params().items():
            arr -= cfg.global_lr * layer.lr_mult * layer.grads[name]


def train_step(model: CnnModel, batch, cfg: SgdConfig, rng=None) -> float:
    """One SGD step on one batch; returns the pre-update loss.

    ``rng`` feeds dropout masks; omit it to derive one from ``cfg.seed``
    (a training loop should pass its own stream).
    """
    x, labels = batch
    if x.shape[0] == 0:
        raise ShapeMismatch("empty batch")
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    loss = model.loss_and_backward(x, np.asarray(labels), train=True, rng=rng)
    sgd_step(model, cfg)
    return loss


def init_model(
    arch="earnet-s",
    num_classes: int = 2,
    seed: int = 0,
    input_shape: tuple[int, int, int] = (1, 64, 64),
    head_lr_multiplier: float = 1.0,
) -> CnnModel:
    """Build and He-initialize a model.

    ``arch`` is a preset name (conv3x3/ReLU/pool blocks with the preset's
    channel progression, then Flatten -> Dense(num_classes) -> Softmax) or an
    explicit list of layer spec dicts.
    """
    if num_classes < 2:
        raise DataError("num_classes must be >= 2")
    rng = np.random.default_rng(seed)
    if isinstance(arch, str):
        if arch not in ARCH_PRESETS:
            raise DataError(f"unknown architecture preset {arch!r}")
        layers: list[Layer] = []
        channels = input_shape[0]
        for out_channels in ARCH_PRESETS[arch]:
            layers += [Conv(channels, out_channels, kernel=3, stride=1, pad=1), ReLU(), MaxPool()]
            channels = out_channels
        layers.append(Flatten())
        shape = input_shape
        for layer in layers:
            shape = layer.out_shape(shape)
        layers += [Dense(shape[0], num_classes), Softmax()]
    else:
        layers = [layer_from_spec(spec) for spec in arch]
    model = CnnModel(layers, input_shape)
    for layer in model.layers:
        if hasattr(layer, "init_params"):
            layer.init_params(rng)
    model.head.lr_mult = float(head_lr_multiplier)
    return model


def replace_head(model: CnnModel, new_num_classes: int, seed: int,
                 lr_multiplier: float = 10.0) -> CnnModel:
    """Swap the final Dense layer for a freshly initialized one.

    Every other parameter is preserved bit-exactly; the new head trains at
    ``lr_multiplier`` times the global learning rate.
    """
    if new_num_classes < 2:
        raise DataError("new_num_classes must be >= 2")
    out = model.clone()
    old = out.head
    head = Dense(old.in_features, new_num_classes)
    head.init_params(np.random.default_rng(seed))
    head.lr_mult = float(lr_multiplier)
    out.layers[-2] = head
    return out


def train(
    model: CnnModel,
    x: np.ndarray,
    labels: np.ndarray,
    cfg: SgdConfig,
    epochs: int | None = None,
    stage: str = "train",
    log: list | None = None,
) -> list[float]:
    """Epoch loop with seed-determined shuffling; returns per-epoch mean loss.

    ``log`` collects (step, stage, loss, lr) rows for the training CSV.
    """
    epochs = cfg.epochs if epochs is None else epochs
    rng = np.random.default_rng(cfg.seed)
    labels = np.asarray(labels)
    history = []
    step = 0
    for _ in range(epochs):
        order = rng.permutation(x.shape[0])
        losses = []
        for start in range(0, x.shape[0], cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss = train_step(model, (x[idx], labels[idx]), cfg, rng=rng)
            losses.append(loss)
            if log is not None:
                log.append((step, stage, loss, cfg.global_lr))
            step += 1
        history.append(float(np.mean(losses)))
    return history


def accuracy(model: CnnModel, x: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(model.predict(x) == np.asarray(labels)))


def gradient_check(
    model: CnnModel,
    x: np.ndarray,
    labels: np.ndarray,
    eps: float = 1e-5,
    max_params_per_layer: int = 400,
    seed: int = 0,
) -> float:
    """Max relative error between backprop and central finite differences.

    Runs with dropout off.  Inputs sitting closer than 1e-6 to a ReLU kink
    are jittered away first (the two-sided difference straddles the kink and
    would report a false mismatch).  Large parameter arrays are subsampled
    (seed-fixed) down to ``max_params_per_layer`` entries.
    """
    rng = np.random.default_rng(seed)
    x = np.array(x, dtype=np.float64)
    for _ in range(50):
        model.forward(x, train=False)
        if model.relu_kink_margin() > 1e-6:
            break
        x = x + rng.normal(0.0, 1e-4, size=x.shape)

    def loss_only():
        probs = model.forward(x, train=False)
        picked = probs[np.arange(x.shape[0]), labels]
        return -float(np.mean(np.log(np.clip(picked, 1e-300, None))))

    model.loss_and_backward(x, labels, train=False)
    analytic = {
        (i, name): layer.grads[name].copy()
        for i, layer in enumerate(model.layers)
        for name in layer.params()
    }
    worst = 0.0
    for i, name, arr in model.parameters():
        flat = arr.reshape(-1)
        grad_flat = analytic[(i, name)].reshape(-1)
        if flat.size > max_params_per_layer:
            indices = rng.choice(flat.size, size=max_params_per_layer, replace=False)
        else:
            indices = np.arange(flat.size)
        for j in indices:
            orig = flat[j]
            flat[j] = orig + eps
            hi = loss_only()
            flat[j] = orig - eps
            lo = loss_only()
            flat[j] = orig
            fd = (hi - lo) / (2 * eps)
            err = abs(fd - grad_flat[j]) / max(abs(fd), abs(grad_flat[j]), 1e-8)
            worst = max(worst, err)
    return worst


# ---------------------------------------------------------------------------
# checkpoints

CHECKPOINT_VERSION = 1


def save_checkpoint(model: CnnModel, path, cfg: SgdConfig | None = None):
    import os
    import tempfile

    meta = {
        "version": CHECKPOINT_VERSION,
        "input_shape": list(model.input_shape),
        "layers": model.specs(),
        "cfg": None if cfg is None else vars(cfg),
    }
    arrays = {f"layer{i}_{name}": arr for i, name, arr in model.parameters()}
    path = str(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path) or ".", suffix=".npz.tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, __meta__=np.frombuffer(json.dumps(meta).encode(), dtype=np.uint8), **arrays)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path) -> CnnModel:
    with np.load(path) as data:
        meta = json.loads(bytes(data["__meta__"]).decode())
        if meta.get("version") != CHECKPOINT_VERSION:
            raise DataError(f"{path}: unsupported checkpoint version")
        layers = [layer_from_spec(spec) for spec in meta["layers"]]
        model = CnnModel(layers, tuple(meta["input_shape"]))
        for i, layer in enumerate(model.layers):
            for name in layer.params():
                setattr(layer, name, np.array(data[f"layer{i}_{name}"], dtype=np.float64))
    return model
