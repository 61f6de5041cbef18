"""Layers of the small convolutional network.

All activations are float64 in NCHW layout.  Each layer caches what its
backward pass needs; ``backward`` returns the gradient w.r.t. its input and
fills ``grads`` for its parameters.  ``lr_mult`` scales this layer's updates
relative to the global learning rate.
"""

from __future__ import annotations

import numpy as np

from ..errors import IncompatibleShapes


class Layer:
    lr_mult: float = 1.0

    def params(self) -> dict[str, np.ndarray]:
        return {}

    def forward(self, x: np.ndarray, train: bool = False, rng=None) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def out_shape(self, in_shape: tuple) -> tuple:
        raise NotImplementedError

    def spec(self) -> dict:
        raise NotImplementedError


def _im2col(x: np.ndarray, kh: int, kw: int, stride: int, pad: int):
    b, c, h, w = x.shape
    if pad:
        x = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (w + 2 * pad - kw) // stride + 1
    windows = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(2, 3))
    windows = windows[:, :, ::stride, ::stride, :, :]  # (b, c, ho, wo, kh, kw)
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(b * ho * wo, c * kh * kw)
    return np.ascontiguousarray(cols), ho, wo


def _col2im(dcols, x_shape, kh, kw, stride, pad, ho, wo):
    b, c, h, w = x_shape
    dx = np.zeros((b, c, h + 2 * pad, w + 2 * pad))
    dwin = dcols.reshape(b, ho, wo, c, kh, kw).transpose(0, 3, 1, 2, 4, 5)
    for i in range(kh):
        for j in range(kw):
            dx[:, :, i : i + ho * stride : stride, j : j + wo * stride : stride] += dwin[
                :, :, :, :, i, j
            ]
    return dx[:, :, pad : pad + h, pad : pad + w] if pad else dx


class Conv(Layer):
    def __init__(self, in_channels, out_channels, kernel=3, stride=1, pad=1):
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.stride = stride
        self.pad = pad
        self.w = np.zeros((out_channels, in_channels * kernel * kernel))
        self.b = np.zeros(out_channels)
        self.grads: dict[str, np.ndarray] = {}
        self._cache = None

    def init_params(self, rng):
        fan_in = self.in_channels * self.kernel * self.kernel
        self.w = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=self.w.shape)
        self.b = np.zeros(self.out_channels)

    def params(self):
        return {"w": self.w, "b": self.b}

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if c != self.in_channels:
            raise IncompatibleShapes(
                f"conv expects {self.in_channels} input channels, got {c}"
            )
        ho = (h + 2 * self.pad - self.kernel) // self.stride + 1
        wo = (w + 2 * self.pad - self.kernel) // self.stride + 1
        if ho < 1 or wo < 1:
            raise IncompatibleShapes(f"conv output collapsed for input {in_shape}")
        return (self.out_channels, ho, wo)

    def forward(self, x, train=False, rng=None):
        cols, ho, wo = _im2col(x, self.kernel, self.kernel, self.stride, self.pad)
        out = cols @ self.w.T + self.b
        self._cache = (cols, x.shape, ho, wo)
        return out.reshape(x.shape[0], ho, wo, self.out_channels).transpose(0, 3, 1, 2)

    def backward(self, dy):
        cols, x_shape, ho, wo = self._cache
        dy2 = dy.transpose(0, 2, 3, 1).reshape(-1, self.out_channels)
        self.grads = {"w": dy2.T @ cols, "b": dy2.sum(axis=0)}
        dcols = dy2 @ self.w
        return _col2im(dcols, x_shape, self.kernel, self.kernel, self.stride, self.pad, ho, wo)

    def spec(self):
        return {
            "type": "conv",
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel": self.kernel,
            "stride": self.stride,
            "pad": self.pad,
            "lr_mult": self.lr_mult,
        }


class ReLU(Layer):
    def __init__(self):
        self._mask = None
        self._last_z = None

    def forward(self, x, train=False, rng=None):
        self._mask = x > 0
        self._last_z = x
        return np.where(self._mask, x, 0.0)

    def backward(self, dy):
        return dy * self._mask

    @property
    def last_preactivation_min(self) -> float:
        """|z| closest to the kink in the last forward (for gradient checks)."""
        if self._last_z is None or self._last_z.size == 0:
            return np.inf
        return float(np.abs(self._last_z).min())

    def out_shape(self, in_shape):
        return in_shape

    def spec(self):
        return {"type": "relu", "lr_mult": self.lr_mult}


class MaxPool(Layer):
    """2x2 max pooling with stride 2; odd trailing rows/columns are dropped."""

    def __init__(self):
        self._cache = None

    def out_shape(self, in_shape):
        c, h, w = in_shape
        if h < 2 or w < 2:
            raise IncompatibleShapes(f"max pool needs at least 2x2 input, got {in_shape}")
        return (c, h // 2, w // 2)

    def forward(self, x, train=False, rng=None):
        b, c, h, w = x.shape
        ho, wo = h // 2, w // 2
        crop = x[:, :, : ho * 2, : wo * 2]
        quads = [crop[:, :, i::2, j::2] for i in (0, 1) for j in (0, 1)]
        out = np.maximum(np.maximum(quads[0], quads[1]), np.maximum(quads[2], quads[3]))
        self._cache = (x.shape, quads, out)
        return out

    def backward(self, dy):
        (b, c, h, w), quads, out = self._cache
        dx = np.zeros((b, c, h, w))
        taken = np.zeros(out.shape, dtype=bool)
        # on ties the first quadrant in scan order receives the gradient
        for quad, (i, j) in zip(quads, ((0, 0), (0, 1), (1, 0), (1, 1))):
            hit = (quad == out) & ~taken
            dx[:, :, i::2, j::2] += np.where(hit, dy, 0.0)
            taken |= hit
        return dx

    def spec(self):
        return {"type": "maxpool", "lr_mult": self.lr_mult}


class Dropout(Layer):
    def __init__(self, p: float):
        if not 0 <= p < 1:
            raise IncompatibleShapes(f"dropout rate must lie in [0, 1), got {p}")
        self.p = p
        self._mask = None

    def forward(self, x, train=False, rng=None):
        if not train or self.p == 0.0:
            self._mask = None
            return x
        if rng is None:
            raise ValueError("training-mode dropout needs an rng")
        self._mask = (rng.random(x.shape) >= self.p) / (1.0 - self.p)
        return x * self._mask

    def backward(self, dy):
        return dy if self._mask is None else dy * self._mask

    def out_shape(self, in_shape):
        return in_shape

    def spec(self):
        return {"type": "dropout", "p": self.p, "lr_mult": self.lr_mult}


class Flatten(Layer):
    def __init__(self):
        self._shape = None

    def forward(self, x, train=False, rng=None):
        self._shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._shape)

    def out_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def spec(self):
        return {"type": "flatten", "lr_mult": self.lr_mult}


class Dense(Layer):
    def __init__(self, in_features, out_features):
        self.in_features = in_features
        self.out_features = out_features
        self.w = np.zeros((in_features, out_features))
        self.b = np.zeros(out_features)
        self.grads: dict[str, np.ndarray] = {}
        self._x = None

    def init_params(self, rng):
        self.w = rng.normal(0.0, np.sqrt(2.0 / self.in_features), size=self.w.shape)
        self.b = np.zeros(self.out_features)

    def params(self):
        return {"w": self.w, "b": self.b}

    def out_shape(self, in_shape):
        if in_shape != (self.in_features,):
            raise IncompatibleShapes(
                f"dense expects input ({self.in_features},), got {in_shape}"
            )
        return (self.out_features,)

    def forward(self, x, train=False, rng=None):
        self._x = x
        return x @ self.w + self.b

    def backward(self, dy):
        self.grads = {"w": self._x.T @ dy, "b": dy.sum(axis=0)}
        return dy @ self.w.T

    def spec(self):
        return {
            "type": "dense",
            "in_features": self.in_features,
            "out_features": self.out_features,
            "lr_mult": self.lr_mult,
        }


class Softmax(Layer):
    """Terminal layer; the cross-entropy loss differentiates through it in
    fused form, so backward just passes the logit gradient along."""

    def forward(self, x, train=False, rng=None):
        z = x - x.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)

    def backward(self, dy):
        return dy

    def out_shape(self, in_shape):
        return in_shape

    def spec(self):
        return {"type": "softmax", "lr_mult": self.lr_mult}


LAYER_TYPES = {
    "conv": Conv,
    "relu": ReLU,
    "maxpool": MaxPool,
    "dropout": Dropout,
    "flatten": Flatten,
    "dense": Dense,
    "softmax": Softmax,
}


def layer_from_spec(spec: dict) -> Layer:
    kind = spec["type"]
    if kind == "conv":
        layer = Conv(spec["in_channels"], spec["out_channels"], spec["kernel"],
                     spec["stride"], spec["pad"])
    elif kind == "dense":
        layer = Dense(spec["in_features"], spec["out_features"])
    elif kind == "dropout":
        layer = Dropout(spec["p"])
    elif kind in LAYER_TYPES:
        layer = LAYER_TYPES[kind]()
    else:
        raise IncompatibleShapes(f"unknown layer type {kind!r}")
    layer.lr_mult = float(spec.get("lr_mult", 1.0))
    return layer
