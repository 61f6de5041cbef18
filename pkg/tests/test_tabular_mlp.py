import numpy as np
import pytest

from earmetrics.errors import DataError, SingleClassDataset
from earmetrics.tabular import LabeledDataset, train_mlp
from earmetrics.tabular.mlp import init_mlp, loss_and_grads

from test_tabular_logreg import separable_blobs


def fd_loss(model, X, Y):
    """Forward-only loss recomputation used by the finite-difference oracle."""
    h = X
    for w, b in zip(model.weights[:3], model.biases[:3]):
        z = h @ w + b
        h = np.tanh(z) if model.activation == "tanh" else np.maximum(z, 0)
    logits = h @ model.weights[3] + model.biases[3]
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_p = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    return -float(np.mean((log_p * Y).sum(axis=1)))


def max_relative_fd_error(model, X, Y, eps=1e-5):
    _, gw, gb = loss_and_grads(model, X, Y)
    worst = 0.0
    for params, grads in ((model.weights, gw), (model.biases, gb)):
        for arr, grad in zip(params, grads):
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + eps
                hi = fd_loss(model, X, Y)
                arr[idx] = orig - eps
                lo = fd_loss(model, X, Y)
                arr[idx] = orig
                fd = (hi - lo) / (2 * eps)
                worst = max(worst, abs(fd - grad[idx]) / max(abs(fd), abs(grad[idx]), 1e-8))
    return worst


def small_problem(seed=0, n=10, d=4, k=3):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = rng.integers(0, k, size=n)
    Y = np.zeros((n, k))
    Y[np.arange(n), y] = 1.0
    return X, y, Y


def test_gradients_match_finite_differences_at_init():
    X, _, Y = small_problem()
    model = init_mlp(4, (5, 4, 3), 3, "tanh", seed=1)
    assert max_relative_fd_error(model, X, Y) < 1e-5


def test_gradients_match_finite_differences_after_training_steps():
    X, y, Y = small_problem(seed=3)
    ds = LabeledDataset(X, y, ["a", "b", "c"])
    model = train_mlp(ds, hidden=(5, 4, 3), lr=0.2, epochs=10, seed=2)
    assert max_relative_fd_error(model, X, Y) < 1e-5


def test_zero_hidden_width_rejected():
    with pytest.raises(DataError):
        init_mlp(4, (8, 0, 8), 2, "tanh", seed=0)


def test_exactly_three_hidden_layers_required():
    with pytest.raises(DataError):
        init_mlp(4, (8, 8), 2, "tanh", seed=0)
    with pytest.raises(DataError):
        init_mlp(4, (8, 8, 8, 8), 2, "tanh", seed=0)
    model = init_mlp(4, (6, 5, 4), 2, "tanh", seed=0)
    assert model.hidden == (6, 5, 4)
    assert len(model.weights) == 4


def test_blobs_reach_full_accuracy_within_500_epochs():
    ds = separable_blobs(n_per=50, seed=4)
    model = train_mlp(ds, epochs=500, lr=0.1, seed=0)
    assert np.mean(model.predict(ds.features) == ds.labels) == 1.0


def test_single_class_rejected():
    ds = LabeledDataset(np.ones((6, 2)), np.zeros(6, dtype=int), ["a", "b"])
    with pytest.raises(SingleClassDataset):
        train_mlp(ds, epochs=1)


def test_deterministic_per_seed():
    ds = separable_blobs(n_per=20, seed=5)
    a = train_mlp(ds, epochs=50, seed=7)
    b = train_mlp(ds, epochs=50, seed=7)
    for wa, wb in zip(a.weights, b.weights):
        assert np.array_equal(wa, wb)
    c = train_mlp(ds, epochs=50, seed=8)
    assert not np.array_equal(a.weights[0], c.weights[0])


def test_minibatch_training_works():
    ds = separable_blobs(n_per=40, seed=6)
    model = train_mlp(ds, epochs=200, lr=0.05, seed=1, batch_size=16)
    assert np.mean(model.predict(ds.features) == ds.labels) == 1.0


def test_relu_activation_supported():
    ds = separable_blobs(n_per=30, seed=7)
    model = train_mlp(ds, epochs=300, lr=0.05, seed=2, activation="relu")
    assert np.mean(model.predict(ds.features) == ds.labels) == 1.0
    with pytest.raises(DataError):
        init_mlp(2, (4, 4, 4), 2, "sigmoid", seed=0)
