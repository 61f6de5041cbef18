"""Soft-margin RBF support vector machines, one-vs-one multiclass.

Each binary machine is trained with a sequential minimal optimization solver
(pairwise analytic updates with an error cache) until every point satisfies
the KKT conditions within tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, NonConvergence, SingleClassDataset
from .base import LabeledDataset, as_matrix

_ALPHA_CUTOFF = 1e-10


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        (A * A).sum(axis=1)[:, None]
        + (B * B).sum(axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    return np.exp(-gamma * np.clip(sq, 0.0, None))


def _smo_solve(K, y, C, tol, rng, max_outer=2000):
    """Solve the binary dual problem; returns (alpha, b).

    y must be in {-1, +1}.  Raises NonConvergence if the KKT violations do
    not clear within the outer-pass cap.
    """
    n = len(y)
    alpha = np.zeros(n)
    b = 0.0
    E = -y.astype(np.float64)  # f(x) = 0 everywhere at the start

    def take_step(i1, i2):
        nonlocal b
        if i1 == i2:
            return False
        a1, a2 = alpha[i1], alpha[i2]
        y1, y2 = y[i1], y[i2]
        E1, E2 = E[i1], E[i2]
        s = y1 * y2
        if s > 0:
            L, H = max(0.0, a1 + a2 - C), min(C, a1 + a2)
        else:
            L, H = max(0.0, a2 - a1), min(C, C + a2 - a1)
        if L >= H:
            return False
        k11, k12, k22 = K[i1, i1], K[i1, i2], K[i2, i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2_new = a2 + y2 * (E1 - E2) / eta
            a2_new = min(max(a2_new, L), H)
        else:
            # degenerate curvature: evaluate the objective at both ends
            f1 = y1 * (E1 + b) - a1 * k11 - s * a2 * k12
            f2 = y2 * (E2 + b) - s * a1 * k12 - a2 * k22
            L1 = a1 + s * (a2 - L)
            H1 = a1 + s * (a2 - H)
            obj_l = L1 * f1 + L * f2 + 0.5 * L1 * L1 * k11 + 0.5 * L * L * k22 + s * L * L1 * k12
            obj_h = H1 * f1 + H * f2 + 0.5 * H1 * H1 * k11 + 0.5 * H * H * k22 + s * H * H1 * k12
            if obj_l < obj_h - 1e-12:
                a2_new = L
            elif obj_h < obj_l - 1e-12:
                a2_new = H
            else:
                return False
        if abs(a2_new - a2) < 1e-10 * (a2_new + a2 + 1e-10):
            return False
        a1_new = a1 + s * (a2 - a2_new)
        d1 = y1 * (a1_new - a1)
        d2 = y2 * (a2_new - a2)
        b1 = b - E1 - d1 * k11 - d2 * k12
        b2 = b - E2 - d1 * k12 - d2 * k22
        if 0.0 < a1_new < C:
            b_new = b1
        elif 0.0 < a2_new < C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)
        E[:] = E + d1 * K[i1] + d2 * K[i2] + (b_new - b)
        alpha[i1], alpha[i2] = a1_new, a2_new
        b = b_new
        return True

    def examine(i2):
        r2 = E[i2] * y[i2]
        if not ((r2 < -tol and alpha[i2] < C) or (r2 > tol and alpha[i2] > 0)):
            return False
        non_bound = np.nonzero((alpha > 0) & (alpha < C))[0]
        if len(non_bound) > 1:
            i1 = int(non_bound[np.argmax(np.abs(E[non_bound] - E[i2]))])
            if take_step(i1, i2):
                return True
        if len(non_bound):
            start = rng.integers(len(non_bound))
            for j in range(len(non_bound)):
                if take_step(int(non_bound[(start + j) % len(non_bound)]), i2):
                    return True
        start = rng.integers(n)
        for j in range(n):
            if take_step(int((start + j) % n), i2):
                return True
        return False

    examine_all = True
    num_changed = 1
    for _ in range(max_outer):
        if num_changed == 0 and not examine_all:
            return alpha, b
        num_changed = 0
        targets = range(n) if examine_all else np.nonzero((alpha > 0) & (alpha < C))[0]
        for i in targets:
            num_changed += examine(int(i))
        if examine_all:
            examine_all = False
        elif num_changed == 0:
            examine_all = True
    raise NonConvergence(
        f"SMO did not satisfy KKT tolerance {tol} within {max_outer} outer passes"
    )


def kkt_max_violation(K, y, alpha, b, C) -> float:
    """Largest KKT violation over all training points (0 when all satisfied)."""
    f = (alpha * y) @ K + b
    margin = y * f
    viol = 0.0
    at_zero = alpha <= _ALPHA_CUTOFF
    at_c = alpha >= C - 1e-9
    between = ~at_zero & ~at_c
    if at_zero.any():
        viol = max(viol, float(np.max(np.maximum(0.0, 1.0 - margin[at_zero]))))
    if at_c.any():
        viol = max(viol, float(np.max(np.maximum(0.0, margin[at_c] - 1.0))))
    if between.any():
        viol = max(viol, float(np.max(np.abs(margin[between] - 1.0))))
    return viol


@dataclass
class BinarySvm:
    """One machine of the one-vs-one ensemble; positive decisions vote for
    ``classes[1]``, non-positive for ``classes[0]``."""

    classes: tuple[int, int]  # (negative label id, positive label id), neg < pos
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i over support vectors
    bias: float
    gamma: float

    def decision(self, X: np.ndarray) -> np.ndarray:
        return rbf_kernel(X, self.support_vectors, self.gamma) @ self.dual_coef + self.bias

    def to_json(self) -> dict:
        return {
            "classes": list(self.classes),
            "support_vectors": self.support_vectors.tolist(),
            "dual_coef": self.dual_coef.tolist(),
            "bias": self.bias,
            "gamma": self.gamma,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "BinarySvm":
        return cls(
            (int(obj["classes"][0]), int(obj["classes"][1])),
            np.array(obj["support_vectors"], dtype=np.float64),
            np.array(obj["dual_coef"], dtype=np.float64),
            float(obj["bias"]),
            float(obj["gamma"]),
        )


@dataclass
class SvmModel:
    kind = "svm"

    machines: list[BinarySvm]
    c: float
    gamma: float
    n_features: int
    class_names: list[str]
    seed: int = 0
    feature_mask: object = None
    norm_stats: object = None

    def predict(self, X) -> np.ndarray:
        X = as_matrix(X, self.n_features)
        k = len(self.class_names)
        votes = np.zeros((X.shape[0], k), dtype=np.int64)
        scores = np.zeros((X.shape[0], k))
        for m in self.machines:
            neg, pos = m.classes
            dec = m.decision(X)
            wins_pos = dec > 0
            votes[wins_pos, pos] += 1
            votes[~wins_pos, neg] += 1
            scores[:, pos] += dec
            scores[:, neg] -= dec
        out = np.empty(X.shape[0], dtype=np.int64)
        for i in range(X.shape[0]):
            tied = np.nonzero(votes[i] == votes[i].max())[0]
            # vote ties: largest summed signed margin, then lowest class id
            out[i] = tied[int(np.argmax(scores[i, tied]))]
        return out

    def config_json(self) -> dict:
        return {"c": self.c, "gamma": self.gamma, "seed": self.seed, "n_features": self.n_features}

    def params_json(self) -> dict:
        return {"machines": [m.to_json() for m in self.machines]}

    @classmethod
    def from_file_json(cls, obj, preprocessing) -> "SvmModel":
        return cls(
            [BinarySvm.from_json(m) for m in obj["params"]["machines"]],
            float(obj["config"]["c"]),
            float(obj["config"]["gamma"]),
            int(obj["config"]["n_features"]),
            list(obj["class_names"]),
            seed=int(obj["config"]["seed"]),
            **preprocessing,
        )


def train_svm(
    ds: LabeledDataset,
    c: float = 250.0,
    gamma: float | None = None,
    seed: int = 0,
    tol: float = 1e-3,
    max_outer: int = 2000,
) -> SvmModel:
    """Train one binary RBF machine per unordered class pair.

    Defaults follow the geometric-feature protocol: penalty C=250 and
    gamma = 1 / number of features actually fed to the classifier.  Each
    machine is solved to KKT tolerance ``tol``; hitting the pass cap raises
    NonConvergence rather than returning a silently unsolved machine.
    """
    if c <= 0:
        raise DataError("penalty c must be > 0")
    present = ds.present_classes()
    if len(present) < 2:
        raise SingleClassDataset("SVM needs at least 2 classes present")
    gamma = 1.0 / ds.d if gamma is None else float(gamma)
    if gamma <= 0:
        raise DataError("gamma must be > 0")
    pairs = [(int(a), int(b)) for i, a in enumerate(present) for b in present[i + 1 :]]
    machines = []
    seeds = np.random.SeedSequence(seed).spawn(len(pairs))
    for (a, b), child in zip(pairs, seeds):
        subset = np.nonzero((ds.labels == a) | (ds.labels == b))[0]
        X = ds.features[subset]
        y = np.where(ds.labels[subset] == b, 1.0, -1.0)
        K = rbf_kernel(X, X, gamma)
        alpha, bias = _smo_solve(K, y, c, tol, np.random.default_rng(child), max_outer)
        sv = alpha > _ALPHA_CUTOFF
        machines.append(BinarySvm((a, b), X[sv], alpha[sv] * y[sv], float(bias), gamma))
    return SvmModel(machines, c, gamma, ds.d, ds.class_names, seed=seed)
