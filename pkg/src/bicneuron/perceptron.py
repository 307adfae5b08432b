"""Standard (primal, shuffled online) and kernel (dual, mistake-count) perceptrons.

Both use sign(0) = -1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyData

FORMAT_VERSION = 1


def _sign(s):
    return np.where(np.asarray(s) > 0, 1, -1)


def _check_xy(X, y):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=int).ravel()
    if X.shape[0] == 0 or X.size == 0:
        raise EmptyData("cannot train on an empty dataset")
    if len(y) != X.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} instances but {len(y)} labels")
    return X, y


def _check_epochs(epochs):
    if int(epochs) < 1:
        raise ValueError("epochs must be at least 1")


@dataclass(frozen=True)
class Kernel:
    kind: str = "linear"  # "linear" or "rbf"
    sigma: float = 0.1

    def __post_init__(self):
        if self.kind not in ("linear", "rbf"):
            raise ValueError(f"unknown kernel {self.kind!r}")
        if self.kind == "rbf" and not self.sigma > 0:
            raise ValueError("rbf kernel needs sigma > 0")

    def gram(self, A, B) -> np.ndarray:
        A = np.atleast_2d(np.asarray(A, dtype=float))
        B = np.atleast_2d(np.asarray(B, dtype=float))
        if A.shape[1] != B.shape[1]:
            raise DimensionMismatch(f"kernel inputs have {A.shape[1]} and {B.shape[1]} features")
        if self.kind == "linear":
            return A @ B.T
        out = np.empty((A.shape[0], B.shape[0]))
        step = max(1, 2_000_000 // max(1, B.size))
        for s in range(0, A.shape[0], step):
            diff = A[s:s + step, None, :] - B[None, :, :]
            out[s:s + step] = np.exp(-(diff ** 2).sum(axis=2) / (2 * self.sigma ** 2))
        return out


def kernel_eval(kernel: Kernel, a, b) -> float:
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return float(kernel.gram(a[None], b[None])[0, 0])


@dataclass
class StandardPerceptron:
    weights: np.ndarray  # last component multiplies the constant bias input
    lr: float = 0.1
    epochs: int = 20
    seed: int = 0
    n_updates: int = 0

    @property
    def n_features(self) -> int:
        return len(self.weights) - 1

    def score(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"model expects {self.n_features} features, got {X.shape[1]}")
        return X @ self.weights[:-1] + self.weights[-1]

    def predict(self, X) -> np.ndarray:
        return _sign(self.score(X))

    def to_dict(self) -> dict:
        return {"type": "standard", "weights": self.weights.tolist(), "lr": self.lr,
                "epochs": self.epochs, "seed": self.seed}


def sp_train(X, y, lr: float = 0.1, epochs: int = 20, seed: int = 0) -> StandardPerceptron:
    """Online perceptron from zero weights; instances reshuffled every epoch."""
    X, y = _check_xy(X, y)
    _check_epochs(epochs)
    if not lr > 0:
        raise ValueError("learning rate must be positive")
    Xa = np.hstack([X, np.ones((X.shape[0], 1))])
    w = np.zeros(Xa.shape[1])
    rng = np.random.default_rng(seed)
    updates = 0
    for _ in range(epochs):
        for k in rng.permutation(len(y)):
            pred = 1 if Xa[k] @ w > 0 else -1
            if pred != y[k]:
                w = w + lr * y[k] * Xa[k]
                updates += 1
    return StandardPerceptron(w, lr, epochs, seed, updates)


def sp_score(m: StandardPerceptron, x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    return float(m.score(x[None])[0])


def sp_predict(m: StandardPerceptron, x) -> int:
    return 1 if sp_score(m, x) > 0 else -1


@dataclass
class KernelPerceptron:
    alphas: np.ndarray
    X: np.ndarray
    y: np.ndarray
    kernel: Kernel
    epochs: int = 20

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def score(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"model expects {self.n_features} features, got {X.shape[1]}")
        return self.kernel.gram(X, self.X) @ (self.alphas * self.y)

    def predict(self, X) -> np.ndarray:
        return _sign(self.score(X))

    @property
    def n_updates(self) -> int:
        return int(self.alphas.sum())

    def to_dict(self) -> dict:
        return {"type": "kernel", "kernel": self.kernel.kind, "sigma": self.kernel.sigma,
                "alphas": self.alphas.tolist(), "X": self.X.tolist(), "y": self.y.tolist(),
                "epochs": self.epochs}


def kp_train(X, y, kernel: Kernel = Kernel(), epochs: int = 20) -> KernelPerceptron:
    """Dual perceptron visiting instances in dataset order each epoch."""
    X, y = _check_xy(X, y)
    _check_epochs(epochs)
    K = kernel.gram(X, X)
    alphas = np.zeros(len(y), dtype=int)
    for _ in range(epochs):
        for k in range(len(y)):
            s = K[k] @ (alphas * y)
            if (1 if s > 0 else -1) != y[k]:
                alphas[k] += 1
    return KernelPerceptron(alphas, X.copy(), y.copy(), kernel, epochs)


def kp_score(m: KernelPerceptron, x) -> float:
    x = np.asarray(x, dtype=float).ravel()
    return float(m.score(x[None])[0])


def kp_predict(m: KernelPerceptron, x) -> int:
    return 1 if kp_score(m, x) > 0 else -1


def perceptron_to_dict(m) -> dict:
    return {"version": FORMAT_VERSION, **m.to_dict()}


def perceptron_from_dict(d: dict):
    if d.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {d.get('version')!r}")
    if d["type"] == "standard":
        return StandardPerceptron(np.array(d["weights"], dtype=float), d["lr"], d["epochs"], d["seed"])
    if d["type"] == "kernel":
        return KernelPerceptron(np.array(d["alphas"], dtype=int), np.array(d["X"], dtype=float),
                                np.array(d["y"], dtype=int), Kernel(d["kernel"], d["sigma"]), d["epochs"])
    raise ValueError(f"unknown perceptron type {d['type']!r}")
