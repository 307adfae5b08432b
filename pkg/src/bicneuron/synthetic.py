"""Synthetic datasets with known structure, for tests and demos."""

from __future__ import annotations

import numpy as np

from .dataset import LabeledDataset


def planted_subspace(seed: int, n1: int = 40, n2: int = 60, n_features: int = 12, n_planted: int = 4,
                     row_spread: float = 0.2, col_spread: float = 0.2, eps: float = 0.01,
                     noise_low: float = 0.0, noise_high: float = 1.0):
    """Class 1 is additive-coherent on a few planted columns; everything else is uniform noise.

    Planted cells are ``row_offset + col_offset + e`` with offsets drawn from
    ``U(0, row_spread)`` and ``U(0, col_spread)`` and ``|e| <= eps``. Returns
    ``(dataset, planted_columns)``; class 1 (label "pos") is the minority.
    """
    rng = np.random.default_rng(seed)
    planted = np.sort(rng.choice(n_features, size=n_planted, replace=False))
    X1 = rng.uniform(noise_low, noise_high, size=(n1, n_features))
    alpha = rng.uniform(0, row_spread, size=n1)
    beta = rng.uniform(0, col_spread, size=n_planted)
    X1[:, planted] = alpha[:, None] + beta[None, :] + rng.uniform(-eps, eps, size=(n1, n_planted))
    X2 = rng.uniform(noise_low, noise_high, size=(n2, n_features))
    X = np.vstack([X1, X2])
    labels = ["pos"] * n1 + ["neg"] * n2
    perm = rng.permutation(n1 + n2)
    data = LabeledDataset.from_labels(X[perm], [labels[i] for i in perm])
    return data, tuple(int(j) for j in planted)


def uniform_noise(seed: int, n1: int = 40, n2: int = 60, n_features: int = 12) -> LabeledDataset:
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, size=(n1 + n2, n_features))
    labels = ["pos"] * n1 + ["neg"] * n2
    return LabeledDataset.from_labels(X, labels)


def separable(seed: int, n: int = 50, margin: float = 0.2):
    """2-D points in [-1, 1]^2 on either side of a random line through the origin."""
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi)
    normal = np.array([np.cos(theta), np.sin(theta)])
    pts, ys = [], []
    while len(pts) < n:
        x = rng.uniform(-1, 1, size=2)
        d = x @ normal
        if abs(d) >= margin / 2:
            pts.append(x)
            ys.append(1 if d > 0 else -1)
    ys = np.array(ys)
    if len(set(ys.tolist())) < 2:
        ys[0] = -ys[0]
        pts[0] = -pts[0]
    return np.array(pts), ys
