"""Contrastive pairs: a coherent class-1 bicluster plus the nearest class-2 rows on its columns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .biclustering import Bicluster, _values
from .errors import DimensionMismatch, EmptyData


@dataclass(frozen=True)
class ContrastivePair:
    b1: Bicluster  # rows index the class-1 matrix
    b2: Bicluster  # rows index the class-2 matrix, same columns as b1
    c1: np.ndarray
    c2: np.ndarray
    ratio: float | None  # None marks a degenerate pair that must be discarded

    @property
    def cols(self) -> tuple:
        return self.b1.cols

    @property
    def discarded(self) -> bool:
        return self.ratio is None


def centroid(b: Bicluster, host) -> np.ndarray:
    return _values(host)[np.ix_(b.rows, b.cols)].mean(axis=0)


def subspace_distance(x, c, cols) -> float:
    x = np.asarray(x, dtype=float)
    c = np.asarray(c, dtype=float)
    cols = list(cols)
    if len(c) != len(cols):
        raise DimensionMismatch(f"centroid has {len(c)} components for {len(cols)} columns")
    return float(np.linalg.norm(x[cols] - c))


def msr_ratio(msr1: float, msr2: float) -> float | None:
    if msr2 == 0:
        return None
    return msr1 / msr2


def generate_contrastive(b1: Bicluster, class1, class2) -> ContrastivePair:
    """Attach the ``min(|I|, |R2|)`` class-2 rows closest to the centroid of ``b1``."""
    X2 = _values(class2)
    if X2.size == 0 or X2.shape[0] == 0:
        raise EmptyData("the other class has no rows")
    c1 = centroid(b1, class1)
    cols = list(b1.cols)
    dist = np.linalg.norm(X2[:, cols] - c1, axis=1)
    k = min(len(b1.rows), X2.shape[0])
    # stable sort keeps the lower row index first on distance ties
    nearest = np.argsort(dist, kind="stable")[:k]
    b2 = Bicluster.on(X2, nearest, cols)
    return ContrastivePair(b1, b2, c1, centroid(b2, X2), msr_ratio(b1.msr, b2.msr))


def generate_all(bics, class1, class2) -> list:
    return [generate_contrastive(b, class1, class2) for b in bics]


def filter_pairs(pairs, tau: float) -> list:
    """Pairs with ratio <= tau, ascending by ratio then by class-1 bicluster."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    kept = [p for p in pairs if not p.discarded and p.ratio <= tau]
    return sorted(kept, key=lambda p: (p.ratio, p.b1))


def format_pair(p: ContrastivePair, ids1=None, ids2=None, col_ids=None) -> str:
    def names(idx, ids):
        return ",".join(str(ids[i]) if ids is not None else str(i) for i in idx)

    ratio = "discard" if p.discarded else f"{p.ratio:.6f}"
    return (
        f"rows1={names(p.b1.rows, ids1)} rows2={names(p.b2.rows, ids2)} "
        f"cols={names(p.cols, col_ids)} msr1={p.b1.msr:.6f} msr2={p.b2.msr:.6f} ratio={ratio}"
    )
