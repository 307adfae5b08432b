"""Metrics, stratified folds, exact Wilcoxon signed-rank test and nested grid calibration."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import (
    AllConfigurationsFailed,
    ClassSmallerThanK,
    EmptyData,
    ExactRegimeExceeded,
    FitError,
    LengthMismatch,
)

EXACT_MAX_N = 25
SIGNIFICANCE = 0.01


def derive_seed(master: int, *keys: int) -> int:
    """Deterministic per-job seed from a master seed and integer keys."""
    ss = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1)[0])


@dataclass(frozen=True)
class MetricReport:
    acc: float
    acc_minor: float
    acc_major: float
    auc: float
    tp: int
    tn: int
    fp: int
    fn: int
    missing_class: bool = False

    def as_dict(self) -> dict:
        return {"acc": self.acc, "acc_minor": self.acc_minor, "acc_major": self.acc_major, "auc": self.auc}


def metrics(y_true, y_pred, minority: int) -> MetricReport:
    """ACC, per-class accuracies and the hard-label AUC ``(TPR + TNR) / 2``.

    The minority class is the positive one. A class absent from ``y_true``
    gets accuracy 1.0 and sets ``missing_class``.
    """
    y_true = np.asarray(y_true).ravel()
    y_pred = np.asarray(y_pred).ravel()
    if len(y_true) != len(y_pred):
        raise LengthMismatch(f"{len(y_true)} true labels vs {len(y_pred)} predictions")
    if len(y_true) == 0:
        raise EmptyData("no predictions to score")
    pos_t, pos_p = y_true == minority, y_pred == minority
    tp = int(np.sum(pos_t & pos_p))
    fn = int(np.sum(pos_t & ~pos_p))
    tn = int(np.sum(~pos_t & ~pos_p))
    fp = int(np.sum(~pos_t & pos_p))
    missing = (tp + fn == 0) or (tn + fp == 0)
    if missing:
        warnings.warn("a class is absent from y_true; its accuracy is reported as 1.0", stacklevel=2)
    acc_minor = tp / (tp + fn) if tp + fn else 1.0
    acc_major = tn / (tn + fp) if tn + fp else 1.0
    return MetricReport(
        acc=(tp + tn) / len(y_true),
        acc_minor=acc_minor,
        acc_major=acc_major,
        auc=(acc_minor + acc_major) / 2,
        tp=tp, tn=tn, fp=fp, fn=fn,
        missing_class=missing,
    )


def score_auc(y_true, scores, positive: int) -> float:
    """Threshold-free ROC area from raw decision values (diagnostics only)."""
    y_true = np.asarray(y_true).ravel()
    scores = np.asarray(scores, dtype=float).ravel()
    pos, neg = scores[y_true == positive], scores[y_true != positive]
    if len(pos) == 0 or len(neg) == 0:
        return float("nan")
    greater = (pos[:, None] > neg[None, :]).sum()
    ties = (pos[:, None] == neg[None, :]).sum()
    return float((greater + 0.5 * ties) / (len(pos) * len(neg)))


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int

    def test_index(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_index(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def split(self, fold: int):
        return self.train_index(fold), self.test_index(fold)


def stratified_folds(labels, k: int, seed: int) -> FoldPlan:
    """Shuffle each class and deal its members round-robin into ``k`` folds.

    Dealing continues where the previous class stopped, so total fold
    sizes also differ by at most one.
    """
    labels = np.asarray(labels).ravel()
    if k < 2:
        raise ValueError("k must be at least 2")
    rng = np.random.default_rng(seed)
    out = np.full(len(labels), -1)
    offset = 0
    for lab in sorted(set(labels.tolist())):
        members = np.flatnonzero(labels == lab)
        if len(members) < k:
            raise ClassSmallerThanK(lab, len(members), k)
        members = rng.permutation(members)
        out[members] = (offset + np.arange(len(members))) % k
        offset = (offset + len(members)) % k
    out.setflags(write=False)
    return FoldPlan(k, out, seed)


def _doubled_ranks(absdiff: np.ndarray) -> np.ndarray:
    """Twice the mid-ranks, as integers."""
    order = np.argsort(absdiff, kind="stable")
    ranks2 = np.empty(len(absdiff), dtype=np.int64)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and absdiff[order[j + 1]] == absdiff[order[i]]:
            j += 1
        ranks2[order[i:j + 1]] = (i + 1) + (j + 1)  # 2 * mean of ranks i+1..j+1
        i = j + 1
    return ranks2


def wilcoxon_exact(a, b) -> float:
    """Two-sided exact Wilcoxon signed-rank p-value for paired samples.

    Zero differences are dropped and tied magnitudes get mid-ranks.
    Differences are rounded to 12 decimals so that metric values which
    are equal in decimal also tie in floating point. The null distribution
    of the positive rank sum is counted exactly over all sign assignments.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if len(a) != len(b):
        raise LengthMismatch(f"paired samples of lengths {len(a)} and {len(b)}")
    if len(a) > EXACT_MAX_N:
        raise ExactRegimeExceeded(f"n={len(a)} exceeds the exact regime (n <= {EXACT_MAX_N})")
    d = np.round(a - b, 12)
    d = d[d != 0]
    m = len(d)
    if m == 0:
        return 1.0
    r2 = _doubled_ranks(np.abs(d))
    w_plus = int(r2[d > 0].sum())
    total = int(r2.sum())
    w = min(w_plus, total - w_plus)
    counts = [0] * (total + 1)
    counts[0] = 1
    for r in r2.tolist():
        for t in range(total, r - 1, -1):
            counts[t] += counts[t - r]
    extreme = sum(c for t, c in enumerate(counts) if min(t, total - t) <= w)
    return min(1.0, extreme / 2 ** m)


@dataclass(frozen=True)
class GridSpec:
    t_d: tuple = (0.5, 0.8, 1.0, 1.5)
    tau: tuple = (0.1, 0.3, 0.5, 0.7, 0.9)
    t_m: float = 0.02

    def __post_init__(self):
        if not self.t_d or not self.tau:
            raise ValueError("grid lists must be non-empty")
        if min(self.t_d) <= 0 or min(self.tau) <= 0 or self.t_m <= 0:
            raise ValueError("grid values must be positive")

    def points(self) -> list:
        return list(product(self.t_d, self.tau))


@dataclass(frozen=True)
class Calibration:
    t_d: float
    tau: float
    score: float
    scores: dict = field(compare=False)  # (t_d, tau) -> mean validation AUC


def grid_calibrate(train, grid: GridSpec, inner_k: int, seed: int, learner) -> Calibration:
    """Pick (t_d, tau) by mean validation AUC of inner stratified CV on ``train`` only.

    ``learner(data, t_d, tau, seed)`` returns a fitted model with
    ``predict(values)`` or raises ``FitError``; the seed depends only on the
    inner fold, so grid points differ only through (t_d, tau). A failed inner fold scores
    0.5, the AUC of the majority-vote fallback; a grid point failing on
    every fold scores -inf. Ties prefer smaller t_d, then smaller tau.
    """
    if inner_k < 2:
        raise ValueError("inner_k must be at least 2")
    plan = stratified_folds(train.labels, inner_k, derive_seed(seed, 0))
    folds = [plan.split(f) for f in range(inner_k)]
    subsets = [(train.subset(tr), train.subset(te)) for tr, te in folds]
    scores = {}
    for t_d, tau in grid.points():
        aucs, ok = [], False
        for f, (fit_part, val_part) in enumerate(subsets):
            try:
                model = learner(fit_part, t_d, tau, derive_seed(seed, 1, f))
            except FitError:
                aucs.append(0.5)
                continue
            ok = True
            pred = model.predict(val_part.values)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                aucs.append(metrics(val_part.labels, pred, train.class1_label).auc)
        scores[(t_d, tau)] = float(np.mean(aucs)) if ok else -math.inf
    best = min(scores, key=lambda p: (-scores[p], p[0], p[1]))
    if scores[best] == -math.inf:
        raise AllConfigurationsFailed("no grid point produced a model on any inner fold")
    return Calibration(best[0], best[1], scores[best], scores)
