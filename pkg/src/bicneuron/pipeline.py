"""BicNeuron fit/predict plus the full-space baselines it is compared against."""

from __future__ import annotations

import hashlib
import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .biclustering import Bicluster, BiclusteringParams, build_dendrogram, mine_biclusters
from .contrastive import ContrastivePair, filter_pairs, generate_all
from .dataset import DataMatrix, LabeledDataset, MinMaxParams, split_by_class
from .errors import DimensionMismatch, NoCoherentBiclusters, NoDiscriminativeSubspace
from .evaluation import derive_seed, metrics
from .perceptron import Kernel, kp_train, perceptron_from_dict, perceptron_to_dict, sp_train

FORMAT_VERSION = 1
LEARNERS = ("standard", "kernel-linear", "kernel-rbf")


@dataclass(frozen=True)
class BicNeuronConfig:
    t_d: float = 0.5
    t_m: float = 0.02
    tau: float = 0.9
    min_rows: int = 2
    min_cols: int = 2
    learner: str = "standard"
    epochs: int = 20
    lr: float = 0.1
    sigma: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError("tau must be positive")
        if self.learner not in LEARNERS:
            raise ValueError(f"learner must be one of {LEARNERS}")
        if self.epochs < 1 or not self.lr > 0 or not self.sigma > 0:
            raise ValueError("epochs, lr and sigma must be positive")

    @property
    def params(self) -> BiclusteringParams:
        return BiclusteringParams(self.t_d, self.t_m, self.min_rows, self.min_cols)


def train_perceptron(X, y, learner: str, epochs: int, lr: float, sigma: float, seed: int):
    if learner == "standard":
        return sp_train(X, y, lr=lr, epochs=epochs, seed=seed)
    kernel = Kernel("linear") if learner == "kernel-linear" else Kernel("rbf", sigma)
    return kp_train(X, y, kernel, epochs=epochs)


def candidate_auc(model, cols, X_norm, roles) -> float:
    """Hard-label AUC of ``model`` on every training row projected onto ``cols``.

    ``roles`` holds +1 for the bicluster class and -1 otherwise; +1 is positive.
    """
    pred = model.predict(np.asarray(X_norm)[:, list(cols)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return metrics(roles, pred, 1).auc


@dataclass
class BicNeuronModel:
    columns: tuple
    perceptron: object
    train_auc: float
    norm: MinMaxParams
    class1_label: int
    label_names: dict
    col_ids: tuple = ()
    feature_names: tuple = ()  # every training column, in order
    n_pairs: int = 0
    candidates: list = field(default_factory=list)  # (columns, auc) for every trained candidate

    @property
    def n_features(self) -> int:
        return len(self.norm.col_min)

    def predict(self, X) -> np.ndarray:
        """Internal label codes (+1/-1) for raw, unnormalized rows."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(f"model expects {self.n_features} features, got {X.shape[1]}")
        roles = self.perceptron.predict(self.norm.apply(X)[:, list(self.columns)])
        return np.where(roles == 1, self.class1_label, -self.class1_label)

    def predict_labels(self, X) -> list:
        return [self.label_names[int(c)] for c in self.predict(X)]

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "model": "bicneuron",
            "columns": list(self.columns),
            "col_ids": list(self.col_ids),
            "feature_names": list(self.feature_names),
            "perceptron": perceptron_to_dict(self.perceptron),
            "train_auc": self.train_auc,
            "normalization": self.norm.to_dict(),
            "class1_label": self.class1_label,
            "label_names": {str(k): v for k, v in self.label_names.items()},
            "n_pairs": self.n_pairs,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BicNeuronModel":
        if d.get("version") != FORMAT_VERSION or d.get("model") != "bicneuron":
            raise ValueError("not a version-1 BicNeuron model record")
        return cls(
            columns=tuple(d["columns"]),
            perceptron=perceptron_from_dict(d["perceptron"]),
            train_auc=d["train_auc"],
            norm=MinMaxParams.from_dict(d["normalization"]),
            class1_label=d["class1_label"],
            label_names={int(k): v for k, v in d["label_names"].items()},
            col_ids=tuple(d.get("col_ids", ())),
            feature_names=tuple(d.get("feature_names", ())),
            n_pairs=d.get("n_pairs", 0),
        )

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "BicNeuronModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Steps:
    """Intermediate results of steps 1-4."""

    norm: MinMaxParams
    X_norm: np.ndarray
    rows1: np.ndarray
    rows2: np.ndarray
    biclusters: list
    pairs: list  # every generated pair, unfiltered
    selected: list  # pairs surviving the ratio filter, best first


def contrastive_steps(train: LabeledDataset, cfg: BicNeuronConfig, biclusters=None) -> Steps:
    """Normalize, split, mine (or take the injected biclusters), pair and filter.

    Injected biclusters index rows of the class-1 matrix, in original row order.
    """
    norm = MinMaxParams.fit(train.values)
    X_norm = norm.apply(train.values)
    split = split_by_class(train.with_matrix(DataMatrix(X_norm, train.matrix.row_ids, train.matrix.col_ids)))
    X1, X2 = split.class1.values, split.class2.values
    if biclusters is None:
        bics = mine_biclusters(X1, cfg.params)
    else:
        bics = sorted(Bicluster.on(X1, b.rows, b.cols) for b in biclusters)
    if not bics:
        raise NoCoherentBiclusters("no coherent bicluster in the class-1 data")
    pairs = generate_all(bics, X1, X2)
    return Steps(norm, X_norm, split.rows1, split.rows2, bics, pairs, filter_pairs(pairs, cfg.tau))


def _subspace_data(steps: Steps, pair: ContrastivePair):
    cols = list(pair.cols)
    rows = np.concatenate([steps.rows1[list(pair.b1.rows)], steps.rows2[list(pair.b2.rows)]])
    y = np.concatenate([np.ones(len(pair.b1.rows), dtype=int), -np.ones(len(pair.b2.rows), dtype=int)])
    return steps.X_norm[np.ix_(rows, cols)], y


def fit(train: LabeledDataset, cfg: BicNeuronConfig = BicNeuronConfig(), biclusters=None,
        _trained=None) -> BicNeuronModel:
    """Run all six steps and return the candidate with the best whole-training-set AUC.

    ``biclusters`` replaces mining with precomputed class-1 biclusters.
    AUC ties go to the candidate with fewer columns, then the lexicographically
    smaller column set, then the lower ratio rank.
    """
    steps = contrastive_steps(train, cfg, biclusters)
    if not steps.selected:
        raise NoDiscriminativeSubspace(f"no contrastive pair has MSR ratio <= {cfg.tau}")
    roles = np.where(train.labels == train.class1_label, 1, -1)
    trained = []
    for k, pair in enumerate(steps.selected):
        # candidate k is the same pair for every tau, so its training can be shared
        key = (k, pair.b1, pair.b2, cfg.seed)
        if _trained is not None and key in _trained:
            p, auc = _trained[key]
        else:
            X, y = _subspace_data(steps, pair)
            p = train_perceptron(X, y, cfg.learner, cfg.epochs, cfg.lr, cfg.sigma, derive_seed(cfg.seed, k))
            auc = candidate_auc(p, pair.cols, steps.X_norm, roles)
            if _trained is not None:
                _trained[key] = (p, auc)
        trained.append((pair.cols, p, auc, k))
    best = min(trained, key=lambda t: (-t[2], len(t[0]), t[0], t[3]))
    return BicNeuronModel(
        columns=best[0],
        perceptron=best[1],
        train_auc=best[2],
        norm=steps.norm,
        class1_label=train.class1_label,
        label_names=dict(train.label_names),
        col_ids=tuple(train.matrix.col_ids[j] for j in best[0]),
        feature_names=tuple(train.matrix.col_ids),
        n_pairs=len(steps.selected),
        candidates=[(t[0], t[2]) for t in trained],
    )


def _fingerprint(data: LabeledDataset) -> str:
    h = hashlib.sha1(np.ascontiguousarray(data.values).tobytes())
    h.update(np.ascontiguousarray(data.labels).tobytes())
    return h.hexdigest()


class BicNeuronLearner:
    """Callable for grid calibration.

    Results are identical to calling ``fit`` directly; dendrograms are
    shared across t_d, mined biclusters and trained candidates across tau.
    """

    def __init__(self, base: BicNeuronConfig = BicNeuronConfig()):
        self.base = base
        self._dendrograms = {}
        self._mined = {}
        self._trained = {}

    def __call__(self, data: LabeledDataset, t_d: float, tau: float, seed: int) -> BicNeuronModel:
        cfg = replace(self.base, t_d=t_d, tau=tau, seed=seed)
        fp = _fingerprint(data)
        key = (fp, t_d)
        if key not in self._mined:
            X1 = MinMaxParams.fit(data.values).apply(data.values)[data.labels == data.class1_label]
            if fp not in self._dendrograms:
                self._dendrograms[fp] = [build_dendrogram(X1[:, j]) for j in range(X1.shape[1])]
            self._mined[key] = mine_biclusters(X1, cfg.params, self._dendrograms[fp])
        return fit(data, cfg, biclusters=self._mined[key], _trained=self._trained.setdefault(key, {}))


@dataclass
class BaselineModel:
    """A perceptron trained on all normalized features, or a majority vote."""

    kind: str  # "sp", "kp-linear", "kp-rbf" or "majority"
    norm: MinMaxParams
    class1_label: int
    perceptron: object = None
    majority: int = -1

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.norm.col_min):
            raise DimensionMismatch(f"model expects {len(self.norm.col_min)} features, got {X.shape[1]}")
        if self.perceptron is None:
            return np.full(X.shape[0], self.majority)
        roles = self.perceptron.predict(self.norm.apply(X))
        return np.where(roles == 1, self.class1_label, -self.class1_label)


BASELINE_LEARNERS = {"sp": "standard", "kp-linear": "kernel-linear", "kp-rbf": "kernel-rbf"}


def majority_label(train: LabeledDataset) -> int:
    n1 = int(np.sum(train.labels == train.class1_label))
    return train.class1_label if n1 > train.n - n1 else -train.class1_label


def fit_baseline(train: LabeledDataset, kind: str, epochs=20, lr=0.1, sigma=0.1, seed=0) -> BaselineModel:
    norm = MinMaxParams.fit(train.values)
    if kind == "majority":
        return BaselineModel(kind, norm, train.class1_label, majority=majority_label(train))
    roles = np.where(train.labels == train.class1_label, 1, -1)
    p = train_perceptron(norm.apply(train.values), roles, BASELINE_LEARNERS[kind], epochs, lr, sigma, seed)
    return BaselineModel(kind, norm, train.class1_label, perceptron=p)
