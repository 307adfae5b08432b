"""Cross-validated comparison of BicNeuron variants against full-space perceptrons."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations

import numpy as np

from .dataset import LabeledDataset
from .errors import FitError
from .evaluation import SIGNIFICANCE, GridSpec, derive_seed, grid_calibrate, metrics, stratified_folds, wilcoxon_exact
from .pipeline import BASELINE_LEARNERS, BicNeuronConfig, BicNeuronLearner, fit_baseline

log = logging.getLogger(__name__)

BN_LEARNERS = {"bn": "standard", "bn-linear": "kernel-linear", "bn-rbf": "kernel-rbf"}
MODELS = tuple(BASELINE_LEARNERS) + tuple(BN_LEARNERS) + ("majority",)
METRICS = ("acc", "acc_minor", "acc_major", "auc")


@dataclass(frozen=True)
class ExperimentConfig:
    k: int = 10
    seed: int = 0
    grid: GridSpec = field(default_factory=GridSpec)
    inner_k: int = 3
    epochs: int = 20
    lr: float = 0.1
    sigma: float = 0.1
    models: tuple = ("sp", "kp-linear", "bn")
    jobs: int = 1

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be at least 2")
        if not self.models:
            raise ValueError("model roster is empty")
        unknown = [m for m in self.models if m not in MODELS]
        if unknown:
            raise ValueError(f"unknown models {unknown}; choose from {MODELS}")


@dataclass(frozen=True)
class FoldResult:
    dataset: str
    model: str
    fold: int
    acc: float
    acc_minor: float
    acc_major: float
    auc: float
    fallback: bool = False
    t_d: float | None = None
    tau: float | None = None


def _fit_model(train: LabeledDataset, name: str, cfg: ExperimentConfig, seed: int):
    """Returns (model, fallback, t_d, tau)."""
    if name not in BN_LEARNERS:
        return fit_baseline(train, name, cfg.epochs, cfg.lr, cfg.sigma, seed), False, None, None
    base = BicNeuronConfig(t_m=cfg.grid.t_m, learner=BN_LEARNERS[name], epochs=cfg.epochs, lr=cfg.lr, sigma=cfg.sigma)
    learner = BicNeuronLearner(base)
    try:
        cal = grid_calibrate(train, cfg.grid, cfg.inner_k, derive_seed(seed, 0), learner)
        model = learner(train, cal.t_d, cal.tau, derive_seed(seed, 1))
        return model, False, cal.t_d, cal.tau
    except FitError as e:
        log.warning("%s: falling back to majority vote (%s)", name, e)
        return fit_baseline(train, "majority"), True, None, None


def run_fold(data: LabeledDataset, dataset: str, name: str, fold: int, cfg: ExperimentConfig) -> FoldResult:
    plan = stratified_folds(data.labels, cfg.k, cfg.seed)
    tr, te = plan.split(fold)
    train, test = data.subset(tr), data.subset(te)
    seed = derive_seed(cfg.seed, fold, MODELS.index(name))
    model, fallback, t_d, tau = _fit_model(train, name, cfg, seed)
    rep = metrics(test.labels, model.predict(test.values), data.class1_label)
    return FoldResult(dataset, name, fold, rep.acc, rep.acc_minor, rep.acc_major, rep.auc, fallback, t_d, tau)


def _run_job(args):
    return run_fold(*args)


def evaluate(data: LabeledDataset, cfg: ExperimentConfig, dataset: str = "data") -> list:
    """Per-fold results for every model in the roster, ordered by (model, fold)."""
    stratified_folds(data.labels, cfg.k, cfg.seed)  # fail fast on tiny classes
    jobs = [(data, dataset, name, fold, cfg) for name in cfg.models for fold in range(cfg.k)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    order = {m: i for i, m in enumerate(cfg.models)}
    return sorted(results, key=lambda r: (r.dataset, order[r.model], r.fold))


def aggregate(results) -> list:
    """Mean, sample standard deviation and best value per (dataset, model, metric)."""
    rows = []
    groups = {}
    for r in results:
        groups.setdefault((r.dataset, r.model), []).append(r)
    for (dataset, model), rs in groups.items():
        for metric in METRICS:
            v = np.array([getattr(r, metric) for r in rs])
            std = float(v.std(ddof=1)) if len(v) > 1 else 0.0
            rows.append({"dataset": dataset, "model": model, "metric": metric, "mean": float(v.mean()),
                         "std": std, "best": float(v.max()), "fallback_folds": sum(r.fallback for r in rs)})
    return rows


def compare(results, metrics_=("acc", "auc"), alpha: float = SIGNIFICANCE) -> list:
    """Pairwise exact Wilcoxon tests over paired per-fold values."""
    by_model = {}
    for r in results:
        by_model.setdefault((r.dataset, r.model), {})[r.fold] = r
    datasets = sorted({d for d, _ in by_model})
    rows = []
    for dataset in datasets:
        models = [m for d, m in by_model if d == dataset]
        for a, b in combinations(models, 2):
            folds = sorted(set(by_model[dataset, a]) & set(by_model[dataset, b]))
            for metric in metrics_:
                va = [getattr(by_model[dataset, a][f], metric) for f in folds]
                vb = [getattr(by_model[dataset, b][f], metric) for f in folds]
                p = wilcoxon_exact(va, vb)
                diff = float(np.mean(va) - np.mean(vb))
                rows.append({"dataset": dataset, "model_a": a, "model_b": b, "metric": metric,
                             "mean_a": float(np.mean(va)), "mean_b": float(np.mean(vb)), "p": p,
                             "significant": p <= alpha,
                             "better": (a if diff > 0 else b if diff < 0 else "") if p <= alpha else ""})
    return rows


def _fmt(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if v is None:
        return ""
    return str(v)


def to_csv(rows) -> str:
    rows = [asdict(r) if not isinstance(r, dict) else r for r in rows]
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(rows[0].keys())
    for r in rows:
        w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def to_jsonl(rows) -> str:
    rows = [asdict(r) if not isinstance(r, dict) else r for r in rows]
    return "".join(json.dumps(r, sort_keys=False) + "\n" for r in rows)


def read_results_csv(path) -> list:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            out.append(FoldResult(
                r["dataset"], r["model"], int(r["fold"]),
                *(float(r[m]) for m in METRICS),
                fallback=r["fallback"] == "True",
                t_d=float(r["t_d"]) if r.get("t_d") else None,
                tau=float(r["tau"]) if r.get("tau") else None,
            ))
    return out


def with_models(cfg: ExperimentConfig, models) -> ExperimentConfig:
    return replace(cfg, models=tuple(models))
