"""Acceptance criteria 1-9.

Each test records a one-line summary; the conftest hook prints a PASS/FAIL
line per criterion at the end of the run.
"""

import itertools
import time
import warnings

import numpy as np
import pytest

from bicneuron.biclustering import Bicluster, BiclusteringParams, mine_biclusters, msr
from bicneuron.cli import main
from bicneuron.contrastive import centroid
from bicneuron.dataset import DataMatrix, MinMaxParams, split_by_class
from bicneuron.errors import NoDiscriminativeSubspace
from bicneuron.evaluation import metrics, wilcoxon_exact
from bicneuron.experiment import ExperimentConfig, compare, evaluate
from bicneuron.perceptron import Kernel, kp_train, sp_train
from bicneuron.pipeline import BicNeuronConfig, contrastive_steps, fit
from bicneuron.synthetic import planted_subspace, separable, uniform_noise

stats = pytest.importorskip("scipy.stats")


@pytest.fixture(autouse=True)
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def within(got, want, tol):
    """Inclusive tolerance check with room for binary rounding of the decimal bound."""
    return abs(got - want) <= tol + 1e-12


# ---------------------------------------------------------------- 1


EXAMPLE_NORM = np.array([
    [0.22, 0.22, 0.00, 0.14], [0.43, 0.48, 0.19, 0.00], [0.65, 0.65, 0.38, 0.65], [1.00, 0.00, 1.00, 1.00],
    [0.00, 0.13, 0.58, 0.88], [0.22, 1.00, 0.77, 0.79], [0.52, 0.57, 0.00, 0.07], [0.87, 0.35, 0.19, 0.58],
    [0.43, 0.43, 0.38, 1.00],
])


@pytest.mark.acceptance(1, "worked example golden pipeline")
def test_worked_example_golden_pipeline(example_raw, record_property):
    start = time.perf_counter()
    X = MinMaxParams.fit(example_raw.values).apply(example_raw.values)
    norm_err = float(np.abs(X - EXAMPLE_NORM).max())
    assert norm_err <= 0.005

    # downstream reference values were computed from the two-decimal table
    shown = example_raw.with_matrix(DataMatrix(np.round(X, 2), example_raw.matrix.row_ids, example_raw.matrix.col_ids))
    np.testing.assert_array_equal(shown.values, EXAMPLE_NORM)
    c1_host = split_by_class(shown).class1
    b1 = Bicluster.on(c1_host.values, [0, 1, 2], [0, 1, 2])
    b2 = Bicluster.on(c1_host.values, [2, 3], [2, 3])
    steps = contrastive_steps(shown, BicNeuronConfig(tau=0.9), [b1, b2])
    np.testing.assert_array_equal(steps.X_norm, EXAMPLE_NORM)  # re-normalizing the shown table is the identity

    p1, p2 = steps.pairs
    for got, want in zip(centroid(b1, c1_host.values), (0.43, 0.45, 0.19)):
        assert within(got, want, 0.005)
    for got, want in zip(centroid(b2, c1_host.values), (0.69, 0.82)):
        assert within(got, want, 0.005)
    ids2 = [shown.matrix.row_ids[i] for i in steps.rows2]
    assert [ids2[i] for i in p1.b2.rows] == ["o7", "o8", "o9"]
    assert [ids2[i] for i in p2.b2.rows] == ["o5", "o6"]
    for got, want in ((p1.b1.msr, 0.0002), (p1.b2.msr, 0.0209), (p2.b1.msr, 0.0045), (p2.b2.msr, 0.0049)):
        assert within(got, want, 0.002)
    assert within(p1.ratio, 0.01, 0.02) and within(p2.ratio, 0.93, 0.02)
    assert steps.selected == [p1]
    elapsed = time.perf_counter() - start
    record_property("detail", f"max norm err {norm_err:.4f}, ratios {p1.ratio:.4f}/{p2.ratio:.4f}, {elapsed:.2f}s")
    assert elapsed < 1.0


# ---------------------------------------------------------------- 2


@pytest.mark.acceptance(2, "MSR algebra")
def test_msr_algebra(record_property):
    start = time.perf_counter()
    rng = np.random.default_rng(20)
    worst_zero = worst_shift = 0.0
    for _ in range(200):
        n, m = (int(v) for v in rng.integers(1, 21, size=2))
        X = rng.normal(size=(n, m)) * rng.uniform(0.1, 10)
        rows, cols = range(n), range(m)
        base = msr(X, rows, cols)
        assert base >= 0
        A = rng.normal(size=n)[:, None] + rng.normal(size=m)[None, :] + rng.normal()
        worst_zero = max(worst_zero, msr(A, rows, cols))
        shifted = X + rng.normal(size=n)[:, None] * 5 + rng.normal(size=m)[None, :] * 5
        worst_shift = max(worst_shift, abs(msr(shifted, rows, cols) - base))
        assert msr(X, [int(rng.integers(n))], cols) == 0.0
        assert msr(X, rows, [int(rng.integers(m))]) == 0.0
    elapsed = time.perf_counter() - start
    record_property("detail", f"max additive MSR {worst_zero:.1e}, max shift change {worst_shift:.1e}, {elapsed:.2f}s")
    assert worst_zero <= 1e-12
    assert worst_shift <= 1e-9
    assert elapsed < 5.0


# ---------------------------------------------------------------- 3


@pytest.mark.acceptance(3, "biclustering oracle")
def test_biclustering_oracle(record_property):
    start = time.perf_counter()
    rng = np.random.default_rng(30)
    mined, checked = 0, 0
    for t in range(50):
        n, m = int(rng.integers(3, 6)), int(rng.integers(3, 6))
        X = rng.random((n, m))
        if t % 2:  # half the matrices carry a near-additive block on some columns so that biclusters exist
            cols = rng.choice(m, size=int(rng.integers(2, m)), replace=False)
            block = 0.3 * rng.random(n)[:, None] + 0.3 * rng.random(len(cols))[None, :]
            X[:, cols] = block + 0.05 * rng.random((n, len(cols)))
        params = BiclusteringParams(t_d=float(rng.choice([0.05, 0.1, 0.2, 0.5])), t_m=0.02)
        bics = mine_biclusters(X, params)
        mined += len(bics)
        for b in bics:
            assert b.msr <= params.t_m
            assert len(b.rows) >= params.min_rows and len(b.cols) >= params.min_cols
            others = [j for j in range(m) if j not in b.cols]
            for r in range(1, len(others) + 1):
                for extra in itertools.combinations(others, r):
                    checked += 1
                    assert msr(X, b.rows, b.cols + extra) > params.t_m, "a wider valid bicluster exists"
    elapsed = time.perf_counter() - start
    record_property("detail", f"{mined} biclusters, {checked} supersets enumerated, {elapsed:.2f}s")
    assert mined > 0
    assert elapsed < 30.0


# ---------------------------------------------------------------- 4


@pytest.mark.acceptance(4, "perceptron convergence on separable data")
def test_perceptron_convergence(record_property):
    sp_ok = kp_ok = 0
    for seed in range(20):
        X, y = separable(seed, n=50, margin=0.2)
        sp_ok += bool(np.all(sp_train(X, y, epochs=50, seed=seed).predict(X) == y))
        kp_ok += bool(np.all(kp_train(X, y, Kernel("linear"), epochs=50).predict(X) == y))
    record_property("detail", f"SP {sp_ok}/20, KP-linear {kp_ok}/20")
    assert sp_ok == 20 and kp_ok == 20


# ---------------------------------------------------------------- 5


def _signs(m):
    return np.array(list(itertools.product((0.0, 1.0), repeat=m)))


def brute_force_p(a, b):
    d = np.round(np.asarray(a) - np.asarray(b), 12)
    d = d[d != 0]
    if len(d) == 0:
        return 1.0
    ranks = stats.rankdata(np.abs(d))  # mid-ranks are halves, so every sum below is exact
    sums = _signs(len(d)) @ ranks
    centre = ranks.sum() / 2
    hits = int(np.sum(np.abs(sums - centre) >= abs(ranks[d > 0].sum() - centre)))
    return min(1.0, hits / 2 ** len(d))


@pytest.mark.acceptance(5, "Wilcoxon exactness")
def test_wilcoxon_exactness(record_property):
    rng = np.random.default_rng(50)
    cases = 0
    for n in range(1, 9):
        for _ in range(300):
            a = np.round(rng.random(n), int(rng.integers(1, 4)))
            b = np.round(rng.random(n), int(rng.integers(1, 4)))
            if rng.random() < 0.2:
                k = int(rng.integers(0, n + 1))
                b[:k] = a[:k]  # zero differences must be dropped
            assert wilcoxon_exact(a, b) == brute_force_p(a, b)
            cases += 1
    p5 = wilcoxon_exact([1, 2, 3, 4, 5], [0, 0, 0, 0, 0])
    record_property("detail", f"{cases} random cases identical, all-positive n=5 p={p5}")
    assert p5 == 0.0625


# ---------------------------------------------------------------- 6


@pytest.mark.acceptance(6, "AUC equals ACC on balanced data")
def test_metrics_identity(record_property):
    rng = np.random.default_rng(60)
    worst = 0.0
    for _ in range(100):
        half = int(rng.integers(1, 50))
        y = rng.permutation(np.array([1] * half + [-1] * half))
        r = metrics(y, rng.choice([-1, 1], size=2 * half), 1)
        worst = max(worst, abs(r.auc - r.acc))
    record_property("detail", f"max |AUC - ACC| = {worst:.1e}")
    assert worst <= 1e-12


# ---------------------------------------------------------------- 7


@pytest.mark.acceptance(7, "planted subspace end to end")
def test_planted_subspace_end_to_end(record_property):
    start = time.perf_counter()
    bn_means, wins, sig_majority, sig_sp = [], 0, 0, 0
    for seed in range(10):
        data, _ = planted_subspace(seed)
        results = evaluate(data, ExperimentConfig(seed=seed, models=("sp", "bn", "majority")), f"planted{seed}")
        auc = {m: np.mean([r.auc for r in results if r.model == m]) for m in ("sp", "bn")}
        bn_means.append(auc["bn"])
        wins += auc["bn"] > auc["sp"]
        tests = {(r["model_a"], r["model_b"]): r for r in compare(results, metrics_=("auc",))}
        sig_majority += tests["bn", "majority"]["significant"] and tests["bn", "majority"]["better"] == "bn"
        sig_sp += tests["sp", "bn"]["significant"] and tests["sp", "bn"]["better"] == "bn"
    elapsed = time.perf_counter() - start
    mean = float(np.mean(bn_means))
    record_property("detail", f"BN mean AUC {mean:.3f}, beats SP {wins}/10, significant vs majority "
                              f"{sig_majority}/10 (vs SP {sig_sp}/10), {elapsed:.0f}s")
    assert mean >= 0.85
    assert wins >= 8
    assert sig_majority >= 5
    assert elapsed < 120


# ---------------------------------------------------------------- 8


def _write_csv(path, data):
    lines = [",".join([*data.matrix.col_ids, "label"])]
    for row, lab in zip(data.values, data.original_labels(data.labels)):
        lines.append(",".join([*map(repr, row.tolist()), lab]))
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.mark.acceptance(8, "degenerate paths")
def test_degenerate_paths(tmp_path, capsys, record_property):
    noise = uniform_noise(0)
    with pytest.raises(NoDiscriminativeSubspace):
        fit(noise, BicNeuronConfig(tau=0.1))
    out = tmp_path / "out"
    code = main(["evaluate", "--data", _write_csv(tmp_path / "noise.csv", noise), "--models", "bn",
                 "--tau", "0.1", "--out", str(out)])
    capsys.readouterr()
    folds = (out / "folds.csv").read_text().splitlines()[1:]
    flagged = sum(",True," in ln for ln in folds)
    record_property("detail", f"evaluate exit {code}, {flagged}/{len(folds)} folds flagged as fallback")
    assert code == 0 and len(folds) == 10 and flagged >= 1


# ---------------------------------------------------------------- 9


@pytest.mark.acceptance(9, "byte-identical reruns, sequential and parallel")
def test_reproducibility(tmp_path, capsys, record_property):
    path = _write_csv(tmp_path / "planted.csv", planted_subspace(0)[0])
    names = ("folds.csv", "folds.jsonl", "summary.csv", "summary.jsonl")
    runs = {}
    for label, jobs in (("seq1", 1), ("seq2", 1), ("par1", 4), ("par2", 2)):
        code = main(["evaluate", "--data", path, "--models", "sp,kp-linear,bn", "--seed", "7",
                     "--jobs", str(jobs), "--out", str(tmp_path / label), "--format", "csv"])
        assert code == 0
        runs[label] = {n: (tmp_path / label / n).read_bytes() for n in names}
        runs[label]["stdout"] = capsys.readouterr().out.encode()
    same = all(runs[k] == runs["seq1"] for k in runs)
    record_property("detail", f"{len(runs)} runs x {len(names) + 1} outputs, identical={same}")
    assert same
