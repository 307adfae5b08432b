"""Additive-coherence biclustering of a single class.

Seeds come from cutting a per-feature average-linkage dendrogram; each seed
is grown column by column under an MSR ceiling, trimmed row by row when it
exceeds the ceiling, and overlapping survivors are merged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .errors import EmptySelection, IndexOutOfBicluster, MatrixTooSmall


def _values(host) -> np.ndarray:
    return np.asarray(getattr(host, "values", host), dtype=float)


def residues(sub) -> np.ndarray:
    """Residue matrix of a submatrix under the additive model."""
    sub = np.asarray(sub, dtype=float)
    if 1 in sub.shape:  # exactly zero; the general formula leaves rounding noise
        return np.zeros_like(sub)
    return sub - sub.mean(axis=0) - sub.mean(axis=1)[:, None] + sub.mean()


def msr(host, rows, cols) -> float:
    """Mean squared residue of ``host[rows, cols]``."""
    rows, cols = list(rows), list(cols)
    if not rows or not cols:
        raise EmptySelection("msr needs at least one row and one column")
    sub = _values(host)[np.ix_(rows, cols)]
    return float(np.mean(residues(sub) ** 2))


def residue(host, rows, cols, i, j) -> float:
    """Residue of cell (i, j) inside the bicluster ``(rows, cols)``."""
    rows, cols = list(rows), list(cols)
    if i not in rows or j not in cols:
        raise IndexOutOfBicluster(f"cell ({i}, {j}) is outside the bicluster")
    r = residues(_values(host)[np.ix_(rows, cols)])
    return float(r[rows.index(i), cols.index(j)])


@dataclass(frozen=True, order=True)
class Bicluster:
    rows: tuple
    cols: tuple
    msr: float = field(compare=False)

    @classmethod
    def on(cls, host, rows, cols) -> "Bicluster":
        rows = tuple(sorted(int(i) for i in set(rows)))
        cols = tuple(sorted(int(j) for j in set(cols)))
        return cls(rows, cols, msr(host, rows, cols))

    @property
    def shape(self):
        return len(self.rows), len(self.cols)

    def contains(self, other: "Bicluster") -> bool:
        return set(other.rows) <= set(self.rows) and set(other.cols) <= set(self.cols)


@dataclass(frozen=True)
class BiclusteringParams:
    t_d: float = 0.5
    t_m: float = 0.02
    min_rows: int = 2
    min_cols: int = 2

    def __post_init__(self):
        if not self.t_d > 0 or not self.t_m > 0:
            raise ValueError("t_d and t_m must be positive")
        if self.min_rows < 2 or self.min_cols < 2:
            raise ValueError("min_rows and min_cols must be at least 2")


@dataclass(frozen=True)
class Dendrogram:
    """Average-linkage merge history.

    Leaves are ``0..n_leaves-1``; merge ``s`` creates cluster ``n_leaves + s``
    (the same numbering scipy uses).
    """

    n_leaves: int
    merges: tuple  # of (left_id, right_id, distance)

    def members(self, cluster_id: int) -> list:
        if cluster_id < self.n_leaves:
            return [cluster_id]
        stack, out = [cluster_id], []
        while stack:
            c = stack.pop()
            if c < self.n_leaves:
                out.append(c)
            else:
                a, b, _ = self.merges[c - self.n_leaves]
                stack.extend((a, b))
        return sorted(out)


def build_dendrogram(values) -> Dendrogram:
    """UPGMA over absolute differences of scalar values.

    Ties go to the pair whose smallest member indices are lowest. A merged
    cluster lives at the lower of its two slots, so a slot index is always
    the cluster's smallest member and ties reduce to (distance, slot, slot).
    """
    x = np.asarray(values, dtype=float).ravel()
    n = len(x)
    if n < 2:
        return Dendrogram(n, ())
    D = np.abs(x[:, None] - x[None, :])
    np.fill_diagonal(D, np.inf)
    size = np.ones(n)
    cid = np.arange(n)
    idx = np.arange(n)
    active = np.ones(n, dtype=bool)
    # nearest neighbour among higher slots
    nn_d = np.full(n, np.inf)
    nn_j = np.full(n, -1)

    def refresh(i):
        if i == n - 1:
            nn_d[i], nn_j[i] = np.inf, -1
            return
        row = D[i, i + 1:]
        k = int(np.argmin(row))
        nn_d[i], nn_j[i] = (row[k], i + 1 + k) if np.isfinite(row[k]) else (np.inf, -1)

    for i in range(n):
        refresh(i)

    merges = []
    last = 0.0
    for step in range(n - 1):
        p = int(np.argmin(nn_d))
        q = int(nn_j[p])
        d = max(float(nn_d[p]), last)
        last = d
        merges.append((int(cid[p]), int(cid[q]), d))

        new = (size[p] * D[p] + size[q] * D[q]) / (size[p] + size[q])
        D[p], D[:, p] = new, new
        D[q], D[:, q] = np.inf, np.inf
        D[p, p] = np.inf
        size[p] += size[q]
        cid[p] = n + step
        nn_d[q], nn_j[q] = np.inf, -1
        active[q] = False

        stale = active & (idx < p) & ((nn_j == p) | (nn_j == q) | (D[:, p] <= nn_d))
        stale |= active & (idx > p) & (idx < q) & (nn_j == q)
        stale[p] = True
        for i in np.flatnonzero(stale):
            refresh(int(i))
    return Dendrogram(n, tuple(merges))


def cut_dendrogram(d: Dendrogram, t_d: float) -> list:
    """Flat clusters after applying every merge with distance <= t_d."""
    groups = {i: [i] for i in range(d.n_leaves)}
    for s, (a, b, dist) in enumerate(d.merges):
        if dist > t_d:
            break
        groups[d.n_leaves + s] = groups.pop(a) + groups.pop(b)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


def expand(seed: Bicluster, host, params: BiclusteringParams) -> Bicluster:
    """Add the best column while the MSR stays within ``t_m``."""
    X = _values(host)
    rows = list(seed.rows)
    cols = list(seed.cols)
    sub = X[rows]
    centered = sub - sub.mean(axis=0)
    n = len(rows)
    current = seed
    while True:
        V = centered[:, cols]
        u = V.mean(axis=1)
        ss = float(((V - u[:, None]) ** 2).sum())
        m = len(cols)
        cand = np.setdiff1d(np.arange(X.shape[1]), cols)
        if len(cand) == 0:
            break
        dev = ((centered[:, cand] - u[:, None]) ** 2).sum(axis=0)
        # MSR of cols + [c] from the running sum of squares
        score = (ss + m / (m + 1) * dev) / (n * (m + 1))
        order = np.argsort(score, kind="stable")
        chosen = None
        for k in order:
            if score[k] > params.t_m * (1 + 1e-9):
                break
            b = Bicluster.on(X, rows, cols + [int(cand[k])])
            if b.msr <= params.t_m:
                chosen = b
                break
        if chosen is None:
            break
        current = chosen
        cols = list(chosen.cols)
    return current


def refine(b: Bicluster, host, params: BiclusteringParams) -> Bicluster:
    """Drop the worst row while the MSR exceeds ``t_m`` and rows remain above the floor."""
    X = _values(host)
    while b.msr > params.t_m and len(b.rows) > params.min_rows:
        r = residues(X[np.ix_(b.rows, b.cols)])
        worst = int(np.argmax((r ** 2).mean(axis=1)))
        b = Bicluster.on(X, b.rows[:worst] + b.rows[worst + 1:], b.cols)
    return b


def _drop_contained(bics: list) -> list:
    bics = sorted(set(bics))
    return [b for b in bics if not any(o != b and o.contains(b) for o in bics)]


def merge_all(bics, host, params: BiclusteringParams) -> list:
    """Union overlapping biclusters while the union stays within ``t_m``."""
    X = _values(host)
    current = sorted(set(bics))
    tried = {}
    changed = True
    while changed:
        changed = False
        for a, b in combinations(current, 2):
            if not (set(a.rows) & set(b.rows)) or not (set(a.cols) & set(b.cols)):
                continue
            key = (a.rows, a.cols, b.rows, b.cols)
            if key not in tried:
                tried[key] = Bicluster.on(X, a.rows + b.rows, a.cols + b.cols)
            union = tried[key]
            if union.msr <= params.t_m:
                current = sorted((set(current) - {a, b}) | {union})
                changed = True
                break
    return _drop_contained(current)


def mine_biclusters(class1, params: BiclusteringParams, dendrograms=None) -> list:
    """Coherent biclusters of one class, deterministically ordered.

    ``dendrograms`` may hold the per-column dendrograms from an earlier call
    on the same matrix; they do not depend on ``t_d``.
    """
    X = _values(class1)
    n, m = X.shape
    if n < params.min_rows or m < params.min_cols:
        raise MatrixTooSmall(f"{n}x{m} matrix is below the {params.min_rows}x{params.min_cols} minimum")
    if dendrograms is None:
        dendrograms = [build_dendrogram(X[:, j]) for j in range(m)]
    found = set()
    for j in range(m):
        for group in cut_dendrogram(dendrograms[j], params.t_d):
            if len(group) < params.min_rows:
                continue
            b = refine(expand(Bicluster.on(X, group, [j]), X, params), X, params)
            if len(b.cols) >= params.min_cols and len(b.rows) >= params.min_rows and b.msr <= params.t_m:
                found.add(b)
    return merge_all(found, X, params)


def format_bicluster(b: Bicluster, row_ids=None, col_ids=None) -> str:
    rows = [row_ids[i] for i in b.rows] if row_ids is not None else b.rows
    cols = [col_ids[j] for j in b.cols] if col_ids is not None else b.cols
    return f"rows={','.join(map(str, rows))} cols={','.join(map(str, cols))} msr={b.msr:.6f}"


def parse_bicluster(line: str, host, row_ids, col_ids) -> Bicluster:
    """Read a ``rows=... cols=...`` line (as written by format_bicluster) back against ``host``."""
    fields = dict(tok.split("=", 1) for tok in line.split())
    rpos = {r: i for i, r in enumerate(row_ids)}
    cpos = {c: j for j, c in enumerate(col_ids)}
    try:
        rows = [rpos[t] for t in fields["rows"].split(",")]
        cols = [cpos[t] for t in fields["cols"].split(",")]
    except KeyError as e:
        raise IndexOutOfBicluster(f"unknown identifier {e} in {line!r}") from None
    return Bicluster.on(host, rows, cols)
