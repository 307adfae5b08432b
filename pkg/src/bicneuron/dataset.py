"""Loading, validating, normalizing and class-splitting tabular data."""

from __future__ import annotations

import csv
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DataError,
    DimensionMismatch,
    EmptyClass,
    EmptyData,
    LengthMismatch,
    MissingFile,
    NonFiniteValue,
    NotBinary,
    ParseError,
)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DataMatrix:
    """Dense N x M table of finite reals with row and column identifiers."""

    values: np.ndarray
    row_ids: tuple = None
    col_ids: tuple = None

    def __post_init__(self):
        values = _frozen(self.values)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise EmptyData(f"expected a non-empty 2-D matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            i, j = np.argwhere(~np.isfinite(values))[0]
            raise NonFiniteValue(int(i), int(j))
        n, m = values.shape
        row_ids = tuple(str(i) for i in range(n)) if self.row_ids is None else tuple(self.row_ids)
        col_ids = tuple(f"f{j}" for j in range(m)) if self.col_ids is None else tuple(self.col_ids)
        if len(row_ids) != n or len(col_ids) != m:
            raise LengthMismatch("identifier count does not match matrix shape")
        if len(set(row_ids)) != n or len(set(col_ids)) != m:
            raise DataError("row and column identifiers must be unique within their axis")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "row_ids", row_ids)
        object.__setattr__(self, "col_ids", col_ids)

    @property
    def shape(self):
        return self.values.shape

    def take_rows(self, rows) -> "DataMatrix":
        rows = np.asarray(rows, dtype=int)
        return DataMatrix(self.values[rows], tuple(self.row_ids[i] for i in rows), self.col_ids)

    def take_cols(self, cols) -> "DataMatrix":
        cols = np.asarray(cols, dtype=int)
        return DataMatrix(self.values[:, cols], self.row_ids, tuple(self.col_ids[j] for j in cols))


def _pick_class1(raw_labels) -> str:
    counts = Counter(raw_labels)
    # minority first; equal counts fall back to text order
    return min(counts, key=lambda lab: (counts[lab], str(lab)))


@dataclass(frozen=True)
class LabeledDataset:
    """A DataMatrix with binary labels in {-1, +1}.

    ``class1_label`` is the biclustered class: the minority label, or the
    label whose text sorts first when both classes are the same size.
    ``label_names`` maps the internal codes back to the original labels.
    """

    matrix: DataMatrix
    labels: np.ndarray
    class1_label: int = None
    label_names: dict = field(default=None, compare=False)

    def __post_init__(self):
        labels = _frozen(self.labels, dtype=int)
        if labels.ndim != 1 or len(labels) != self.matrix.shape[0]:
            raise LengthMismatch(f"{len(labels)} labels for {self.matrix.shape[0]} rows")
        if not np.all(np.isin(labels, (-1, 1))):
            raise NotBinary(len(set(labels.tolist())))
        object.__setattr__(self, "labels", labels)
        if self.class1_label is None:
            object.__setattr__(self, "class1_label", int(_pick_class1(labels.tolist())))
        elif self.class1_label not in (-1, 1):
            raise ValueError("class1_label must be -1 or +1")
        if self.label_names is None:
            object.__setattr__(self, "label_names", {1: "1", -1: "-1"})

    @classmethod
    def from_labels(cls, values, raw_labels: Sequence, row_ids=None, col_ids=None) -> "LabeledDataset":
        """Build from arbitrary two-valued labels; the minority maps to +1."""
        raw = [str(x) for x in raw_labels]
        distinct = sorted(set(raw))
        if len(distinct) != 2:
            raise NotBinary(len(distinct))
        c1 = _pick_class1(raw)
        other = distinct[0] if distinct[1] == c1 else distinct[1]
        labels = np.where(np.array(raw) == c1, 1, -1)
        return cls(DataMatrix(values, row_ids, col_ids), labels, 1, {1: c1, -1: other})

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def values(self) -> np.ndarray:
        return self.matrix.values

    @property
    def class2_label(self) -> int:
        return -self.class1_label

    def subset(self, rows) -> "LabeledDataset":
        rows = np.asarray(rows, dtype=int)
        return LabeledDataset(self.matrix.take_rows(rows), self.labels[rows], self.class1_label, self.label_names)

    def with_matrix(self, matrix: DataMatrix) -> "LabeledDataset":
        return LabeledDataset(matrix, self.labels, self.class1_label, self.label_names)

    def original_labels(self, codes) -> list:
        return [self.label_names[int(c)] for c in codes]


@dataclass(frozen=True)
class ClassSplit:
    class1: DataMatrix
    class2: DataMatrix
    rows1: np.ndarray
    rows2: np.ndarray


def load_csv(path, label_column=None, id_column=None) -> LabeledDataset:
    """Read a comma-separated file with a header row.

    The label column is chosen by name and defaults to the last column.
    An optional ``id_column`` supplies row identifiers; every other column
    must parse as a finite real.
    """
    if not os.path.isfile(path):
        raise MissingFile(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyData(f"{path} is empty") from None
        rows = [r for r in reader if any(cell.strip() for cell in r)]

    if label_column is None:
        label_idx = len(header) - 1
    elif label_column in header:
        label_idx = header.index(label_column)
    else:
        raise DataError(f"column {label_column!r} not found in header")
    id_idx = None
    if id_column is not None:
        if id_column not in header:
            raise DataError(f"column {id_column!r} not found in header")
        id_idx = header.index(id_column)
    feat_idx = [j for j in range(len(header)) if j not in (label_idx, id_idx)]
    if not feat_idx:
        raise EmptyData("no feature columns")
    if not rows:
        raise EmptyData(f"{path} has no data rows")

    values = np.empty((len(rows), len(feat_idx)))
    raw_labels, row_ids = [], []
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise ParseError(i, None, ",".join(r))
        for out_j, j in enumerate(feat_idx):
            text = r[j].strip()
            try:
                v = float(text)
            except ValueError:
                raise ParseError(i, header[j], text) from None
            if not np.isfinite(v):
                raise NonFiniteValue(i, header[j])
            values[i, out_j] = v
        raw_labels.append(r[label_idx].strip())
        row_ids.append(r[id_idx].strip() if id_idx is not None else str(i))

    k = len(set(raw_labels))
    if k != 2:
        raise NotBinary(k)
    return LabeledDataset.from_labels(values, raw_labels, row_ids, [header[j] for j in feat_idx])


def read_features(path, names, id_column=None):
    """Read the named columns of a CSV (labels optional) as ``(values, row_ids)``."""
    if not os.path.isfile(path):
        raise MissingFile(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyData(f"{path} is empty") from None
        rows = [r for r in reader if any(cell.strip() for cell in r)]
    missing = [n for n in names if n not in header]
    if missing:
        raise DataError(f"columns {missing} not found in header")
    if id_column is not None and id_column not in header:
        raise DataError(f"column {id_column!r} not found in header")
    if not rows:
        raise EmptyData(f"{path} has no data rows")
    idx = [header.index(n) for n in names]
    values = np.empty((len(rows), len(idx)))
    for i, r in enumerate(rows):
        if len(r) != len(header):
            raise ParseError(i, None, ",".join(r))
        for out_j, j in enumerate(idx):
            try:
                v = float(r[j])
            except ValueError:
                raise ParseError(i, header[j], r[j].strip()) from None
            if not np.isfinite(v):
                raise NonFiniteValue(i, header[j])
            values[i, out_j] = v
    ids = [r[header.index(id_column)].strip() for r in rows] if id_column else [str(i) for i in range(len(rows))]
    return values, ids


@dataclass(frozen=True)
class MinMaxParams:
    """Per-column minimum and range captured from a training matrix."""

    col_min: np.ndarray
    col_range: np.ndarray

    @classmethod
    def fit(cls, values) -> "MinMaxParams":
        values = np.asarray(values, dtype=float)
        lo = values.min(axis=0)
        return cls(_frozen(lo), _frozen(values.max(axis=0) - lo))

    def apply(self, values) -> np.ndarray:
        """Map rows with the stored parameters. No clamping; constant columns give 0."""
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != len(self.col_min):
            raise DimensionMismatch(f"expected {len(self.col_min)} features, got {values.shape[-1]}")
        safe = np.where(self.col_range > 0, self.col_range, 1.0)
        out = (values - self.col_min) / safe
        return np.where(self.col_range > 0, out, 0.0)

    def to_dict(self):
        return {"min": self.col_min.tolist(), "range": self.col_range.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(_frozen(d["min"]), _frozen(d["range"]))


def fit_min_max(d: DataMatrix) -> tuple[DataMatrix, MinMaxParams]:
    params = MinMaxParams.fit(d.values)
    return DataMatrix(params.apply(d.values), d.row_ids, d.col_ids), params


def min_max_normalize(d: DataMatrix) -> DataMatrix:
    return fit_min_max(d)[0]


def split_by_class(d: LabeledDataset) -> ClassSplit:
    rows1 = np.flatnonzero(d.labels == d.class1_label)
    rows2 = np.flatnonzero(d.labels != d.class1_label)
    if len(rows1) == 0 or len(rows2) == 0:
        raise EmptyClass("both classes must be non-empty")
    return ClassSplit(d.matrix.take_rows(rows1), d.matrix.take_rows(rows2), _frozen(rows1, int), _frozen(rows2, int))
