"""Exception hierarchy.

``DataError`` covers bad inputs (exit code 3 on the command line),
``FitError`` covers models that cannot be built from otherwise valid data.
"""


class BicNeuronError(Exception):
    """Base class for every error raised by this package."""


class DataError(BicNeuronError, ValueError):
    pass


class MissingFile(DataError, FileNotFoundError):
    def __init__(self, path):
        super().__init__(f"file not found: {path}")
        self.path = path


class ParseError(DataError):
    def __init__(self, row, col, text):
        super().__init__(f"cannot parse {text!r} as a real number at row {row}, column {col!r}")
        self.row = row
        self.col = col


class NonFiniteValue(DataError):
    def __init__(self, row, col):
        super().__init__(f"non-finite value at row {row}, column {col!r}")
        self.row = row
        self.col = col


class NotBinary(DataError):
    def __init__(self, k):
        super().__init__(f"label column must hold exactly two distinct values, found {k}")
        self.k = k


class EmptyClass(DataError):
    pass


class EmptyData(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class EmptySelection(DataError):
    pass


class IndexOutOfBicluster(DataError, IndexError):
    pass


class MatrixTooSmall(DataError):
    pass


class ClassSmallerThanK(DataError):
    def __init__(self, label, count, k):
        super().__init__(f"class {label!r} has {count} instances, fewer than k={k} folds")
        self.label = label
        self.count = count
        self.k = k


class ExactRegimeExceeded(DataError):
    pass


class FitError(BicNeuronError):
    """No usable model could be built."""


class NoCoherentBiclusters(FitError):
    pass


class NoDiscriminativeSubspace(FitError):
    pass


class AllConfigurationsFailed(FitError):
    pass
