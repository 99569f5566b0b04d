"""Exception hierarchy.

Every error carries a short ``category`` so the CLI can print a single
machine-parsable line.
"""


class KMCRError(ValueError):
    """Base class for all errors raised by this package."""

    @property
    def category(self):
        return type(self).__name__


class NonFinite(KMCRError):
    def __init__(self, message="matrix contains NaN or Inf", line=None, column=None):
        self.line = line
        self.column = column
        super().__init__(message)


class ZeroVarianceColumn(KMCRError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"column {index} has zero variance")


class DimensionMismatch(KMCRError):
    pass


class KTooLarge(KMCRError):
    def __init__(self, k, n):
        self.k = k
        self.n = n
        super().__init__(f"k={k} exceeds the number of points n={n}")


class KZero(KMCRError):
    def __init__(self):
        super().__init__("k must be >= 1 (log k is undefined at k=0)")


class ZeroDataNorm(KMCRError):
    def __init__(self):
        super().__init__("data has zero squared norm; compression ratio undefined")


class EmptyGrid(KMCRError):
    pass


class InvalidGrid(KMCRError):
    pass


class ParseError(KMCRError):
    def __init__(self, line, column, token):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: cannot parse {token!r} as a number")


class RaggedRows(KMCRError):
    def __init__(self, line, found, expected):
        self.line = line
        super().__init__(f"line {line}: found {found} fields, expected {expected}")


class EmptyFile(KMCRError):
    def __init__(self, path):
        super().__init__(f"{path}: no data rows")


class IoError(KMCRError):
    def __init__(self, path, reason):
        self.path = path
        super().__init__(f"{path}: {reason}")


class SchemaError(KMCRError):
    pass
