"""Dense d x n data matrices and the numeric primitives built on them.

A :class:`DataMatrix` stores one data point per *column*, so ``values[:, j]``
is point ``j``. The array is kept in Fortran order which makes each point
contiguous in memory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, NonFinite, ZeroVarianceColumn

# frob_sq switches to blocked accumulation above this many entries
_BLOCK_THRESHOLD = 100_000
_BLOCK_SIZE = 1 << 14


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """Immutable, finite, column-per-point matrix of float64 values."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D array, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatch(f"matrix must be at least 1x1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFinite()
        arr = np.array(arr, dtype=np.float64, order="F", copy=True)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_points(cls, points) -> "DataMatrix":
        """Build from an ``(n_points, n_dims)`` array (one point per row)."""
        pts = np.asarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        return cls(pts.T)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @property
    def points(self) -> np.ndarray:
        """Read-only ``(n, d)`` view, one point per row."""
        return self.values.T

    def column(self, j: int) -> np.ndarray:
        return self.values[:, j]

    def __eq__(self, other):
        if not isinstance(other, DataMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)

    def __repr__(self):
        return f"DataMatrix(rows={self.rows}, cols={self.cols})"


def as_data_matrix(A) -> DataMatrix:
    return A if isinstance(A, DataMatrix) else DataMatrix(A)


def frob_sq(A) -> float:
    """Sum of squares of all entries (squared Frobenius norm)."""
    values = as_data_matrix(A).values
    flat = values.ravel(order="F")
    if flat.size <= _BLOCK_THRESHOLD:
        return float(np.dot(flat, flat))
    # per-block dot products, blocks combined with exact summation
    partials = [
        float(np.dot(flat[i : i + _BLOCK_SIZE], flat[i : i + _BLOCK_SIZE]))
        for i in range(0, flat.size, _BLOCK_SIZE)
    ]
    return math.fsum(partials)


def zscore_columns(A) -> DataMatrix:
    """Standardize each column to mean 0 and sample std 1 (divisor rows-1).

    Raises :class:`ZeroVarianceColumn` naming the first constant column.
    """
    values = as_data_matrix(A).values
    if values.shape[0] < 2:
        raise DimensionMismatch("z-scoring needs at least 2 rows")
    mean = values.mean(axis=0)
    centered = values - mean
    std = np.sqrt(np.sum(centered * centered, axis=0) / (values.shape[0] - 1))
    # relative test: a column of identical floats can leave rounding residue
    scale = np.maximum(np.abs(mean), 1.0)
    constant = np.flatnonzero(std <= 1e-12 * scale)
    if constant.size:
        raise ZeroVarianceColumn(int(constant[0]))
    return DataMatrix(centered / std)


def constant_columns(A, tol: float = 1e-12) -> list[int]:
    values = as_data_matrix(A).values
    spread = values.max(axis=0) - values.min(axis=0)
    scale = np.maximum(np.abs(values).max(axis=0), 1.0)
    return [int(j) for j in np.flatnonzero(spread <= tol * scale)]


def gram(Z) -> DataMatrix:
    """Return ``Z.T @ Z``. For an observations x features table the result is
    features x features, and its columns are clustered as d points in d dims."""
    values = as_data_matrix(Z).values
    G = values.T @ values
    # symmetrize away accumulation-order differences between (i, j) and (j, i)
    G = 0.5 * (G + G.T)
    return DataMatrix(G)
