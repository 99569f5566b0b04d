"""Description lengths and k-means compression ratios.

Two ways of measuring the length of a d x n block ``A`` with squared norm
``a_sq``:

* DL1 is ``a_sq`` itself.
* DL2 is ``n * log2(a_sq / (n h) + 1)``, the number of binary digits needed
  to write the per-column energy at quantization unit ``h``. The ``+ 1``
  keeps the logarithm finite at ``a_sq = 0``.

KMCR1 and KMCR2 divide the length of the compressed representation
(dictionary + residual, plus labels for DL2) by the length of the raw data.
The ``*_stage2`` variants add a second compression of the dictionary itself.

All ratios are pure functions of squared norms and counts. Logarithms are
base 2 by default; the ratios themselves do not depend on the base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import KZero, ZeroDataNorm


@dataclass(frozen=True)
class QuantizationConfig:
    h: float = 1.0

    def __post_init__(self):
        if not self.h > 0 or not math.isfinite(self.h):
            raise ValueError(f"quantization unit h must be positive, got {self.h}")


@dataclass(frozen=True)
class CriterionInputs:
    x_sq: float
    r_sq: float
    n: int
    k: int
    d: int = 1

    def __post_init__(self):
        if self.x_sq < 0 or self.r_sq < 0:
            raise ValueError("squared norms must be non-negative")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= self.k <= self.n:
            raise ValueError(f"k must lie in [0, n={self.n}], got {self.k}")
        if self.r_sq > self.x_sq * (1 + 1e-9):
            raise ValueError("residual norm exceeds data norm")


def _log1p(z: float, base: float) -> float:
    return math.log1p(z) / math.log(base)


def dl1(a_sq: float) -> float:
    if a_sq < 0:
        raise ValueError("a_sq must be non-negative")
    return float(a_sq)


def dl2(a_sq: float, n_cols: int, h: float = 1.0, base: float = 2.0) -> float:
    if a_sq < 0:
        raise ValueError("a_sq must be non-negative")
    if n_cols < 1 or not h > 0:
        raise ValueError("n_cols must be >= 1 and h > 0")
    return n_cols * _log1p(a_sq / (n_cols * h), base)


def _data_length(x_sq, n, h, base):
    length = dl2(x_sq, n, h, base)
    if length == 0:
        raise ZeroDataNorm()
    return length


def kmcr1(inputs: CriterionInputs) -> float:
    x_sq, r_sq, n, k = inputs.x_sq, inputs.r_sq, inputs.n, inputs.k
    if x_sq == 0:
        raise ZeroDataNorm()
    return (k / n * x_sq + r_sq) / x_sq


def kmcr2(inputs: CriterionInputs, q: QuantizationConfig = QuantizationConfig(), base: float = 2.0) -> float:
    x_sq, r_sq, n, k = inputs.x_sq, inputs.r_sq, inputs.n, inputs.k
    if k == 0:
        raise KZero()
    h = q.h
    denominator = _data_length(x_sq, n, h, base)
    dictionary = k * _log1p(x_sq / (n * h), base)
    residual = dl2(r_sq, n, h, base)
    labels = 2 * n * math.log(k) / math.log(base)
    return (dictionary + residual + labels) / denominator


def kmcr1_stage2(x_sq: float, r1_sq: float, r2_sq: float, k2: int, n: int) -> float:
    if x_sq == 0:
        raise ZeroDataNorm()
    if k2 < 1:
        raise KZero()
    return (k2 / n * x_sq + r2_sq + r1_sq) / x_sq


def kmcr2_stage2(
    x_sq: float,
    r1_sq: float,
    r2_sq: float,
    k: int,
    k2: int,
    n: int,
    h: float = 1.0,
    base: float = 2.0,
) -> float:
    # the stage-2 residual lives on k centroid columns, hence k*h below
    if k < 1 or k2 < 1:
        raise KZero()
    if not h > 0:
        raise ValueError("h must be positive")
    denominator = _data_length(x_sq, n, h, base)
    dictionary = k2 * _log1p(x_sq / (n * h), base)
    centroid_residual = dl2(r2_sq, k, h, base)
    data_residual = dl2(r1_sq, n, h, base)
    return (dictionary + centroid_residual + data_residual) / denominator
