import math

import numpy as np
import pytest
import mpmath
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from kmcr.criteria import (
    CriterionInputs,
    QuantizationConfig,
    dl1,
    dl2,
    kmcr1,
    kmcr1_stage2,
    kmcr2,
    kmcr2_stage2,
)
from kmcr.exceptions import KZero, ZeroDataNorm

from .oracles import kmcr1_sheet

# frozen from a 30-digit mpmath evaluation of 4*log2(51) and (2L + 8)/(4L)
DL2_200_4_1 = 22.689701367885982
KMCR2_TOY_K2 = 0.85258286877776419
# stage-2 on centroids {0, 10} merged to their mean: r2 = 50
KMCR2_STAGE2_TOY = 0.66432363008478290


def _sym():
    x, r, r2, n, k, k2, h = sp.symbols("x r r2 n k k2 h", positive=True)

    def L(a, m):
        return m * sp.log(a / (m * h) + 1)

    one = (k * sp.log(x / (n * h) + 1) + L(r, n) + 2 * n * sp.log(k)) / L(x, n)
    two = (k2 * sp.log(x / (n * h) + 1) + L(r2, k) + L(r, n)) / L(x, n)
    args = (x, r, r2, n, k, k2, h)
    return sp.lambdify(args, one, "mpmath"), sp.lambdify(args, two, "mpmath")


SYM_KMCR2, SYM_KMCR2_STAGE2 = _sym()


@pytest.mark.parametrize("value", [0.0, 30.0, 200.0])
def test_dl1_identity(value):
    assert dl1(value) == value


def test_dl2_examples():
    assert dl2(0, 4, 1) == 0
    assert dl2(4, 4, 1) == 4
    assert dl2(200, 4, 1) == pytest.approx(DL2_200_4_1, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 1e6), st.floats(0, 1e6), st.integers(1, 1000), st.floats(1e-3, 1e3))
def test_dl2_monotone(a, b, n, h):
    lo, hi = sorted((a, b))
    assert dl2(lo, n, h) <= dl2(hi, n, h)


def test_kmcr1_examples():
    assert kmcr1(CriterionInputs(x_sq=200, r_sq=0, n=4, k=2)) == 0.5
    for s in (1e-8, 3.7, 200.0, 1e12):
        assert kmcr1(CriterionInputs(x_sq=s, r_sq=0, n=7, k=7)) == 1.0
        assert kmcr1(CriterionInputs(x_sq=s, r_sq=s, n=7, k=0)) == 1.0


def test_kmcr1_matches_sheet(rng):
    for _ in range(50):
        x = float(rng.uniform(1, 1e4))
        n = int(rng.integers(1, 500))
        k = int(rng.integers(0, n + 1))
        r = float(rng.uniform(0, x))
        assert kmcr1(CriterionInputs(x, r, n, k)) == pytest.approx(kmcr1_sheet(x, r, k, n), rel=1e-14)


def test_kmcr1_affine():
    f = lambda r, k: kmcr1(CriterionInputs(x_sq=80.0, r_sq=r, n=16, k=k))
    assert f(20.0, 4) - f(10.0, 4) == pytest.approx(f(30.0, 4) - f(20.0, 4), rel=1e-14)
    assert f(10.0, 6) - f(10.0, 4) == pytest.approx(f(10.0, 8) - f(10.0, 6), rel=1e-14)


def test_kmcr1_zero_norm():
    with pytest.raises(ZeroDataNorm):
        kmcr1(CriterionInputs(x_sq=0, r_sq=0, n=3, k=1))


def test_kmcr2_examples():
    assert kmcr2(CriterionInputs(x_sq=4, r_sq=4, n=4, k=1)) == 1.25
    toy = CriterionInputs(x_sq=200, r_sq=0, n=4, k=2)
    assert kmcr2(toy) == pytest.approx(KMCR2_TOY_K2, rel=1e-14)
    assert kmcr2(toy, base=math.e) == pytest.approx(kmcr2(toy), rel=1e-12)


def test_kmcr2_errors():
    with pytest.raises(ZeroDataNorm):
        kmcr2(CriterionInputs(x_sq=0, r_sq=0, n=3, k=1))
    with pytest.raises(KZero):
        kmcr2(CriterionInputs(x_sq=1, r_sq=1, n=3, k=0))
    with pytest.raises(ValueError):
        QuantizationConfig(0)


def test_stage2_kmcr1_examples():
    assert kmcr1_stage2(200, 0, 0, 1, 4) == 0.25
    assert kmcr1_stage2(200, 37.5, 0, 3, 4) == kmcr1(CriterionInputs(200, 37.5, 4, 3))
    for s in (0.5, 200.0):
        assert kmcr1_stage2(s, s, 0, 9, 9) == 2.0


def test_stage2_kmcr2_examples():
    assert kmcr2_stage2(4, 0, 0, 2, 1, 4, 1) == 0.25
    x, r1, n, k, h = 200.0, 12.0, 40, 5, 0.5
    L = math.log2(x / (n * h) + 1)
    expected = k * L / (n * L) + n * math.log2(r1 / (n * h) + 1) / (n * L)
    assert kmcr2_stage2(x, r1, 0, k, k, n, h) == pytest.approx(expected, rel=1e-14)
    assert kmcr2_stage2(200, 0, 50, 2, 1, 4, 1) == pytest.approx(KMCR2_STAGE2_TOY, rel=1e-14)


def test_stage2_ties_to_first_stage():
    for k in (1, 3, 10):
        a = kmcr1_stage2(500.0, 42.0, 0.0, k, 60)
        assert a == kmcr1(CriterionInputs(500.0, 42.0, 60, k))


def _random_tuple(rng):
    n = int(rng.integers(1, 5000))
    k = int(rng.integers(1, n + 1))
    k2 = int(rng.integers(1, k + 1))
    x = float(10 ** rng.uniform(-2, 6))
    r = float(rng.uniform(0, x))
    r2 = float(rng.uniform(0, x))
    h = float(10 ** rng.uniform(-2, 2))
    return x, r, r2, n, k, k2, h


def test_log_base_invariance(rng):
    for _ in range(100):
        x, r, r2, n, k, k2, h = _random_tuple(rng)
        inp, q = CriterionInputs(x, r, n, k), QuantizationConfig(h)
        assert kmcr2(inp, q, base=math.e) == pytest.approx(kmcr2(inp, q), rel=1e-12)
        a = kmcr2_stage2(x, r, r2, k, k2, n, h)
        b = kmcr2_stage2(x, r, r2, k, k2, n, h, base=math.e)
        assert b == pytest.approx(a, rel=1e-12)


def test_against_symbolic_derivation(rng):
    for _ in range(20):
        x, r, r2, n, k, k2, h = _random_tuple(rng)
        with mpmath.workdps(50):
            exact = [mpmath.mpf(v) for v in (x, r, r2, n, k, k2, h)]
            sym1 = float(SYM_KMCR2(*exact))
            sym2 = float(SYM_KMCR2_STAGE2(*exact))
        assert kmcr2(CriterionInputs(x, r, n, k), QuantizationConfig(h)) == pytest.approx(sym1, rel=1e-12)
        assert kmcr2_stage2(x, r, r2, k, k2, n, h) == pytest.approx(sym2, rel=1e-12)


def test_larger_h_shrinks_log_terms():
    inp = CriterionInputs(x_sq=300.0, r_sq=30.0, n=50, k=6)
    terms = []
    for h in (0.01, 1.0, 100.0):
        terms.append((dl2(inp.r_sq, inp.n, h), dl2(inp.x_sq, inp.n, h)))
    for (r_a, x_a), (r_b, x_b) in zip(terms, terms[1:]):
        assert r_b < r_a and x_b < x_a


def test_inputs_validation():
    with pytest.raises(ValueError):
        CriterionInputs(x_sq=1, r_sq=2, n=3, k=1)
    with pytest.raises(ValueError):
        CriterionInputs(x_sq=1, r_sq=0, n=3, k=4)
    assert np.isfinite(kmcr2(CriterionInputs(1e-300, 0, 1, 1)))
