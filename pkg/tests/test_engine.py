import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmcr.engine import (
    EngineConfig,
    InitStrategy,
    assign,
    compact_labels,
    init_centroids,
    lloyd,
    reconstruction,
    residual_matrix,
    update_centroids,
)
from kmcr.exceptions import DimensionMismatch, KTooLarge
from kmcr.matrix import DataMatrix, frob_sq

from .oracles import brute_force_sse, small_family


def test_init_all_points_is_permutation(rng):
    X = DataMatrix(rng.standard_normal((2, 4)))
    C = init_centroids(X, 4, seed=7)
    assert sorted(map(tuple, C.points)) == sorted(map(tuple, X.points))


def test_init_single_and_deterministic(rng):
    X = DataMatrix(rng.standard_normal((3, 10)))
    C = init_centroids(X, 1, seed=3)
    assert any(np.array_equal(C.column(0), X.column(j)) for j in range(10))
    assert init_centroids(X, 5, 11) == init_centroids(X, 5, 11)


def test_init_k_too_large(toy):
    with pytest.raises(KTooLarge):
        init_centroids(toy, 5, 0)


def test_assign_examples():
    np.testing.assert_array_equal(assign([[0.0, 10.0]], [[1.0, 9.0]]), [0, 1])
    # equidistant point goes to the smaller index
    np.testing.assert_array_equal(assign([[1.0]], [[0.0, 2.0]]), [0])
    np.testing.assert_array_equal(assign([[0.0, 3.0, 7.0]], [[0.0, 3.0, 7.0]]), [0, 1, 2])


def test_assign_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        assign(np.zeros((2, 3)), np.zeros((3, 1)))


def test_update_centroids_examples():
    C, k_eff = update_centroids([[0.0, 2.0, 10.0, 14.0]], [0, 0, 1, 1], 2)
    np.testing.assert_array_equal(C.values, [[1.0, 12.0]])
    assert k_eff == 2

    C, k_eff = update_centroids([[1.0, 2.0, 6.0]], [0, 0, 0], 2)
    np.testing.assert_array_equal(C.values, [[3.0]])
    assert k_eff == 1

    X = DataMatrix([[4.0, -1.0, 2.5]])
    C, k_eff = update_centroids(X, [0, 1, 2], 3)
    assert C == X and k_eff == 3


def test_update_removes_empty_in_order():
    C, k_eff = update_centroids([[1.0, 5.0, 9.0]], [0, 2, 2], 3)
    np.testing.assert_array_equal(C.values, [[1.0, 7.0]])
    assert k_eff == 2
    np.testing.assert_array_equal(compact_labels([0, 2, 2], 3), [0, 1, 1])


def test_lloyd_perfect_separation():
    X = DataMatrix([[0.0, 0.0, 10.0, 10.0]])
    model = lloyd(X, 2, EngineConfig(init_strategy=InitStrategy.PROVIDED), init=[[0.0, 10.0]])
    np.testing.assert_array_equal(model.centroids.values, [[0.0, 10.0]])
    assert model.residual_sq == 0.0
    assert model.converged and model.iterations == 1


def test_lloyd_k_equals_n(rng):
    X = DataMatrix(rng.standard_normal((2, 6)))
    model = lloyd(X, 6, EngineConfig(seed=1))
    assert model.residual_sq == 0.0
    assert model.k_eff == 6


def test_lloyd_single_cluster(toy):
    model = lloyd(toy, 1, EngineConfig(seed=0))
    np.testing.assert_array_equal(model.centroids.values, [[5.0]])
    assert model.residual_sq == 100.0


def test_lloyd_duplicate_init_shrinks_k(toy):
    # any 3 of {0,0,10,10} contain a duplicate; the twin centroid starves
    model = lloyd(toy, 3, EngineConfig(seed=0))
    assert model.k_requested == 3 and model.k_eff == 2
    assert set(model.labels) == {0, 1}


def test_lloyd_provided_requires_init(toy):
    with pytest.raises(ValueError):
        lloyd(toy, 2, EngineConfig(init_strategy=InitStrategy.PROVIDED))


def test_lloyd_k_too_large(toy):
    with pytest.raises(KTooLarge):
        lloyd(toy, 5)


def test_max_iterations_bound(rng):
    X = DataMatrix(rng.standard_normal((2, 300)))
    model = lloyd(X, 12, EngineConfig(max_iterations=1, seed=4))
    assert model.iterations == 1
    assert np.all(model.labels < model.k_eff)
    assert set(model.labels) == set(range(model.k_eff))


def test_residual_matrix_examples(toy):
    zero = lloyd(toy, 2, init=[[0.0, 10.0]])
    assert frob_sq(residual_matrix(toy, zero)) == 0.0
    one = lloyd(toy, 1)
    np.testing.assert_array_equal(residual_matrix(toy, one).values, [[-5.0, -5.0, 5.0, 5.0]])
    single = DataMatrix([[3.0], [4.0]])
    assert frob_sq(residual_matrix(single, lloyd(single, 1))) == 0.0


def test_residual_matrix_mismatch(toy, rng):
    model = lloyd(toy, 1)
    with pytest.raises(DimensionMismatch):
        residual_matrix(DataMatrix(rng.standard_normal((2, 4))), model)


@st.composite
def datasets(draw):
    n = draw(st.integers(2, 40))
    d = draw(st.integers(1, 4))
    k = draw(st.integers(1, n))
    seed = draw(st.integers(0, 2**32))
    values = np.random.default_rng(seed).normal(size=(d, n)) * draw(st.sampled_from([0.01, 1.0, 100.0]))
    return DataMatrix(values), k, seed


@settings(max_examples=60, deadline=None)
@given(datasets())
def test_model_invariants(case):
    X, k, seed = case
    model = lloyd(X, k, EngineConfig(seed=seed))
    assert 1 <= model.k_eff <= model.k_requested
    assert set(model.labels.tolist()) == set(range(model.k_eff))
    direct = sum(
        float(np.sum((X.column(i) - model.centroids.column(model.labels[i])) ** 2)) for i in range(X.cols)
    )
    assert model.residual_sq == pytest.approx(direct, rel=1e-9, abs=1e-12)
    if model.converged:
        for j in range(model.k_eff):
            mean = X.values[:, model.labels == j].mean(axis=1)
            np.testing.assert_allclose(model.centroids.column(j), mean, rtol=1e-9, atol=1e-12)
    history = np.array(model.sse_history)
    assert np.all(np.diff(history) <= 1e-9 * np.abs(history[:-1]) + 1e-300)


@settings(max_examples=30, deadline=None)
@given(datasets())
def test_determinism(case):
    X, k, seed = case
    a = lloyd(X, k, EngineConfig(seed=seed))
    b = lloyd(X, k, EngineConfig(seed=seed))
    assert np.array_equal(a.labels, b.labels)
    assert a.centroids.values.tobytes() == b.centroids.values.tobytes()


@settings(max_examples=30, deadline=None)
@given(datasets())
def test_pythagorean_decomposition(case):
    X, k, seed = case
    model = lloyd(X, k, EngineConfig(seed=seed))
    if not model.converged:
        return
    total = frob_sq(X)
    assert abs(total - frob_sq(reconstruction(model)) - model.residual_sq) <= 1e-8 * total


@pytest.mark.parametrize("case", range(30))
def test_small_instances_against_brute_force(case):
    points, k = small_family()[case]
    X = DataMatrix.from_points(points)
    optimum = brute_force_sse(points, k)
    single = lloyd(X, k, EngineConfig(seed=case))
    assert single.residual_sq >= optimum - 1e-9 * max(optimum, 1.0)
    exhaustive = min(
        lloyd(X, k, init=X.values[:, list(idx)]).residual_sq
        for idx in itertools.combinations(range(X.cols), k)
    )
    assert exhaustive == pytest.approx(optimum, rel=1e-9, abs=1e-9)
