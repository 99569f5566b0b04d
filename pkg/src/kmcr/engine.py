"""Lloyd k-means with empty-cluster elimination.

The centroid update ``C <- X E S^-1`` is realized without building E or S:
points are grouped by label and each group's mean becomes its centroid.
Clusters that end up with no members are dropped and the survivors are
renumbered in order, so ``k_eff`` can only shrink during a run.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DimensionMismatch, KTooLarge
from .matrix import DataMatrix, as_data_matrix

DEFAULT_MAX_ITERATIONS = 300


class InitStrategy(enum.Enum):
    RANDOM_POINTS = "random_points"
    PROVIDED = "provided"


@dataclass(frozen=True)
class EngineConfig:
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    seed: int = 0
    init_strategy: InitStrategy = InitStrategy.RANDOM_POINTS

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass(frozen=True, eq=False)
class ClusteringModel:
    centroids: DataMatrix
    labels: np.ndarray
    k_requested: int
    k_eff: int
    residual_sq: float
    iterations: int
    converged: bool
    # exact SSE after every assignment step, starting with the initial one
    sse_history: tuple = field(default=(), repr=False)

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.intp).copy()
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)


def _check_k(k, n):
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k > n:
        raise KTooLarge(k, n)


def init_centroids(X, k: int, seed: int) -> DataMatrix:
    """Pick ``k`` distinct columns of ``X`` uniformly without replacement."""
    X = as_data_matrix(X)
    _check_k(k, X.cols)
    rng = np.random.default_rng(seed)
    idx = rng.choice(X.cols, size=k, replace=False)
    return DataMatrix(X.values[:, idx])


def _sq_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # points (n, d), centers (k, d) -> (n, k); uses |x|^2 + |c|^2 - 2 x.c
    p_norms = np.einsum("ij,ij->i", points, points)
    c_norms = np.einsum("ij,ij->i", centers, centers)
    dist = p_norms[:, None] + c_norms[None, :] - 2.0 * (points @ centers.T)
    np.maximum(dist, 0.0, out=dist)
    return dist


def assign(X, C) -> np.ndarray:
    """Nearest-centroid label per point; ties go to the smallest index."""
    X = as_data_matrix(X)
    C = as_data_matrix(C)
    if X.rows != C.rows:
        raise DimensionMismatch(f"data has {X.rows} rows, centroids have {C.rows}")
    dist = _sq_distances(X.points, C.points)
    return np.argmin(dist, axis=1).astype(np.intp)


def _group_means(values: np.ndarray, labels: np.ndarray, k: int):
    counts = np.bincount(labels, minlength=k)
    order = np.argsort(labels, kind="stable")
    live = np.flatnonzero(counts)
    starts = np.concatenate(([0], np.cumsum(counts[live])[:-1]))
    sums = np.add.reduceat(values[:, order], starts, axis=1)
    return sums / counts[live], live


def update_centroids(X, labels, k: int):
    """Centroid = mean of members; empty clusters are removed.

    Returns ``(centroids, k_eff)``. Labels must be remapped with
    :func:`compact_labels` to match the surviving clusters.
    """
    X = as_data_matrix(X)
    labels = np.asarray(labels, dtype=np.intp)
    if labels.shape != (X.cols,):
        raise DimensionMismatch(f"expected {X.cols} labels, got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ValueError(f"labels must lie in [0, {k})")
    means, live = _group_means(X.values, labels, k)
    return DataMatrix(means), int(live.size)


def compact_labels(labels, k: int) -> np.ndarray:
    """Renumber labels so surviving clusters are 0..k_eff-1 in original order."""
    labels = np.asarray(labels, dtype=np.intp)
    counts = np.bincount(labels, minlength=k)
    remap = np.cumsum(counts > 0) - 1
    return remap[labels].astype(np.intp)


def _sse(values: np.ndarray, centers: np.ndarray, labels: np.ndarray) -> float:
    diff = values - centers[:, labels]
    return float(np.einsum("ij,ij->", diff, diff))


def lloyd(X, k: int, config: EngineConfig | None = None, init=None) -> ClusteringModel:
    """Run Lloyd iterations until the label vector stops changing.

    ``init`` supplies starting centroids (d x k) when the config uses
    ``InitStrategy.PROVIDED``; passing ``init`` alone implies that strategy.
    One iteration is one centroid update followed by one reassignment.
    """
    X = as_data_matrix(X)
    config = config or EngineConfig()
    if init is not None or config.init_strategy is InitStrategy.PROVIDED:
        if init is None:
            raise ValueError("init_strategy=PROVIDED requires init centroids")
        C = as_data_matrix(init)
        if C.rows != X.rows:
            raise DimensionMismatch(f"init has {C.rows} rows, data has {X.rows}")
        k = C.cols
        _check_k(k, X.cols)
    else:
        _check_k(k, X.cols)
        C = init_centroids(X, k, config.seed)

    values = X.values
    points = X.points
    k_requested = k
    centers = C.values
    labels = np.argmin(_sq_distances(points, C.points), axis=1).astype(np.intp)
    k_cur = centers.shape[1]
    history = [_sse(values, centers, labels)]
    converged = False
    iterations = 0
    while iterations < config.max_iterations:
        iterations += 1
        centers, live = _group_means(values, labels, k_cur)
        if live.size < k_cur:
            labels = compact_labels(labels, k_cur)
            k_cur = live.size
        new_labels = np.argmin(_sq_distances(points, centers.T), axis=1).astype(np.intp)
        history.append(_sse(values, centers, new_labels))
        if np.array_equal(new_labels, labels):
            converged = True
            break
        labels = new_labels

    if not converged:
        # keep labels pointing at live clusters only
        counts = np.bincount(labels, minlength=k_cur)
        if np.any(counts == 0):
            keep = counts > 0
            centers = centers[:, keep]
            labels = compact_labels(labels, k_cur)
            k_cur = int(keep.sum())
    residual = _sse(values, centers, labels)
    return ClusteringModel(
        centroids=DataMatrix(centers),
        labels=labels,
        k_requested=k_requested,
        k_eff=int(k_cur),
        residual_sq=residual,
        iterations=iterations,
        converged=converged,
        sse_history=tuple(history),
    )


def residual_matrix(X, model: ClusteringModel) -> DataMatrix:
    """``R = X - C E``: column i is point i minus its assigned centroid."""
    X = as_data_matrix(X)
    if X.rows != model.centroids.rows or X.cols != model.labels.size:
        raise DimensionMismatch("model does not match the data shape")
    return DataMatrix(X.values - model.centroids.values[:, model.labels])


def reconstruction(model: ClusteringModel) -> DataMatrix:
    """``C E``: every point replaced by its centroid."""
    return DataMatrix(model.centroids.values[:, model.labels])
