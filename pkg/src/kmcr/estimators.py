"""scikit-learn compatible wrappers.

Estimators take the usual ``(n_samples, n_features)`` arrays and convert to
the column-per-point layout used internally.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import criteria, selection
from ._validation import check_n_features, check_points, check_seed
from .criteria import CriterionInputs, QuantizationConfig
from .engine import EngineConfig, _sq_distances, assign, lloyd
from .exceptions import ZeroVarianceColumn
from .matrix import DataMatrix, frob_sq, gram


class DescriptionLengthKMeans(ClusterMixin, TransformerMixin, BaseEstimator):
    """Lloyd k-means that drops empty clusters and scores itself by KMCR1/KMCR2.

    Parameters
    ----------
    n_clusters : int
        Requested cluster count. ``n_clusters_`` may end up smaller.
    init : "random" or array of shape (n_clusters, n_features)
        Random distinct data points, or explicit starting centroids.
    max_iter : int
    h : float
        Quantization unit used for ``kmcr2_``.
    random_state : int or None
        ``None`` means seed 0.
    """

    def __init__(self, n_clusters=8, init="random", max_iter=300, h=1.0, random_state=None):
        self.n_clusters = n_clusters
        self.init = init
        self.max_iter = max_iter
        self.h = h
        self.random_state = random_state

    def fit(self, X, y=None):
        data = check_points(X)
        config = EngineConfig(max_iterations=self.max_iter, seed=check_seed(self.random_state))
        if isinstance(self.init, str):
            if self.init != "random":
                raise ValueError(f"init must be 'random' or an array, got {self.init!r}")
            model = lloyd(data, self.n_clusters, config)
        else:
            start = np.asarray(self.init, dtype=np.float64)
            if start.ndim != 2 or start.shape[0] != self.n_clusters:
                raise ValueError("init array must have shape (n_clusters, n_features)")
            model = lloyd(data, self.n_clusters, config, init=DataMatrix(start.T))

        x_sq = frob_sq(data)
        inputs = CriterionInputs(x_sq=x_sq, r_sq=model.residual_sq, n=data.cols, k=self.n_clusters, d=data.rows)
        self.model_ = model
        self.cluster_centers_ = np.array(model.centroids.points)
        self.labels_ = np.array(model.labels)
        self.n_clusters_ = model.k_eff
        self.inertia_ = model.residual_sq
        self.n_iter_ = model.iterations
        self.converged_ = model.converged
        self.n_features_in_ = data.rows
        if x_sq > 0:
            self.kmcr1_ = criteria.kmcr1(inputs)
            self.kmcr2_ = criteria.kmcr2(inputs, QuantizationConfig(self.h))
        else:
            self.kmcr1_ = self.kmcr2_ = np.nan
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        data = check_points(X)
        check_n_features(self, data)
        return assign(data, self.model_.centroids)

    def transform(self, X):
        """Euclidean distance from each sample to each centroid."""
        check_is_fitted(self, "cluster_centers_")
        data = check_points(X)
        check_n_features(self, data)
        return np.sqrt(_sq_distances(data.points, self.cluster_centers_))

    def score(self, X, y=None):
        """Negative sum of squared distances to the nearest centroid."""
        return -float(np.sum(np.min(self.transform(X), axis=1) ** 2))


class KMCRSelector(ClusterMixin, BaseEstimator):
    """Sweep k and keep the clustering that minimizes a compression ratio.

    ``criterion`` picks which selection drives ``labels_`` and
    ``cluster_centers_``; both selections are in ``selected_k_`` and the full
    sweep is in ``report_``.
    """

    def __init__(
        self,
        k_grid=None,
        restarts=10,
        h=1.0,
        criterion="kmcr1",
        stage2=False,
        stage2_grid=None,
        cluster_count="requested",
        max_iter=300,
        random_state=None,
        n_jobs=None,
    ):
        self.k_grid = k_grid
        self.restarts = restarts
        self.h = h
        self.criterion = criterion
        self.stage2 = stage2
        self.stage2_grid = stage2_grid
        self.cluster_count = cluster_count
        self.max_iter = max_iter
        self.random_state = random_state
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        if self.criterion not in ("kmcr1", "kmcr2"):
            raise ValueError(f"criterion must be 'kmcr1' or 'kmcr2', got {self.criterion!r}")
        data = check_points(X)
        stage2 = selection.Stage2Options(
            enabled=bool(self.stage2),
            k2_grid=tuple(self.stage2_grid) if self.stage2_grid is not None else None,
        )
        report, models = selection.sweep(
            data,
            None if self.k_grid is None else list(self.k_grid),
            restarts=self.restarts,
            q=QuantizationConfig(self.h),
            stage2=stage2,
            master_seed=check_seed(self.random_state),
            max_iterations=self.max_iter,
            n_jobs=self.n_jobs,
            cluster_count=self.cluster_count,
            return_models=True,
        )
        values = report.column(self.criterion)
        best = min(range(len(values)), key=lambda i: (values[i], report.points[i].k_requested))
        model = models[best]
        self.report_ = report
        self.selected_k_ = {"kmcr1": report.selected_k_kmcr1, "kmcr2": report.selected_k_kmcr2}
        self.best_model_ = model
        self.cluster_centers_ = np.array(model.centroids.points)
        self.labels_ = np.array(model.labels)
        self.n_clusters_ = model.k_eff
        self.n_features_in_ = data.rows
        return self

    def predict(self, X):
        check_is_fitted(self, "cluster_centers_")
        data = check_points(X)
        check_n_features(self, data)
        return assign(data, self.best_model_.centroids)


class ZScoreGram(TransformerMixin, BaseEstimator):
    """Standardize feature columns (sample std) and return the Gram matrix.

    Input is an observations x features table; the output of ``transform``
    is ``(n_features_kept, n_features_kept)``, ready to be clustered as one
    feature profile per row.
    """

    def __init__(self, drop_constant=False):
        self.drop_constant = drop_constant

    def fit(self, X, y=None):
        data = check_points(X, min_samples=2)
        values = data.points
        mean = values.mean(axis=0)
        std = values.std(axis=0, ddof=1)
        constant = std <= 1e-12 * np.maximum(np.abs(mean), 1.0)
        if np.any(constant) and not self.drop_constant:
            raise ZeroVarianceColumn(int(np.flatnonzero(constant)[0]))
        self.kept_columns_ = np.flatnonzero(~constant)
        self.dropped_columns_ = np.flatnonzero(constant)
        self.mean_ = mean[self.kept_columns_]
        self.scale_ = std[self.kept_columns_]
        self.n_features_in_ = values.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "scale_")
        data = check_points(X)
        check_n_features(self, data)
        Z = (data.points[:, self.kept_columns_] - self.mean_) / self.scale_
        return np.array(gram(DataMatrix(Z)).values)
