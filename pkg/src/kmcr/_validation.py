"""Input checks shared by the estimators."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

from .matrix import DataMatrix


def check_points(X, min_samples=1):
    """Validate an ``(n_samples, n_features)`` array and wrap it as a DataMatrix."""
    arr = check_array(X, dtype=np.float64, ensure_min_samples=min_samples, ensure_all_finite=True)
    return DataMatrix(arr.T)


def check_seed(random_state):
    # None means the fixed default; randomness never comes from the environment
    if random_state is None:
        return 0
    if isinstance(random_state, numbers.Integral) and random_state >= 0:
        return int(random_state)
    raise ValueError(f"random_state must be a non-negative int or None, got {random_state!r}")


def check_n_features(estimator, X: DataMatrix):
    if X.rows != estimator.n_features_in_:
        raise ValueError(
            f"X has {X.rows} features, but {type(estimator).__name__} "
            f"was fitted with {estimator.n_features_in_} features"
        )
