"""Input validation helpers shared by the estimators."""

import numbers

import numpy as np
from sklearn.utils import check_array

from adfest.exceptions import DataError


def check_probability(value, name, low=0.0, high=1.0):
    """Validate ``low < value < high`` and return it as a float."""
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise ValueError(f"{name} must be a finite real number, got {value!r}")
    if not low < value < high:
        raise ValueError(f"{name} must lie in ({low}, {high}), got {value}")
    return float(value)


def check_count(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_bivariate(X, exponential=True):
    """Return ``X`` as a float array of shape (n, 2).

    Parameters
    ----------
    X : array-like of shape (n, 2) or BivariateSample
    exponential : bool, default=True
        Require nonnegative values (standard exponential margins).
    """
    from adfest.minproj import BivariateSample

    if isinstance(X, BivariateSample):
        if exponential and X.margin_tag != "exponential":
            raise DataError("sample must be on exponential margins")
        X = X.values
    X = check_array(X, dtype=np.float64, ensure_all_finite=True)
    if X.shape[1] != 2:
        raise DataError(f"expected 2 columns, got {X.shape[1]}")
    if exponential and np.any(X < 0):
        raise DataError("exponential-margin data must be nonnegative")
    return X


def check_rng(seed):
    """Build a numpy Generator from ``seed`` (int, sequence, Generator or None)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
