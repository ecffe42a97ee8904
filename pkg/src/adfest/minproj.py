"""Min-projections of bivariate exponential-margin data along angular rays.

For a ray ``w`` in [0, 1] the min-projection is ``T_w = min(X / w, Y / (1 - w))``
with the limits ``T_0 = Y`` and ``T_1 = X``. Threshold excesses of ``T_w`` are
approximately exponential with rate ``lambda(w)``.
"""

from dataclasses import dataclass

import numpy as np

from adfest._validation import check_probability
from adfest.exceptions import DataError

DEFAULT_N_RAYS = 1001


@dataclass(frozen=True)
class BivariateSample:
    """Paired observations tagged with the scale of their margins.

    Parameters
    ----------
    x, y : ndarray of shape (n,)
    margin_tag : {"original", "exponential"}
    """

    x: np.ndarray
    y: np.ndarray
    margin_tag: str = "exponential"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 1:
            raise DataError("x and y must be non-empty vectors of equal length")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("sample contains non-finite values")
        if self.margin_tag not in ("original", "exponential"):
            raise ValueError(f"unknown margin_tag {self.margin_tag!r}")
        if self.margin_tag == "exponential" and (np.any(x < 0) or np.any(y < 0)):
            raise DataError("exponential-margin sample must be nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def values(self):
        return np.column_stack([self.x, self.y])

    def __len__(self):
        return self.x.size


def angular_grid(n_rays=DEFAULT_N_RAYS):
    """Equally spaced rays ``i / (n_rays - 1)``; ``n_rays`` must be odd."""
    if n_rays < 3 or n_rays % 2 == 0:
        raise ValueError(f"n_rays must be odd and >= 3, got {n_rays}")
    return np.arange(n_rays) / (n_rays - 1)


def check_grid(grid):
    """Validate an angular grid: sorted, odd length, containing 0, 0.5 and 1."""
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3 or grid.size % 2 == 0:
        raise ValueError("grid must be a vector with an odd number (>= 3) of rays")
    if grid[0] != 0.0 or grid[-1] != 1.0:
        raise ValueError("grid must start at 0 and end at 1")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing")
    if grid[grid.size // 2] != 0.5:
        raise ValueError("grid must have 0.5 as its middle ray")
    return grid


def min_projection(X, w):
    """Min-projection ``min(x / w, y / (1 - w))`` of each row of ``X``.

    Parameters
    ----------
    X : ndarray of shape (n, 2)
        Data on standard exponential margins.
    w : float
        Ray in [0, 1].

    Returns
    -------
    ndarray of shape (n,)
    """
    X = np.asarray(X, dtype=float)
    if not 0.0 <= w <= 1.0:
        raise ValueError(f"ray must lie in [0, 1], got {w}")
    if w == 0.0:
        return X[:, 1].copy()
    if w == 1.0:
        return X[:, 0].copy()
    return np.minimum(X[:, 0] / w, X[:, 1] / (1.0 - w))


def empirical_quantile(t, q):
    """Linearly interpolated empirical quantile (order-statistic interpolation)."""
    return float(np.quantile(np.asarray(t, dtype=float), q))


def excesses(t, q):
    """Threshold at the empirical ``q`` quantile and the positive excesses above it.

    Returns
    -------
    u : float
    excess : ndarray
        ``t_i - u`` for every ``t_i > u``, in the original order of ``t``.
    """
    q = check_probability(q, "q")
    t = np.asarray(t, dtype=float)
    if t.size == 0:
        raise DataError("empty min-projection")
    u = empirical_quantile(t, q)
    exc = t[t > u] - u
    if exc.size == 0:
        raise DataError("no exceedances")
    return u, exc


def _sorted_quantiles(sorted_rows, q):
    """Quantile ``q`` of each row of a row-sorted matrix, numpy 'linear' method."""
    n = sorted_rows.shape[-1]
    h = (n - 1) * q
    lo = int(np.floor(h))
    hi = min(lo + 1, n - 1)
    frac = h - lo
    a = sorted_rows[..., lo]
    b = sorted_rows[..., hi]
    return a + frac * (b - a)


class MinProjectionTable:
    """Sorted min-projections of one sample at every ray of a grid.

    Building the table once lets several estimators share the O(n m) work.

    Parameters
    ----------
    X : ndarray of shape (n, 2)
        Exponential-margin data, kept as ``X``.
    grid : ndarray of shape (m,)
    """

    def __init__(self, X, grid):
        X = np.asarray(X, dtype=float)
        self.X = X
        self.grid = np.asarray(grid, dtype=float)
        self.n = X.shape[0]
        w = self.grid[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.minimum(X[None, :, 0] / w, X[None, :, 1] / (1.0 - w))
        t[self.grid == 0.0] = X[:, 1]
        t[self.grid == 1.0] = X[:, 0]
        t.sort(axis=1)
        self.sorted = t

    def quantile(self, q):
        """Empirical ``q`` quantile of ``T_w`` for every ray."""
        return _sorted_quantiles(self.sorted, q)

    def exceedance_stats(self, q):
        """Threshold, exceedance count and excess sum per ray.

        Returns
        -------
        u, counts, sums : ndarray of shape (m,)
        """
        u = self.quantile(q)
        above = self.sorted > u[:, None]
        counts = above.sum(axis=1)
        sums = np.where(above, self.sorted - u[:, None], 0.0).sum(axis=1)
        return u, counts, sums

    def exceedances(self, index, q):
        """Raw exceedances ``t > u_w`` (sorted) and ``u_w`` at one ray index."""
        row = self.sorted[index]
        u = float(_sorted_quantiles(row, q))
        return u, row[row > u]
