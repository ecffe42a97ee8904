"""Semi-parametric marginal models: empirical body, generalized Pareto tail.

The body CDF is the inverse of the linearly interpolated empirical quantile
function, so it is continuous, equals 0 at the sample minimum and equals the
threshold probability at the threshold. Above the threshold a generalized
Pareto distribution (GPD) is used.
"""

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import minimize_scalar
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from adfest._validation import check_count, check_probability
from adfest.exceptions import DataError

XI_BOUNDS = (-0.5, 1.0)
XI_ZERO = 1e-8
MIN_EXCESSES = 10
MIN_DATA = 100


def gpd_negloglik(sigma, xi, excess):
    """Negative GPD log-likelihood; ``inf`` outside the support."""
    if sigma <= 0:
        return np.inf
    z = excess / sigma
    if abs(xi) < XI_ZERO:
        return excess.size * np.log(sigma) + z.sum()
    arg = xi * z
    if np.any(arg <= -1):
        return np.inf
    return excess.size * np.log(sigma) + (1.0 + 1.0 / xi) * np.log1p(arg).sum()


def _profile_sigma(xi, excess):
    """Maximise the likelihood over sigma at fixed xi; returns (nll, sigma)."""
    mean = excess.mean()
    if abs(xi) < XI_ZERO:
        return gpd_negloglik(mean, 0.0, excess), mean
    lo = np.log(max(-xi * excess.max(), 0.0) * (1 + 1e-12) + 1e-300)
    lo = max(lo, np.log(mean) - 12.0)
    hi = np.log(mean) + 8.0

    def f(log_sigma):
        return gpd_negloglik(np.exp(log_sigma), xi, excess)

    res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12, "maxiter": 500})
    return res.fun, float(np.exp(res.x))


def fit_gpd(excesses):
    """Maximum-likelihood GPD fit to threshold excesses.

    The shape is profiled over ``xi`` in [-0.5, 1]: a coarse grid locates the
    best bracket, then a bounded scalar search refines it.

    Parameters
    ----------
    excesses : array-like
        Strictly positive excesses over a threshold.

    Returns
    -------
    sigma, xi : float
    """
    x = np.asarray(excesses, dtype=float).ravel()
    if not np.all(np.isfinite(x)):
        raise DataError("excesses must be finite")
    if x.size < MIN_EXCESSES:
        raise DataError("insufficient tail data")
    if np.any(x <= 0):
        raise DataError("excesses must be strictly positive")
    if np.ptp(x) <= 1e-12 * x.mean():
        raise DataError("zero-variance excesses")

    # rescale so the optimiser works near unit scale; MLE is scale-equivariant
    scale = x.mean()
    z = x / scale
    xi_grid = np.linspace(*XI_BOUNDS, 61)
    prof = np.array([_profile_sigma(xi, z)[0] for xi in xi_grid])
    j = int(np.argmin(prof))
    a = xi_grid[max(j - 1, 0)]
    b = xi_grid[min(j + 1, xi_grid.size - 1)]
    res = minimize_scalar(lambda xi: _profile_sigma(xi, z)[0], bounds=(a, b),
                          method="bounded", options={"xatol": 1e-10, "maxiter": 500})
    xi = float(res.x) if res.fun <= prof[j] else float(xi_grid[j])
    _, sigma = _profile_sigma(xi, z)
    return sigma * scale, xi


def gpd_quantile(p, sigma, xi):
    """Excess quantile of the GPD at non-exceedance probability ``p``."""
    p = np.asarray(p, dtype=float)
    if abs(xi) < XI_ZERO:
        return -sigma * np.log1p(-p)
    return sigma / xi * np.expm1(-xi * np.log1p(-p))


@dataclass(frozen=True)
class MarginalModel:
    """Fitted semi-parametric marginal distribution.

    Attributes
    ----------
    sorted_sample : ndarray
        Observations in increasing order (original units).
    q_u : float
        Threshold non-exceedance probability.
    u : float
        Empirical ``q_u`` quantile of the sample.
    sigma, xi : float
        GPD scale and shape above ``u``.
    """

    sorted_sample: np.ndarray
    q_u: float
    u: float
    sigma: float
    xi: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        arr = np.array(self.sorted_sample, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "sorted_sample", arr)

    @property
    def upper_endpoint(self):
        return self.u - self.sigma / self.xi if self.xi < -XI_ZERO else np.inf

    @cached_property
    def _body_knots(self):
        # knots of the inverse of numpy's linear quantile function, ties averaged
        xs = self.sorted_sample
        probs = np.arange(xs.size) / (xs.size - 1)
        uniq, inv = np.unique(xs, return_inverse=True)
        avg = np.bincount(inv, weights=probs) / np.bincount(inv)
        return uniq, avg

    def cdf(self, x):
        """Semi-parametric CDF."""
        x = np.asarray(x, dtype=float)
        return -np.expm1(-self.to_exponential(x))

    def to_exponential(self, x):
        """Transform values to standard exponential margins, ``-log(1 - F(x))``."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DataError("values must be finite")
        e_u = -np.log1p(-self.q_u)
        out = np.empty_like(x)
        body = x <= self.u
        if np.any(body):
            xs, ps = self._body_knots
            f = np.interp(x[body], xs, ps)
            out[body] = -np.log1p(-np.minimum(f, self.q_u))
        tail = ~body
        if np.any(tail):
            z = x[tail]
            end = self.upper_endpoint
            if np.any(z >= end):
                warnings.warn("values beyond the GPD upper endpoint were clamped",
                              RuntimeWarning, stacklevel=2)
                z = np.minimum(z, end - np.finfo(float).eps * 4 * abs(end))
            d = (z - self.u) / self.sigma
            if abs(self.xi) < XI_ZERO:
                out[tail] = e_u + d
            else:
                out[tail] = e_u + np.log1p(self.xi * d) / self.xi
        return out if out.ndim else float(out)

    def from_exponential(self, e):
        """Inverse of :meth:`to_exponential`."""
        e = np.asarray(e, dtype=float)
        if not np.all(np.isfinite(e)):
            raise DataError("values must be finite")
        if np.any(e < 0):
            raise ValueError("exponential values must be nonnegative")
        e_u = -np.log1p(-self.q_u)
        out = np.empty_like(e)
        body = e <= e_u
        if np.any(body):
            p = np.minimum(-np.expm1(-e[body]), self.q_u)
            out[body] = np.quantile(self.sorted_sample, p)
        tail = ~body
        if np.any(tail):
            d = e[tail] - e_u
            if abs(self.xi) < XI_ZERO:
                out[tail] = self.u + self.sigma * d
            else:
                out[tail] = self.u + self.sigma * np.expm1(self.xi * d) / self.xi
        return out if out.ndim else float(out)

    def to_dict(self):
        return {"q_u": self.q_u, "u": self.u, "sigma": self.sigma, "xi": self.xi,
                "n": int(self.sorted_sample.size)}


def fit_marginal(data, q_u=0.95):
    """Fit the semi-parametric marginal model at threshold probability ``q_u``."""
    data = np.asarray(data, dtype=float).ravel()
    if not np.all(np.isfinite(data)):
        raise DataError("data must be finite")
    if data.size < MIN_DATA:
        raise DataError(f"need at least {MIN_DATA} observations, got {data.size}")
    q_u = check_probability(q_u, "q_u", low=0.5)
    xs = np.sort(data)
    u = float(np.quantile(xs, q_u))
    sigma, xi = fit_gpd(xs[xs > u] - u)
    return MarginalModel(sorted_sample=xs, q_u=q_u, u=u, sigma=sigma, xi=xi)


def gpd_qq(model, excess_in_time_order=None, n_boot=500, block_size=40, seed=None):
    """QQ data for the GPD tail with block-bootstrap bands.

    Parameters
    ----------
    model : MarginalModel
    excess_in_time_order : array-like, optional
        Threshold exceedances (original units) in time order; block resampling
        needs the temporal ordering. Defaults to the sorted exceedances.
    n_boot : int
    block_size : int
    seed : int, optional

    Returns
    -------
    ndarray of shape (n_exc, 4)
        Columns ``model_q, empirical_q, lo95, hi95`` in original units.
    """
    from adfest.diagnostics import block_bootstrap

    n_boot = check_count(n_boot, "n_boot", minimum=200)
    if excess_in_time_order is None:
        exc = model.sorted_sample[model.sorted_sample > model.u]
    else:
        exc = np.asarray(excess_in_time_order, dtype=float)
    n_exc = exc.size
    probs = np.arange(1, n_exc + 1) / (n_exc + 1)
    model_q = model.u + gpd_quantile(probs, model.sigma, model.xi)
    empirical = np.sort(exc)
    lo, hi = block_bootstrap(exc, min(block_size, n_exc), n_boot, seed, np.sort)
    return np.column_stack([model_q, empirical, lo, hi])


class SemiParametricMargins(TransformerMixin, BaseEstimator):
    """Transform paired data to standard exponential margins and back.

    Parameters
    ----------
    q_u : float, default=0.95
        Threshold non-exceedance probability for the GPD tails.

    Attributes
    ----------
    models_ : list of MarginalModel
        One fitted model per column.
    n_features_in_ : int
    """

    def __init__(self, q_u=0.95):
        self.q_u = q_u

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        self.models_ = [fit_marginal(X[:, j], self.q_u) for j in range(X.shape[1])]
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "models_")
        X = check_array(X, dtype=np.float64)
        return np.column_stack([m.to_exponential(X[:, j]) for j, m in enumerate(self.models_)])

    def inverse_transform(self, X):
        check_is_fitted(self, "models_")
        X = check_array(X, dtype=np.float64)
        return np.column_stack([m.from_exponential(X[:, j]) for j, m in enumerate(self.models_)])
