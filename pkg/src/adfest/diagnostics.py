"""Dependence coefficients, block bootstrap, and QQ diagnostics for fitted ADFs."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from adfest._validation import check_bivariate, check_count, check_probability, check_rng
from adfest.exceptions import DataError
from adfest.minproj import MinProjectionTable, excesses, min_projection

DEFAULT_BLOCK = 40
DEFAULT_N_BOOT = 500
MIN_BOOT = 200


# --------------------------------------------------------------------------
# bootstrap

def block_indices(n, block_size, rng):
    """Indices of one circular block-bootstrap resample of length ``n``."""
    n_blocks = -(-n // block_size)
    starts = rng.integers(0, n, size=n_blocks)
    idx = (starts[:, None] + np.arange(block_size)[None, :]) % n
    return idx.ravel()[:n]


def bootstrap_replicates(data, block_size, n_boot, seed, statistic):
    """Statistic evaluated on ``n_boot`` circular block-bootstrap resamples.

    Parameters
    ----------
    data : ndarray
        Observations in time order; resampling acts on the first axis.
    block_size : int
    n_boot : int
        At least 200.
    seed : int, sequence of int, Generator or None
    statistic : callable
        Maps a resample to an array of fixed shape.

    Returns
    -------
    ndarray of shape (n_boot, ...)
    """
    data = np.asarray(data)
    n = data.shape[0]
    block_size = check_count(block_size, "block_size")
    n_boot = check_count(n_boot, "n_boot", minimum=MIN_BOOT)
    if block_size > n:
        raise ValueError(f"block size {block_size} exceeds the series length {n}")
    rng = check_rng(seed)
    return np.stack([np.asarray(statistic(data[block_indices(n, block_size, rng)]))
                     for _ in range(n_boot)])


def block_bootstrap(data, block_size=DEFAULT_BLOCK, n_boot=DEFAULT_N_BOOT, seed=None,
                    statistic=np.mean, level=0.95):
    """Pointwise percentile interval from a circular block bootstrap.

    Returns
    -------
    lo, hi : ndarray
        Lower and upper ``level`` interval bounds for each statistic output.
    """
    reps = bootstrap_replicates(data, block_size, n_boot, seed, statistic)
    tail = (1.0 - level) / 2.0
    lo, hi = np.quantile(reps, [tail, 1.0 - tail], axis=0)
    return lo, hi


# --------------------------------------------------------------------------
# chi and eta

def _rank_exponential(X):
    n = X.shape[0]
    return -np.log1p(-rankdata(X, axis=0) / (n + 1))


def _chi(X, q):
    xq = np.quantile(X[:, 0], q)
    yq = np.quantile(X[:, 1], q)
    above = X[:, 0] > xq
    n_above = above.sum()
    if n_above == 0:
        return 0.0
    return float(np.sum(above & (X[:, 1] > yq)) / n_above)


def _eta(X, q):
    # eta from the Hill estimate on the diagonal ray, rank-based margins
    t = min_projection(_rank_exponential(X), 0.5)
    _, exc = excesses(t, q)
    return float(exc.mean() / 2.0)


@dataclass(frozen=True)
class ChiEta:
    """Empirical ``chi_q`` and ``eta`` with optional bootstrap bands."""

    chi: float
    eta: float
    q: float
    chi_band: tuple = None
    eta_band: tuple = None
    no_joint_exceedances: bool = False

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def chi_eta(sample, q=0.9, n_boot=None, block_size=DEFAULT_BLOCK, seed=None):
    """Estimate ``chi_q`` and the coefficient of tail dependence ``eta``.

    ``chi_q`` is the empirical conditional exceedance ratio at the marginal
    ``q`` quantiles; ``eta`` is ``1 / (2 lambda_H(0.5))`` computed on
    rank-transformed exponential margins.

    Parameters
    ----------
    sample : array-like of shape (n, 2)
        Data on any margins.
    q : float, default=0.9
    n_boot : int, optional
        Number of block-bootstrap resamples for 95% bands; no bands if None.
    block_size : int, default=40
    seed : optional

    Returns
    -------
    ChiEta
    """
    q = check_probability(q, "q")
    X = check_bivariate(sample, exponential=False)
    chi = _chi(X, q)
    eta = _eta(X, q)
    xq, yq = np.quantile(X[:, 0], q), np.quantile(X[:, 1], q)
    flag = not np.any((X[:, 0] > xq) & (X[:, 1] > yq))
    bands = {}
    if n_boot is not None:
        lo, hi = block_bootstrap(X, block_size, n_boot, seed,
                                 lambda Z: np.array([_chi(Z, q), _eta(Z, q)]))
        bands = {"chi_band": (float(lo[0]), float(hi[0])),
                 "eta_band": (float(lo[1]), float(hi[1]))}
    return ChiEta(chi=chi, eta=eta, q=q, no_joint_exceedances=flag, **bands)


# --------------------------------------------------------------------------
# QQ diagnostics

def exponential_plotting_positions(n):
    """Standard exponential quantiles at ``j / (n + 1)``, ``j = 1..n``."""
    return -np.log1p(-np.arange(1, n + 1) / (n + 1))


@dataclass(frozen=True)
class QqReport:
    """QQ pairs with pointwise bootstrap bands for one ray or the global check.

    Attributes
    ----------
    ray : float or "global"
    model_q, empirical_q, lo95, hi95 : ndarray
        Sorted by ``model_q``.
    meta : dict
        Settings (q, block size, number of resamples, seed).
    """

    ray: object
    model_q: np.ndarray
    empirical_q: np.ndarray
    lo95: np.ndarray
    hi95: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def inside(self):
        """Whether each model quantile lies within the bootstrap band."""
        return (self.model_q >= self.lo95) & (self.model_q <= self.hi95)

    @property
    def fraction_inside(self):
        return float(self.inside.mean())

    def to_csv(self, path):
        rows = ["model_q,empirical_q,lo95,hi95"]
        rows += [f"{a:.10g},{b:.10g},{c:.10g},{d:.10g}" for a, b, c, d in
                 zip(self.model_q, self.empirical_q, self.lo95, self.hi95)]
        Path(path).write_text("\n".join(rows) + "\n")

    def metadata(self):
        return dict(self.meta, ray=self.ray, n_points=int(self.model_q.size),
                    fraction_inside=self.fraction_inside)

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.metadata(), indent=1, sort_keys=True) + "\n")


def _ray_index(grid, w):
    i = int(np.argmin(np.abs(grid - w)))
    if not np.isclose(grid[i], w, rtol=0, atol=1e-12):
        raise ValueError(f"ray {w} is not on the curve grid")
    return i


def _qq_from_values(values, rate, block_size, n_boot, seed):
    """QQ pairs of Exp(rate) quantiles against sorted ``values`` with bands."""
    n = values.size
    model_q = exponential_plotting_positions(n) / rate
    empirical = np.sort(values)
    lo, hi = block_bootstrap(values, min(block_size, n), n_boot, seed, np.sort)
    return model_q, empirical, lo, hi


def local_qq(sample, adf, w, q=0.9, n_boot=DEFAULT_N_BOOT, block_size=DEFAULT_BLOCK, seed=None):
    """Exponential QQ check of the min-projection excesses at one ray.

    Model quantiles ``-log(1 - j / (n_w + 1)) / lambda(w)`` are paired with the
    ordered excesses; bands come from a block bootstrap of the excesses in time
    order.

    Parameters
    ----------
    sample : array-like of shape (n, 2)
        Exponential-margin data in time order.
    adf : AdfCurve
    w : float
        A ray of ``adf.grid``.
    q : float, default=0.9
    n_boot : int, default=500
    block_size : int, default=40
    seed : optional

    Returns
    -------
    QqReport
    """
    X = check_bivariate(sample)
    i = _ray_index(adf.grid, w)
    ray = float(adf.grid[i])
    _, exc = excesses(min_projection(X, ray), q)
    lam = float(adf.values[i])
    model_q, empirical, lo, hi = _qq_from_values(exc, lam, block_size, n_boot, seed)
    meta = {"q": q, "block_size": block_size, "n_boot": n_boot, "seed": seed, "lambda": lam}
    return QqReport(ray=ray, model_q=model_q, empirical_q=empirical, lo95=lo, hi95=hi, meta=meta)


def _nearest_ray(grid, w):
    j = np.clip(np.searchsorted(grid, w), 1, grid.size - 1)
    left, right = grid[j - 1], grid[j]
    return np.where(w - left <= right - w, j - 1, j)


def global_standardised_exceedances(sample, adf, q=0.9, seed=0, table=None):
    """One standardised exceedance per observation, in observation order.

    Each observation is assigned the grid ray nearest its angle
    ``x / (x + y)``; a raw exceedance ``t > u_w`` of that ray's min-projection
    is drawn uniformly and scaled to ``lambda(w) (t - u_w)``, which is Exp(1)
    under the fitted model.
    """
    X = check_bivariate(sample)
    table = table or MinProjectionTable(X, adf.grid)
    if not np.array_equal(table.grid, adf.grid):
        raise ValueError("table and curve grids differ")
    rng = check_rng(seed)
    total = X.sum(axis=1)
    angle = np.divide(X[:, 0], total, out=np.full(X.shape[0], 0.5), where=total > 0)
    ray_idx = _nearest_ray(adf.grid, angle)
    u, counts, _ = table.exceedance_stats(q)
    if np.any(counts[ray_idx] == 0):
        raise DataError("no exceedances at some ray")
    first = table.n - counts[ray_idx]
    pick = first + np.floor(rng.random(ray_idx.size) * counts[ray_idx]).astype(int)
    t_star = table.sorted[ray_idx, pick]
    return adf.values[ray_idx] * (t_star - u[ray_idx])


def global_qq(sample, adf, q=0.9, seed=0, n_boot=DEFAULT_N_BOOT, block_size=DEFAULT_BLOCK,
              table=None):
    """Global exponential QQ check pooling all angles.

    Deterministic given ``seed``; different seeds give different random
    exceedance draws, so several seeds should be inspected.

    Returns
    -------
    QqReport
    """
    e = global_standardised_exceedances(sample, adf, q, seed, table)
    rng = check_rng([seed, 1]) if isinstance(seed, (int, np.integer)) else check_rng(seed)
    model_q, empirical, lo, hi = _qq_from_values(e, 1.0, block_size, n_boot, rng)
    meta = {"q": q, "block_size": block_size, "n_boot": n_boot, "seed": seed}
    return QqReport(ray="global", model_q=model_q, empirical_q=empirical, lo95=lo, hi95=hi,
                    meta=meta)
