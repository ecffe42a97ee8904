"""ADF estimators: pointwise Hill, Bernstein-family fits and combined variants.

Every estimator works from min-projections on a fixed angular grid. The
global estimators model the ADF as an anchored Bernstein polynomial with
nonnegative coefficients, fitted either by a composite likelihood (all rays
treated as independent exponential samples) or by matching tail probability
ratios at pairs of quantile levels. The combined variants use conditional
extremes fits to locate the rays where the ADF sits on its lower bound and
estimate only in between.
"""

import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize, nnls
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from adfest._validation import check_bivariate, check_count, check_probability, check_rng
from adfest.adf import (AdfCurve, BernsteinCoefficients, anchored_design, eval_bstar,
                        eval_btilde, lower_bound, postprocess)
from adfest.exceptions import ConvergenceError, DataError
from adfest.minproj import DEFAULT_N_RAYS, MinProjectionTable, _sorted_quantiles, angular_grid

DEFAULT_Q = 0.90
DEFAULT_K = 7
DEFAULT_Q_COND = 0.90
# fitted coefficients this close in objective count as tied
TIE_RTOL = 1e-9


# --------------------------------------------------------------------------
# shared plumbing

def as_table(sample, grid=None):
    """Return a :class:`MinProjectionTable` for ``sample`` on ``grid``.

    ``sample`` may already be a table, in which case it is reused as long as
    its grid matches.
    """
    if isinstance(sample, MinProjectionTable):
        if grid is not None and not np.array_equal(np.asarray(grid, dtype=float), sample.grid):
            raise ValueError("table grid does not match the requested grid")
        return sample
    X = check_bivariate(sample)
    grid = angular_grid() if grid is None else np.asarray(grid, dtype=float)
    return MinProjectionTable(X, grid)


def _ray_stats(table, q, index=None):
    u, counts, sums = table.exceedance_stats(q)
    if index is not None:
        u, counts, sums = u[index], counts[index], sums[index]
    if np.any(counts == 0):
        raise DataError("no exceedances at some ray")
    return u, counts.astype(float), sums


def _fit_indices(grid, stride, lo=0.0, hi=1.0, min_rays=1):
    """Indices of grid rays in [lo, hi] used for fitting, thinned by ``stride``.

    Thinning keeps both interval ends; it is skipped when it would leave fewer
    than ``min_rays`` rays.
    """
    inside = np.flatnonzero((grid >= lo) & (grid <= hi))
    if inside.size == 0:
        return inside
    thinned = inside[::stride]
    if thinned[-1] != inside[-1]:
        thinned = np.append(thinned, inside[-1])
    return thinned if thinned.size >= min_rays else inside


def _design(rays, k, domain):
    if domain is None:
        return anchored_design(rays, k)
    lo, hi = domain
    return anchored_design((rays - lo) / (hi - lo), k, left=1.0 - lo, right=hi)


def _coefficients_curve(coef, grid, name, params):
    if coef.domain is None:
        values = eval_bstar(coef, grid)
    else:
        values = _restricted_values(coef, grid)
    params = dict(params, coef=coef.to_dict())
    return AdfCurve(grid=grid, values=values, estimator=name, params=params)


def _restricted_values(coef, grid):
    lo, hi = coef.domain
    values = lower_bound(grid)
    inside = (grid >= lo) & (grid <= hi)
    values[inside] = eval_btilde(coef, grid[inside])
    return values


def _hill_projection(rays, hill, k, domain):
    """Nonnegative least-squares projection of Hill values onto the family."""
    offset, design = _design(rays, k, domain)
    beta, _ = nnls(design, hill - offset)
    return beta


def _pick_best(candidates):
    """Lowest objective; near-ties resolved by smallest coefficient norm."""
    finite = [(f, b) for f, b in candidates if np.isfinite(f)]
    if not finite:
        return None
    f_min = min(f for f, _ in finite)
    tied = [(f, b) for f, b in finite if f <= f_min + TIE_RTOL * max(abs(f_min), 1.0)]
    return min(tied, key=lambda fb: (np.linalg.norm(fb[1]), fb[0]))


# --------------------------------------------------------------------------
# Hill

def hill_adf(sample, grid=None, q=DEFAULT_Q):
    """Pointwise Hill estimate: reciprocal mean excess at every ray.

    Parameters
    ----------
    sample : array-like of shape (n, 2), BivariateSample or MinProjectionTable
        Data on standard exponential margins.
    grid : ndarray, optional
        Angular grid; defaults to 1001 equally spaced rays.
    q : float, default=0.90
        Threshold quantile level of each min-projection.

    Returns
    -------
    AdfCurve
        Raw (unprocessed) estimate.
    """
    q = check_probability(q, "q")
    table = as_table(sample, grid)
    _, counts, sums = _ray_stats(table, q)
    return AdfCurve(grid=table.grid, values=counts / sums, estimator="hill", params={"q": q})


# --------------------------------------------------------------------------
# composite likelihood

def cl_objective(beta, offset, design, counts, sums):
    """Normalised negative composite log-likelihood and its gradient.

    Each ray contributes ``S_w lambda_w - n_w log lambda_w``, where ``n_w`` and
    ``S_w`` are the exceedance count and excess sum at that ray.
    """
    lam = offset + design @ beta
    if np.any(lam <= 0):
        return np.inf, np.zeros_like(beta)
    total = counts.sum()
    f = (sums @ lam - counts @ np.log(lam)) / total
    grad = design.T @ (sums - counts / lam) / total
    return f, grad


def fit_cl_stats(rays, counts, sums, k=DEFAULT_K, domain=None, starts=None):
    """Composite-likelihood Bernstein fit from per-ray sufficient statistics.

    The objective is convex in the coefficients (the ADF is linear in them), so
    a bounded quasi-Newton solve from a couple of starts finds the optimum.

    Returns
    -------
    BernsteinCoefficients
    float
        Objective value at the optimum.
    """
    k = check_count(k, "k", minimum=3)
    rays = np.asarray(rays, dtype=float)
    offset, design = _design(rays, k, domain)
    if starts is None:
        starts = [np.ones(k - 1), _hill_projection(rays, counts / sums, k, domain)]
    bounds = [(0.0, None)] * (k - 1)
    candidates = []
    for x0 in starts:
        res = minimize(cl_objective, np.asarray(x0, dtype=float), jac=True,
                       args=(offset, design, counts, sums), method="L-BFGS-B",
                       bounds=bounds, options={"ftol": 1e-15, "gtol": 1e-10, "maxiter": 2000})
        if np.all(np.isfinite(res.x)):
            beta = np.maximum(res.x, 0.0)
            candidates.append((cl_objective(beta, offset, design, counts, sums)[0], beta))
    best = _pick_best(candidates)
    if best is None:
        raise ConvergenceError("composite-likelihood fit failed from every start",
                               best=candidates[0][1] if candidates else None)
    return BernsteinCoefficients(best[1], domain=domain), best[0]


def fit_composite_likelihood(sample, grid=None, q=DEFAULT_Q, k=DEFAULT_K, fit_stride=1,
                             fit_rays=None):
    """Global Bernstein ADF fitted by composite likelihood.

    Parameters
    ----------
    sample : array-like, BivariateSample or MinProjectionTable
        Exponential-margin data.
    grid : ndarray, optional
        Evaluation grid (default 1001 rays).
    q : float, default=0.90
    k : int, default=7
        Polynomial degree.
    fit_stride : int, default=1
        Use every ``fit_stride``-th grid ray in the objective.
    fit_rays : array-like, optional
        Explicit rays to fit on instead of the (thinned) grid.

    Returns
    -------
    coef : BernsteinCoefficients
    curve : AdfCurve
        Raw estimate on the grid.
    """
    q = check_probability(q, "q")
    table = as_table(sample, grid)
    if fit_rays is not None:
        rays = np.atleast_1d(np.asarray(fit_rays, dtype=float))
        _, counts, sums = _ray_stats(MinProjectionTable(table.X, rays), q)
    else:
        idx = _fit_indices(table.grid, check_count(fit_stride, "fit_stride"))
        rays = table.grid[idx]
        _, counts, sums = _ray_stats(table, q, idx)
    coef, value = fit_cl_stats(rays, counts, sums, k)
    curve = _coefficients_curve(coef, table.grid, "cl",
                                {"q": q, "k": coef.k, "objective": value})
    return coef, curve


# --------------------------------------------------------------------------
# probability ratio

@dataclass(frozen=True)
class QuantilePairGrid:
    """Pairs ``(q_j, p_j)`` of quantile levels with ``q_j < p_j < 1``."""

    pairs: tuple

    def __post_init__(self):
        pairs = tuple((float(a), float(b)) for a, b in self.pairs)
        if not pairs:
            raise ValueError("pair grid is empty")
        for a, b in pairs:
            if not 0.0 < a < b < 1.0:
                raise ValueError(f"each pair needs 0 < q < p < 1, got ({a}, {b})")
        qs = [a for a, _ in pairs]
        if any(b <= a for a, b in zip(qs, qs[1:])):
            raise ValueError("lower levels must be strictly increasing")
        object.__setattr__(self, "pairs", pairs)

    @classmethod
    def default(cls, h=31, start=0.87, step=0.002, gap=0.05):
        qs = start + step * np.arange(h)
        return cls(tuple(zip(qs, qs + gap)))

    @property
    def lower(self):
        return np.array([a for a, _ in self.pairs])

    @property
    def upper(self):
        return np.array([b for _, b in self.pairs])

    @property
    def target(self):
        """Ratios ``(1 - p_j) / (1 - q_j)``."""
        return (1.0 - self.upper) / (1.0 - self.lower)

    def to_list(self):
        return [list(p) for p in self.pairs]


def _quantile_gaps(sorted_rows, pair_grid):
    """Gaps ``v_{w,j} - u_{w,j}`` between the empirical p_j and q_j quantiles."""
    u = np.column_stack([_sorted_quantiles(sorted_rows, a) for a in pair_grid.lower])
    v = np.column_stack([_sorted_quantiles(sorted_rows, b) for b in pair_grid.upper])
    return v - u


def pr_objective(beta, offset, design, gaps, target):
    """Sum of absolute deviations between target and model survival ratios."""
    lam = offset + design @ beta
    return np.abs(target[None, :] - np.exp(-lam[:, None] * gaps)).sum()


def fit_pr_gaps(rays, gaps, target, k=DEFAULT_K, domain=None, hill=None, maxiter=None):
    """Probability-ratio Bernstein fit from per-ray quantile gaps.

    The coefficients are searched as ``beta = exp(theta)`` with a simplex
    method, from the independence start and a projection of the Hill curve.
    """
    k = check_count(k, "k", minimum=3)
    rays = np.asarray(rays, dtype=float)
    offset, design = _design(rays, k, domain)
    if np.any(gaps <= 0):
        raise DataError("tied quantiles make a probability ratio undefined")
    starts = [np.ones(k - 1)]
    if hill is not None:
        starts.append(_hill_projection(rays, hill, k, domain))
    maxiter = maxiter or 600 * (k - 1)

    def f(theta):
        return pr_objective(np.exp(theta), offset, design, gaps, target)

    candidates = []
    for x0 in starts:
        theta0 = np.log(np.maximum(x0, 1e-6))
        res = minimize(f, theta0, method="Nelder-Mead",
                       options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": maxiter,
                                "maxfev": 2 * maxiter, "adaptive": True})
        # one restart from the end point guards against simplex collapse
        res = minimize(f, res.x, method="Nelder-Mead",
                       options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": maxiter,
                                "maxfev": 2 * maxiter, "adaptive": True})
        candidates.append((float(res.fun), np.exp(res.x)))
    best = _pick_best(candidates)
    if best is None:
        raise ConvergenceError("probability-ratio fit failed from every start",
                               best=candidates[0][1])
    return BernsteinCoefficients(best[1], domain=domain), best[0]


def fit_probability_ratio(sample, grid=None, pair_grid=None, k=DEFAULT_K, fit_stride=20,
                          fit_rays=None, q_hill=DEFAULT_Q):
    """Global Bernstein ADF fitted by matching tail probability ratios.

    Parameters
    ----------
    sample : array-like, BivariateSample or MinProjectionTable
    grid : ndarray, optional
    pair_grid : QuantilePairGrid, optional
        Defaults to 31 pairs ``q_j = 0.87 + 0.002 (j - 1)``, ``p_j = q_j + 0.05``.
    k : int, default=7
    fit_stride : int, default=20
    fit_rays : array-like, optional
    q_hill : float, default=0.90
        Threshold of the Hill curve used to seed one of the starts.

    Returns
    -------
    coef : BernsteinCoefficients
    curve : AdfCurve
    """
    pair_grid = pair_grid or QuantilePairGrid.default()
    table = as_table(sample, grid)
    if fit_rays is not None:
        rays = np.atleast_1d(np.asarray(fit_rays, dtype=float))
        sub = MinProjectionTable(table.X, rays)
        sorted_rows = sub.sorted
        _, counts, sums = _ray_stats(sub, q_hill)
    else:
        idx = _fit_indices(table.grid, check_count(fit_stride, "fit_stride"))
        rays = table.grid[idx]
        sorted_rows = table.sorted[idx]
        _, counts, sums = _ray_stats(table, q_hill, idx)
    gaps = _quantile_gaps(sorted_rows, pair_grid)
    coef, value = fit_pr_gaps(rays, gaps, pair_grid.target, k, hill=counts / sums)
    curve = _coefficients_curve(coef, table.grid, "pr",
                                {"k": coef.k, "pairs": pair_grid.to_list(), "objective": value})
    return coef, curve


# --------------------------------------------------------------------------
# conditional extremes

@dataclass(frozen=True)
class CondExtFit:
    """Conditional extremes fits in both directions and the derived rays.

    ``alpha_star_lo`` and ``alpha_star_hi`` bound the rays where the ADF can
    exceed its lower bound.
    """

    alpha_y_given_x: float
    beta_y_given_x: float
    mu_y_given_x: float
    sigma_y_given_x: float
    alpha_x_given_y: float
    beta_x_given_y: float
    mu_x_given_y: float
    sigma_x_given_y: float
    bound_flags: tuple = ()

    @property
    def alpha_star_lo(self):
        a = self.alpha_x_given_y
        return a / (1.0 + a)

    @property
    def alpha_star_hi(self):
        return 1.0 / (1.0 + self.alpha_y_given_x)

    @classmethod
    def from_alphas(cls, alpha_y_given_x, alpha_x_given_y):
        """Fit record with only the slopes set (useful for fixed-alpha runs)."""
        return cls(alpha_y_given_x, 0.0, 0.0, 1.0, alpha_x_given_y, 0.0, 0.0, 1.0)

    def to_dict(self):
        d = asdict(self)
        d["bound_flags"] = list(self.bound_flags)
        d["alpha_star_lo"] = self.alpha_star_lo
        d["alpha_star_hi"] = self.alpha_star_hi
        return d


ALPHA_BOUNDS = (0.0, 1.0)
BETA_BOUNDS = (0.0, 0.999)


def _ht_profile(params, log_x, x, y, var_floor):
    """Negative profile pseudo-log-likelihood with Gaussian working residuals."""
    alpha, beta = params
    scale = np.exp(beta * log_x)
    z = (y - alpha * x) / scale
    var = max(z.var(), var_floor)
    return beta * log_x.sum() + 0.5 * z.size * np.log(var)


def _fit_one_direction(x, y, q_cond):
    u = np.quantile(x, q_cond)
    keep = x > u
    if keep.sum() < 10:
        raise DataError("too few conditioning exceedances for a conditional extremes fit")
    xs, ys = x[keep], y[keep]
    log_x = np.log(xs)
    # keeps the profile finite for exactly linear data
    var_floor = 1e-12 * max(np.mean(ys ** 2), 1e-300)
    args = (log_x, xs, ys, var_floor)

    alphas = np.linspace(*ALPHA_BOUNDS, 21)
    betas = np.linspace(0.0, 0.95, 20)
    vals = np.array([[_ht_profile((a, b), *args) for b in betas] for a in alphas])
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    start = np.array([alphas[i], betas[j]])
    res = minimize(_ht_profile, start, args=args, method="L-BFGS-B",
                   bounds=[ALPHA_BOUNDS, BETA_BOUNDS])
    if np.isfinite(res.fun) and res.fun <= vals[i, j]:
        alpha, beta = res.x
    else:
        alpha, beta = start
    if not np.isfinite(min(res.fun, vals[i, j])):
        raise ConvergenceError("conditional extremes fit failed", best=start)
    z = (ys - alpha * xs) / xs ** beta
    mu, sigma = z.mean(), np.sqrt(max(z.var(), var_floor))
    flags = []
    if alpha <= ALPHA_BOUNDS[0] + 1e-8 or alpha >= ALPHA_BOUNDS[1] - 1e-8:
        flags.append("alpha")
    if beta >= BETA_BOUNDS[1] - 1e-8:
        flags.append("beta")
    return float(alpha), float(beta), float(mu), float(sigma), flags


def fit_conditional_extremes(sample, q_cond=DEFAULT_Q_COND):
    """Fit ``Y | X`` and ``X | Y`` conditional extremes models.

    For each direction, ``Z = (Y - alpha X) / X**beta`` on ``X`` above its
    ``q_cond`` quantile is given a Gaussian working likelihood with mean and
    variance profiled out. ``alpha`` is restricted to [0, 1] and ``beta`` to
    [0, 1).

    Returns
    -------
    CondExtFit
    """
    q_cond = check_probability(q_cond, "q_cond")
    X = sample.X if isinstance(sample, MinProjectionTable) else check_bivariate(sample)
    a_yx, b_yx, m_yx, s_yx, f_yx = _fit_one_direction(X[:, 0], X[:, 1], q_cond)
    a_xy, b_xy, m_xy, s_xy, f_xy = _fit_one_direction(X[:, 1], X[:, 0], q_cond)
    flags = tuple(f"{p}_y_given_x" for p in f_yx) + tuple(f"{p}_x_given_y" for p in f_xy)
    return CondExtFit(a_yx, b_yx, m_yx, s_yx, a_xy, b_xy, m_xy, s_xy, flags)


# --------------------------------------------------------------------------
# combined estimators

BASES = ("hill", "cl", "pr")


def combined(base, sample, grid=None, fit=None, q=DEFAULT_Q, k=DEFAULT_K, q_cond=DEFAULT_Q_COND,
             pair_grid=None, fit_stride=None):
    """Lower bound outside the conditional-extremes interval, estimate inside.

    Parameters
    ----------
    base : {"hill", "cl", "pr"}
        Estimator used on ``[alpha_star_lo, alpha_star_hi]``.
    sample : array-like, BivariateSample or MinProjectionTable
    grid : ndarray, optional
    fit : CondExtFit, optional
        Fitted when not supplied.
    q, k, q_cond : see the individual estimators.
    pair_grid : QuantilePairGrid, optional
        Only for ``base="pr"``.
    fit_stride : int, optional
        Ray thinning inside the interval (default 1 for cl, 20 for pr).

    Returns
    -------
    curve : AdfCurve
        Raw estimate.
    coef : BernsteinCoefficients or None
    fit : CondExtFit
    """
    if base not in BASES:
        raise ValueError(f"base must be one of {BASES}, got {base!r}")
    q = check_probability(q, "q")
    table = as_table(sample, grid)
    fit = fit or fit_conditional_extremes(table, q_cond)
    grid = table.grid
    lo, hi = fit.alpha_star_lo, fit.alpha_star_hi
    name = base + "2"
    params = {"q": q, "k": k, "cond_fit": fit.to_dict()}
    values = lower_bound(grid)
    inside = np.flatnonzero((grid >= lo) & (grid <= hi))
    if lo >= hi or inside.size == 0:
        warnings.warn(f"degenerate interval [{lo:.4g}, {hi:.4g}]; returning the lower bound",
                      RuntimeWarning, stacklevel=2)
        return AdfCurve(grid=grid, values=values, estimator=name, params=params), None, fit

    if base == "hill":
        # the junction rays themselves stay on the lower bound
        open_ = inside[(grid[inside] > lo) & (grid[inside] < hi)]
        if open_.size:
            _, counts, sums = _ray_stats(table, q, open_)
            values[open_] = counts / sums
        return AdfCurve(grid=grid, values=values, estimator=name, params=params), None, fit

    stride = fit_stride or (1 if base == "cl" else 20)
    idx = _fit_indices(grid, stride, lo, hi, min_rays=k - 1)
    rays = grid[idx]
    _, counts, sums = _ray_stats(table, q, idx)
    if base == "cl":
        coef, value = fit_cl_stats(rays, counts, sums, k, domain=(lo, hi))
    else:
        pair_grid = pair_grid or QuantilePairGrid.default()
        gaps = _quantile_gaps(table.sorted[idx], pair_grid)
        coef, value = fit_pr_gaps(rays, gaps, pair_grid.target, k, domain=(lo, hi),
                                  hill=counts / sums)
        params["pairs"] = pair_grid.to_list()
    params.update(coef=coef.to_dict(), objective=value)
    values[inside] = eval_btilde(coef, grid[inside])
    return AdfCurve(grid=grid, values=values, estimator=name, params=params), coef, fit


# --------------------------------------------------------------------------
# scikit-learn style estimators

class _ADFEstimator(BaseEstimator):
    """Common fit/predict plumbing; subclasses implement ``_estimate``."""

    name = None

    def fit(self, X, y=None):
        """Fit the ADF to exponential-margin data ``X`` of shape (n, 2)."""
        X = check_bivariate(X)
        self.n_features_in_ = 2
        return self.fit_table(MinProjectionTable(X, angular_grid(self.n_rays)))

    def fit_table(self, table):
        """Fit from a prebuilt :class:`MinProjectionTable` (shared across estimators)."""
        check_count(self.n_rays, "n_rays", minimum=3)
        if table.grid.size != self.n_rays:
            raise ValueError("table grid size does not match n_rays")
        self.coef_ = None
        self.cond_fit_ = None
        if self.conditional:
            self.cond_fit_ = fit_conditional_extremes(table, self.q_cond)
        raw = self._estimate(table)
        self.raw_curve_ = raw.with_values(raw.values, estimator=self._label())
        self.curve_ = postprocess(self.raw_curve_) if self.postprocess else self.raw_curve_
        return self

    def _label(self):
        return self.name + ("2" if self.conditional else "")

    def predict(self, w):
        """ADF at rays ``w`` (linear interpolation of the fitted grid curve)."""
        check_is_fitted(self, "curve_")
        w = np.asarray(w, dtype=float)
        if np.any((w < 0) | (w > 1)):
            raise ValueError("rays must lie in [0, 1]")
        return self.curve_(w)

    def score(self, X, y=None):
        """Mean exponential log-likelihood per exceedance of held-out data."""
        check_is_fitted(self, "curve_")
        table = MinProjectionTable(check_bivariate(X), self.curve_.grid)
        _, counts, sums = _ray_stats(table, self.q)
        lam = self.curve_.values
        return float((counts @ np.log(lam) - sums @ lam) / counts.sum())


class HillADF(_ADFEstimator):
    """Pointwise Hill ADF estimator.

    Parameters
    ----------
    q : float, default=0.90
        Min-projection threshold level.
    n_rays : int, default=1001
    conditional : bool, default=False
        Use the lower bound outside the conditional-extremes interval.
    q_cond : float, default=0.90
    postprocess : bool, default=True
        Project the raw estimate onto the valid ADF set.

    Attributes
    ----------
    curve_ : AdfCurve
    raw_curve_ : AdfCurve
    cond_fit_ : CondExtFit or None
    coef_ : None
    """

    name = "hill"

    def __init__(self, q=DEFAULT_Q, n_rays=DEFAULT_N_RAYS, conditional=False,
                 q_cond=DEFAULT_Q_COND, postprocess=True):
        self.q = q
        self.n_rays = n_rays
        self.conditional = conditional
        self.q_cond = q_cond
        self.postprocess = postprocess

    def _estimate(self, table):
        if self.conditional:
            curve, _, _ = combined("hill", table, fit=self.cond_fit_, q=self.q)
            return curve
        return hill_adf(table, q=self.q)


class CompositeLikelihoodADF(_ADFEstimator):
    """Bernstein ADF fitted by composite likelihood.

    Parameters
    ----------
    q : float, default=0.90
    k : int, default=7
    n_rays : int, default=1001
    fit_stride : int, default=1
    conditional : bool, default=False
    q_cond : float, default=0.90
    postprocess : bool, default=True

    Attributes
    ----------
    curve_, raw_curve_ : AdfCurve
    coef_ : BernsteinCoefficients or None
    cond_fit_ : CondExtFit or None
    """

    name = "cl"

    def __init__(self, q=DEFAULT_Q, k=DEFAULT_K, n_rays=DEFAULT_N_RAYS, fit_stride=1,
                 conditional=False, q_cond=DEFAULT_Q_COND, postprocess=True):
        self.q = q
        self.k = k
        self.n_rays = n_rays
        self.fit_stride = fit_stride
        self.conditional = conditional
        self.q_cond = q_cond
        self.postprocess = postprocess

    def _estimate(self, table):
        if self.conditional:
            curve, self.coef_, _ = combined("cl", table, fit=self.cond_fit_, q=self.q,
                                            k=self.k, fit_stride=self.fit_stride)
            return curve
        self.coef_, curve = fit_composite_likelihood(table, q=self.q, k=self.k,
                                                     fit_stride=self.fit_stride)
        return curve


class ProbabilityRatioADF(_ADFEstimator):
    """Bernstein ADF fitted by matching tail probability ratios.

    Parameters
    ----------
    pairs : sequence of (q_j, p_j), optional
        Defaults to the 31-pair grid starting at 0.87.
    k : int, default=7
    q : float, default=0.90
        Threshold for the Hill start and for ``score``.
    n_rays : int, default=1001
    fit_stride : int, default=20
    conditional : bool, default=False
    q_cond : float, default=0.90
    postprocess : bool, default=True

    Attributes
    ----------
    curve_, raw_curve_ : AdfCurve
    coef_ : BernsteinCoefficients or None
    cond_fit_ : CondExtFit or None
    """

    name = "pr"

    def __init__(self, pairs=None, k=DEFAULT_K, q=DEFAULT_Q, n_rays=DEFAULT_N_RAYS,
                 fit_stride=20, conditional=False, q_cond=DEFAULT_Q_COND, postprocess=True):
        self.pairs = pairs
        self.k = k
        self.q = q
        self.n_rays = n_rays
        self.fit_stride = fit_stride
        self.conditional = conditional
        self.q_cond = q_cond
        self.postprocess = postprocess

    def _pair_grid(self):
        return QuantilePairGrid.default() if self.pairs is None else QuantilePairGrid(self.pairs)

    def _estimate(self, table):
        if self.conditional:
            curve, self.coef_, _ = combined("pr", table, fit=self.cond_fit_, q=self.q,
                                            k=self.k, pair_grid=self._pair_grid(),
                                            fit_stride=self.fit_stride)
            return curve
        self.coef_, curve = fit_probability_ratio(table, pair_grid=self._pair_grid(), k=self.k,
                                                  fit_stride=self.fit_stride, q_hill=self.q)
        return curve


ESTIMATORS = ("hill", "cl", "pr", "hill2", "cl2", "pr2")
_CLASSES = {"hill": HillADF, "cl": CompositeLikelihoodADF, "pr": ProbabilityRatioADF}


def make_estimator(name, **params):
    """Build an estimator from its short name.

    ``name`` is one of ``hill, cl, pr`` or the conditional variants
    ``hill2, cl2, pr2``. Unknown keyword parameters raise ``TypeError``.
    """
    if name not in ESTIMATORS:
        raise ValueError(f"unknown estimator {name!r}; choose from {', '.join(ESTIMATORS)}")
    cls = _CLASSES[name.rstrip("2")]
    return cls(conditional=name.endswith("2"), **params)


def random_restart_objective(rays, counts, sums, k=DEFAULT_K, n_starts=20, seed=0, domain=None):
    """Best composite-likelihood objective over random starts (verification aid)."""
    rng = check_rng(seed)
    starts = [rng.exponential(1.0, k - 1) * rng.uniform(0.1, 5.0) for _ in range(n_starts)]
    _, value = fit_cl_stats(rays, counts, sums, k, domain=domain, starts=starts)
    return value
