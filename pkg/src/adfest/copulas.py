"""Bivariate copulas on standard exponential margins with known ADFs.

Families: Gaussian, logistic and asymmetric logistic extreme-value copulas,
their inverted (survival) counterparts, and Student t. The asymptotically
dependent families (logistic, asymmetric logistic, t) have ADF equal to the
lower bound ``max(w, 1 - w)``.
"""

from dataclasses import asdict, dataclass
from functools import lru_cache

import numpy as np
from scipy import stats
from scipy.optimize import minimize_scalar
from scipy.special import log_ndtr

from adfest._validation import check_count, check_rng
from adfest.minproj import angular_grid

FAMILIES = ("gaussian", "logistic", "asym_logistic", "inv_logistic",
            "inv_asym_logistic", "student_t")

_REQUIRED = {
    "gaussian": ("rho",),
    "logistic": ("r",),
    "asym_logistic": ("r", "k1", "k2"),
    "inv_logistic": ("r",),
    "inv_asym_logistic": ("r", "k1", "k2"),
    "student_t": ("rho", "nu"),
}


@dataclass(frozen=True)
class CopulaSpec:
    """Copula family and parameters.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES`.
    rho : float, optional
        Correlation for ``gaussian`` and ``student_t``, in (-1, 1).
    r : float, optional
        Logistic dependence parameter in (0, 1].
    k1, k2 : float, optional
        Asymmetry weights in [0, 1].
    nu : float, optional
        Degrees of freedom for ``student_t``.
    """

    family: str
    rho: float = None
    r: float = None
    k1: float = None
    k2: float = None
    nu: float = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown copula family {self.family!r}")
        for name in _REQUIRED[self.family]:
            if getattr(self, name) is None:
                raise ValueError(f"{self.family} copula needs parameter {name!r}")
        if self.rho is not None and not -1 < self.rho < 1:
            raise ValueError("rho must lie in (-1, 1)")
        if self.r is not None and not 0 < self.r <= 1:
            raise ValueError("r must lie in (0, 1]")
        for name in ("k1", "k2"):
            v = getattr(self, name)
            if v is not None and not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.nu is not None and not self.nu > 0:
            raise ValueError("nu must be positive")

    @property
    def asymptotically_dependent(self):
        return self.family in ("logistic", "asym_logistic", "student_t")

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        family = d.pop("family")
        return cls(family=family, **{k: float(v) for k, v in d.items()})

    def label(self):
        params = ",".join(f"{k}={v:g}" for k, v in self.to_dict().items() if k != "family")
        return f"{self.family}({params})"


# Copulas 1-9 of the benchmark study.
STUDY_COPULAS = {
    1: CopulaSpec("gaussian", rho=-0.6),
    2: CopulaSpec("gaussian", rho=0.1),
    3: CopulaSpec("gaussian", rho=0.6),
    4: CopulaSpec("logistic", r=0.8),
    5: CopulaSpec("asym_logistic", r=0.8, k1=0.3, k2=0.7),
    6: CopulaSpec("inv_logistic", r=0.4),
    7: CopulaSpec("inv_asym_logistic", r=0.4, k1=0.3, k2=0.7),
    8: CopulaSpec("student_t", rho=0.8, nu=2.0),
    9: CopulaSpec("student_t", rho=0.2, nu=5.0),
}


def _positive_stable(alpha, size, rng):
    """Positive stable variables with Laplace transform ``exp(-s**alpha)`` (Kanter)."""
    if alpha == 1.0:
        return np.ones(size)
    u = rng.uniform(0.0, np.pi, size)
    e = rng.standard_exponential(size)
    a = np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
    b = (np.sin((1.0 - alpha) * u) / e) ** ((1.0 - alpha) / alpha)
    return a * b


def _logistic_neglog_uniforms(r, n, rng):
    """``-log U`` and ``-log V`` for (U, V) from the logistic EV copula."""
    s = _positive_stable(r, n, rng)
    e = rng.standard_exponential((n, 2))
    return (e / s[:, None]) ** r


def _upper_exp(neglog_u):
    """Exponential variable ``-log(1 - U)`` given ``-log U``."""
    return -np.log(-np.expm1(-neglog_u))


def _asym_logistic_frechet(spec, n, rng):
    """Unit Frechet pairs from the asymmetric logistic max-mixture."""
    a = 1.0 / _logistic_neglog_uniforms(spec.r, n, rng)
    b = 1.0 / rng.standard_exponential((n, 2))
    k = np.array([spec.k1, spec.k2])
    return np.maximum((1.0 - k) * b, k * a)


def sample_copula(spec, n, seed=None):
    """Draw ``n`` pairs on standard exponential margins.

    Parameters
    ----------
    spec : CopulaSpec
    n : int
    seed : int, sequence of int, or numpy Generator, optional

    Returns
    -------
    ndarray of shape (n, 2)
    """
    n = check_count(n, "n")
    rng = check_rng(seed)
    fam = spec.family
    if fam == "gaussian":
        cov = [[1.0, spec.rho], [spec.rho, 1.0]]
        z = rng.multivariate_normal([0.0, 0.0], cov, size=n, method="cholesky")
        return -log_ndtr(-z)
    if fam == "student_t":
        cov = [[1.0, spec.rho], [spec.rho, 1.0]]
        z = rng.multivariate_normal([0.0, 0.0], cov, size=n, method="cholesky")
        t = z / np.sqrt(rng.chisquare(spec.nu, size=n) / spec.nu)[:, None]
        return -stats.t.logsf(t, spec.nu)
    if fam == "logistic":
        return _upper_exp(_logistic_neglog_uniforms(spec.r, n, rng))
    if fam == "inv_logistic":
        return _logistic_neglog_uniforms(spec.r, n, rng)
    frechet = _asym_logistic_frechet(spec, n, rng)
    with np.errstate(divide="ignore"):
        neglog_u = 1.0 / frechet
    if fam == "asym_logistic":
        return _upper_exp(neglog_u)
    return neglog_u


def gaussian_gauge(rho):
    """Gauge function of the Gaussian copula on exponential margins."""
    def g(x, y):
        return (x + y - 2.0 * rho * np.sqrt(x * y)) / (1.0 - rho ** 2)
    return g


def adf_from_gauge(g, w, span=4.0, n_coarse=81):
    """ADF at ray ``w`` from a 1-homogeneous gauge function.

    Returns ``min g(x, y)`` over ``x >= w, y >= 1 - w``. By homogeneity the
    minimum lies on the boundary of that quadrant, so each boundary half-line is
    searched on a coarse grid and refined with a bounded scalar search.
    """
    if w <= 0.0 or w >= 1.0:
        return 1.0
    a, b = w, 1.0 - w

    def on_vertical(s):
        return g(a, b + s)

    def on_horizontal(s):
        return g(a + s, b)

    best = g(a, b)
    if not np.isfinite(best):
        raise ValueError("gauge returned a non-finite value")
    coarse = np.linspace(0.0, span, n_coarse)
    step = coarse[1]
    for f in (on_vertical, on_horizontal):
        vals = np.array([f(s) for s in coarse])
        if not np.all(np.isfinite(vals)):
            raise ValueError("gauge returned a non-finite value")
        j = int(np.argmin(vals))
        lo, hi = max(coarse[j] - step, 0.0), coarse[j] + step
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        best = min(best, float(vals[j]), float(res.fun))
    return best


def _gaussian_closed_form(rho, w):
    # cross-check only; valid for rho >= 0
    w = np.asarray(w, dtype=float)
    corner = (1.0 - 2.0 * rho * np.sqrt(w * (1.0 - w))) / (1.0 - rho ** 2)
    ratio = np.divide(w, 1.0 - w, out=np.full_like(w, np.inf), where=w < 1)
    inside = (ratio >= rho ** 2) & (ratio <= 1.0 / rho ** 2)
    return np.where(inside, corner, np.maximum(w, 1.0 - w))


@lru_cache(maxsize=64)
def _gaussian_adf_grid(rho, n_rays):
    g = gaussian_gauge(rho)
    return np.array([adf_from_gauge(g, w) for w in angular_grid(n_rays)])


def true_adf(spec, w):
    """True ADF of ``spec`` at ray(s) ``w``."""
    w_arr = np.asarray(w, dtype=float)
    if np.any((w_arr < 0) | (w_arr > 1)):
        raise ValueError("rays must lie in [0, 1]")
    fam = spec.family
    lb = np.maximum(w_arr, 1.0 - w_arr)
    if spec.asymptotically_dependent:
        out = lb
    elif fam == "inv_logistic":
        r = spec.r
        out = (w_arr ** (1.0 / r) + (1.0 - w_arr) ** (1.0 / r)) ** r
    elif fam == "inv_asym_logistic":
        r, k1, k2 = spec.r, spec.k1, spec.k2
        out = ((1.0 - k1) * w_arr + (1.0 - k2) * (1.0 - w_arr)
               + ((k1 * w_arr) ** (1.0 / r) + (k2 * (1.0 - w_arr)) ** (1.0 / r)) ** r)
    else:
        g = gaussian_gauge(spec.rho)
        out = np.vectorize(lambda v: adf_from_gauge(g, v), otypes=[float])(w_arr)
    return out if out.ndim else float(out)


def true_adf_curve(spec, grid):
    """True ADF on a grid as an :class:`~adfest.adf.AdfCurve`."""
    from adfest.adf import AdfCurve

    grid = np.asarray(grid, dtype=float)
    if spec.family == "gaussian" and np.array_equal(grid, angular_grid(grid.size)):
        values = _gaussian_adf_grid(spec.rho, grid.size)
    else:
        values = true_adf(spec, grid)
    return AdfCurve(grid=grid, values=values, processed=True, estimator="truth",
                    params={"copula": spec.to_dict()})
