"""Angular dependence function representations and shape constraints.

A valid ADF satisfies ``lambda(0) = lambda(1) = 1``,
``lambda(w) >= max(w, 1 - w)``, and for ``w1 <= w2``::

    w1 / lambda(w1) <= w2 / lambda(w2)
    (1 - w1) / lambda(w1) >= (1 - w2) / lambda(w2)

Curves are stored on a finite angular grid; :func:`postprocess` projects a raw
grid estimate onto the smallest valid curve that dominates it.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import comb

from adfest.minproj import check_grid

# relative slack used when deciding whether a ratio constraint is violated
RATIO_RTOL = 1e-12
CHECK_TOL = 1e-9


@dataclass(frozen=True)
class BernsteinCoefficients:
    """Coefficients of an anchored Bernstein-Bezier polynomial.

    Parameters
    ----------
    beta : ndarray of shape (k - 1,)
        Nonnegative interior coefficients.
    domain : tuple of float, optional
        ``(a_lo, a_hi)`` for the restricted family; ``None`` means the full
        interval [0, 1] with unit end anchors.
    """

    beta: np.ndarray
    domain: tuple = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        if beta.ndim != 1 or beta.size < 1:
            raise ValueError("beta must be a vector of length k - 1 >= 1")
        if np.any(beta < 0) or not np.all(np.isfinite(beta)):
            raise ValueError("beta must be finite and nonnegative")
        object.__setattr__(self, "beta", beta)
        if self.domain is not None:
            lo, hi = map(float, self.domain)
            if not 0.0 <= lo < hi <= 1.0:
                raise ValueError(f"restricted domain needs 0 <= a_lo < a_hi <= 1, got {self.domain}")
            object.__setattr__(self, "domain", (lo, hi))

    @property
    def k(self):
        return self.beta.size + 1

    def __call__(self, w):
        if self.domain is None:
            return eval_bstar(self, w)
        return eval_btilde(self, w)

    def to_dict(self):
        return {"k": self.k, "beta": self.beta.tolist(),
                "domain": None if self.domain is None else list(self.domain)}


def bernstein_basis(s, k):
    """Bernstein basis ``C(k, i) s^i (1 - s)^(k - i)`` for ``i = 0..k``.

    Returns
    -------
    ndarray of shape (len(s), k + 1)
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    i = np.arange(k + 1)
    return comb(k, i) * s[:, None] ** i * (1.0 - s[:, None]) ** (k - i)


def anchored_design(s, k, left=1.0, right=1.0):
    """Split the basis into the fixed end-anchor part and the interior columns.

    ``f(s) = offset + design @ beta`` with ``offset = left B_0 + right B_k``.
    """
    basis = bernstein_basis(s, k)
    offset = left * basis[:, 0] + right * basis[:, k]
    return offset, basis[:, 1:k]


def eval_bstar(coeffs, w):
    """Evaluate a member of the full family (unit anchors at 0 and 1)."""
    w = np.asarray(w, dtype=float)
    if np.any((w < 0) | (w > 1)):
        raise ValueError("rays must lie in [0, 1]")
    offset, design = anchored_design(w.ravel(), coeffs.k)
    out = offset + design @ coeffs.beta
    return out.reshape(w.shape) if w.ndim else float(out[0])


def eval_btilde(coeffs, v):
    """Evaluate a member of the restricted family on ``[a_lo, a_hi]``.

    The end anchors are ``1 - a_lo`` at ``a_lo`` and ``a_hi`` at ``a_hi`` so that
    the polynomial joins the lower bound continuously.
    """
    if coeffs.domain is None:
        raise ValueError("coefficients have no restricted domain")
    lo, hi = coeffs.domain
    v = np.asarray(v, dtype=float)
    if np.any((v < lo) | (v > hi)):
        raise ValueError(f"rays must lie in [{lo}, {hi}]")
    s = (v.ravel() - lo) / (hi - lo)
    offset, design = anchored_design(s, coeffs.k, left=1.0 - lo, right=hi)
    out = offset + design @ coeffs.beta
    return out.reshape(v.shape) if v.ndim else float(out[0])


def lower_bound(grid):
    grid = np.asarray(grid, dtype=float)
    return np.maximum(grid, 1.0 - grid)


@dataclass(frozen=True)
class AdfCurve:
    """ADF values on an angular grid.

    Parameters
    ----------
    grid : ndarray of shape (m,)
    values : ndarray of shape (m,)
    processed : bool
        Whether :func:`postprocess` has been applied.
    estimator : str, optional
    params : dict
        Estimator settings and fitted quantities, serialised with the curve.
    """

    grid: np.ndarray
    values: np.ndarray
    processed: bool = False
    estimator: str = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        grid = check_grid(self.grid)
        values = np.asarray(self.values, dtype=float)
        if values.shape != grid.shape:
            raise ValueError("values and grid must have the same length")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ValueError("ADF values must be finite and positive")
        grid = grid.copy()
        values = values.copy()
        grid.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __call__(self, w):
        """Linear interpolation of the curve at arbitrary rays."""
        return np.interp(w, self.grid, self.values)

    def with_values(self, values, **changes):
        kw = dict(grid=self.grid, values=values, processed=self.processed,
                  estimator=self.estimator, params=dict(self.params))
        kw.update(changes)
        return AdfCurve(**kw)

    def to_dict(self):
        return {"estimator": self.estimator, "processed": self.processed,
                "params": self.params, "grid": self.grid.tolist(),
                "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(grid=np.asarray(d["grid"]), values=np.asarray(d["values"]),
                   processed=bool(d.get("processed", False)),
                   estimator=d.get("estimator"), params=d.get("params") or {})

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n")

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_csv(self, path):
        lines = ["w,lambda"] + [f"{w:.6f},{v:.12g}" for w, v in zip(self.grid, self.values)]
        Path(path).write_text("\n".join(lines) + "\n")


@dataclass
class ViolationReport:
    """Rays violating each ADF constraint.

    Ratio violations are reported as the ray at the upper end of an offending
    adjacent pair.
    """

    lower_bound: list
    endpoints: list
    w_ratio: list
    one_minus_w_ratio: list
    derivative: list

    @property
    def n_violations(self):
        return (len(self.lower_bound) + len(self.endpoints) + len(self.w_ratio)
                + len(self.one_minus_w_ratio) + len(self.derivative))

    @property
    def ok(self):
        return self.n_violations == 0


def check_properties(curve, tol=CHECK_TOL):
    """Report rays where ``curve`` breaks the ADF shape constraints.

    Checks the lower bound, unit endpoints, monotonicity of ``w / lambda`` and
    ``(1 - w) / lambda`` over adjacent rays (which implies all pairs), and
    central finite-difference derivative bounds
    ``-lambda / (1 - w) <= lambda' <= lambda / w``.
    """
    w, lam = curve.grid, curve.values
    lb = lower_bound(w)
    low = w[lam < lb * (1 - tol)].tolist()
    ends = [float(v) for v, val in ((w[0], lam[0]), (w[-1], lam[-1]))
            if abs(val - 1.0) > tol]
    r1 = w / lam
    r2 = (1.0 - w) / lam
    bad1 = np.diff(r1) < -tol * np.maximum(r1[1:], 1e-300)
    bad2 = np.diff(r2) > tol * np.maximum(r2[:-1], 1e-300)
    deriv = (lam[2:] - lam[:-2]) / (w[2:] - w[:-2])
    wi, li = w[1:-1], lam[1:-1]
    slack = tol * (1.0 + li / np.minimum(wi, 1.0 - wi))
    bad_d = (deriv > li / wi + slack) | (deriv < -li / (1.0 - wi) - slack)
    return ViolationReport(
        lower_bound=low,
        endpoints=ends,
        w_ratio=w[1:][bad1].tolist(),
        one_minus_w_ratio=w[1:][bad2].tolist(),
        derivative=wi[bad_d].tolist(),
    )


def _outward_sweeps(w, lam):
    """Sweeps from the centre ray outward, raising values that break monotonicity.

    Left of 0.5, ``w / lambda`` must not increase as ``w`` decreases; right of
    0.5, ``(1 - w) / lambda`` must not increase as ``w`` increases.
    """
    mid = w.size // 2
    for i in range(mid - 1, 0, -1):
        prev, cur = lam[i + 1] / w[i + 1], lam[i] / w[i]
        if cur < prev * (1 - RATIO_RTOL):
            lam[i] = w[i] * prev
    for i in range(mid + 1, w.size - 1):
        prev, cur = lam[i - 1] / (1 - w[i - 1]), lam[i] / (1 - w[i])
        if cur < prev * (1 - RATIO_RTOL):
            lam[i] = (1 - w[i]) * prev
    return lam


def _close_ratio_constraints(w, lam):
    """Smallest curve above ``lam`` with both ratios monotone on the whole grid.

    The outward sweeps only enforce one ratio per half; this pass also covers
    the other ratio on each half and pairs straddling 0.5. For a curve that
    already satisfies both it changes nothing.
    """
    with np.errstate(divide="ignore"):
        r_w = np.where(w > 0, lam / w, -np.inf)
        r_1w = np.where(w < 1, lam / (1 - w), -np.inf)
    from_above = w * np.maximum.accumulate(r_w[::-1])[::-1]
    from_below = (1 - w) * np.maximum.accumulate(r_1w)
    target = np.maximum(from_above, from_below)
    raise_ = target > lam * (1 + RATIO_RTOL)
    lam[raise_] = target[raise_]
    return lam


def postprocess(curve):
    """Impose the ADF constraints on a raw grid estimate.

    Values are first clamped to the lower bound with unit endpoints, then raised
    where needed so that ``w / lambda`` is non-decreasing and
    ``(1 - w) / lambda`` is non-increasing. Values are never lowered, and the
    map is idempotent.

    Parameters
    ----------
    curve : AdfCurve

    Returns
    -------
    AdfCurve
        Processed copy with ``processed=True``.
    """
    w = curve.grid
    lam = np.maximum(np.array(curve.values, dtype=float), lower_bound(w))
    lam[0] = lam[-1] = 1.0
    lam = _outward_sweeps(w, lam)
    lam = _close_ratio_constraints(w, lam)
    return curve.with_values(lam, processed=True)
