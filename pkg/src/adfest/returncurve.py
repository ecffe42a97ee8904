"""Bivariate return curves from a fitted ADF and their empirical diagnostic.

A return curve at probability ``p`` is the set of points ``(x, y)`` with
``Pr(X > x, Y > y) = p``. On exponential margins ``{X > w u, Y > (1 - w) u}``
is the event ``{T_w > u}``, so each ray gives one curve point by inverting
the exponential tail of the min-projection above its threshold.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from adfest._validation import check_bivariate, check_count, check_probability
from adfest.diagnostics import DEFAULT_BLOCK, DEFAULT_N_BOOT, bootstrap_replicates
from adfest.exceptions import DataError
from adfest.minproj import MinProjectionTable


def probability_from_period(years, n_obs, n_years):
    """Joint exceedance probability for a return period of ``years``.

    ``n_y = n_obs / n_years`` is the mean number of observations per year and
    ``p = 1 / (years * n_y)``.
    """
    if years <= 0 or n_obs <= 0 or n_years <= 0:
        raise ValueError("years, n_obs and n_years must be positive")
    return n_years / (years * n_obs)


@dataclass(frozen=True)
class ReturnCurve:
    """Return-curve points ordered from the ``y`` axis to the ``x`` axis.

    Attributes
    ----------
    p : float
    points : ndarray of shape (m, 2)
        After monotonisation: ``x`` non-decreasing, ``y`` non-increasing.
    margin_tag : {"exponential", "original"}
    raw_points : ndarray of shape (m, 2)
        Points before monotonisation.
    meta : dict
    """

    p: float
    points: np.ndarray
    margin_tag: str = "exponential"
    raw_points: np.ndarray = None
    meta: dict = field(default_factory=dict)

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def y(self):
        return self.points[:, 1]

    def to_csv(self, path):
        rows = ["x,y"] + [f"{a:.10g},{b:.10g}" for a, b in self.points]
        Path(path).write_text("\n".join(rows) + "\n")

    def metadata(self):
        return dict(self.meta, p=self.p, margins=self.margin_tag, n_points=int(len(self.points)))

    def to_json(self, path):
        Path(path).write_text(json.dumps(self.metadata(), indent=1, sort_keys=True) + "\n")


def monotonise(points):
    """Running max of ``x`` and running min of ``y`` along the curve."""
    points = np.asarray(points, dtype=float)
    return np.column_stack([np.maximum.accumulate(points[:, 0]),
                            np.minimum.accumulate(points[:, 1])])


def estimate_curve(sample, adf, p, q=0.9, thresholds=None, table=None):
    """Return curve on exponential margins from a fitted ADF.

    Parameters
    ----------
    sample : array-like of shape (n, 2) or None
        Exponential-margin data; only used for the min-projection thresholds.
    adf : AdfCurve
        Fitted (normally post-processed) curve.
    p : float
        Joint survival probability; must be below ``1 - q``.
    q : float, default=0.9
        Threshold level of the min-projections.
    thresholds : array-like of shape (m,), optional
        Known thresholds ``u_w`` on the curve grid; replaces the empirical ones.
    table : MinProjectionTable, optional
        Prebuilt table on ``adf.grid``.

    Returns
    -------
    ReturnCurve
    """
    q = check_probability(q, "q")
    p = check_probability(p, "p")
    if p >= 1.0 - q:
        raise DataError("return level inside threshold: p must be below 1 - q")
    grid = adf.grid
    if thresholds is not None:
        u = np.asarray(thresholds, dtype=float)
        if u.shape != grid.shape:
            raise ValueError("thresholds must match the curve grid")
    else:
        if table is None:
            table = MinProjectionTable(check_bivariate(sample), grid)
        u = table.quantile(q)
    level = u + (np.log1p(-q) - np.log(p)) / adf.values
    raw = np.column_stack([grid * level, (1.0 - grid) * level])
    # the axis rays degenerate; use the marginal p-quantiles there
    raw[0] = (0.0, -np.log(p))
    raw[-1] = (-np.log(p), 0.0)
    meta = {"q": q, "estimator": adf.estimator,
            "thresholds": "exact" if thresholds is not None else "empirical"}
    return ReturnCurve(p=p, points=monotonise(raw), margin_tag="exponential", raw_points=raw,
                       meta=meta)


def curve_to_original(curve, model_x, model_y):
    """Map an exponential-margin curve to original margins."""
    if curve.margin_tag != "exponential":
        raise ValueError("curve is not on exponential margins")
    pts = np.column_stack([model_x.from_exponential(curve.x), model_y.from_exponential(curve.y)])
    return ReturnCurve(p=curve.p, points=pts, margin_tag="original", raw_points=None,
                       meta=dict(curve.meta, margins_x=model_x.to_dict(),
                                 margins_y=model_y.to_dict()))


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def points_at_angles(points, angles):
    """Intersections of the curve polyline with rays from the origin.

    ``points`` must run from the ``y`` axis to the ``x`` axis with
    non-increasing polar angle, as monotonised curves do.
    """
    points = np.asarray(points, dtype=float)
    phi = np.arctan2(points[:, 1], points[:, 0])
    out = np.empty((len(angles), 2))
    for k, theta in enumerate(angles):
        r = np.array([np.cos(theta), np.sin(theta)])
        # last vertex at or above the angle, then the segment leaving it
        i = int(np.clip(np.flatnonzero(phi >= theta)[-1] if np.any(phi >= theta) else 0,
                        0, len(points) - 2))
        a, b = points[i], points[i + 1]
        d = b - a
        denom = _cross(d, r)
        s = 0.0 if denom == 0 else float(np.clip(-_cross(a, r) / denom, 0.0, 1.0))
        out[k] = a + s * d
    return out


def diagnostic_angles(n_angles):
    """``n_angles`` equally spaced polar angles on [0, pi/2]; pi/4 when single."""
    n_angles = check_count(n_angles, "n_angles")
    if n_angles == 1:
        return np.array([np.pi / 4])
    return np.linspace(0.0, np.pi / 2, n_angles)


@dataclass(frozen=True)
class CurveDiagnostic:
    """Empirical joint survival at selected curve points versus the target."""

    angles: np.ndarray
    points: np.ndarray
    estimate: np.ndarray
    median: np.ndarray
    lo95: np.ndarray
    hi95: np.ndarray
    target_p: float
    meta: dict = field(default_factory=dict)

    @property
    def covered(self):
        return (self.lo95 <= self.target_p) & (self.target_p <= self.hi95)

    @property
    def fraction_covered(self):
        return float(self.covered.mean())

    def to_csv(self, path):
        rows = ["angle_index,median,lo95,hi95,target_p"]
        rows += [f"{i},{m:.10g},{a:.10g},{b:.10g},{self.target_p:.10g}"
                 for i, (m, a, b) in enumerate(zip(self.median, self.lo95, self.hi95))]
        Path(path).write_text("\n".join(rows) + "\n")


def _joint_survival(X, pts):
    return ((X[:, None, 0] > pts[None, :, 0]) & (X[:, None, 1] > pts[None, :, 1])).mean(axis=0)


def curve_diagnostic(sample, curve, p=None, n_angles=150, n_boot=DEFAULT_N_BOOT,
                     block_size=DEFAULT_BLOCK, seed=None):
    """Empirical joint survival probabilities along a return curve.

    Curve points are taken at equally spaced polar angles; at each the
    empirical ``Pr(X > x, Y > y)`` is block-bootstrapped to give a median and a
    95% band, to be compared with ``p``.

    Parameters
    ----------
    sample : array-like of shape (n, 2)
        Data on the same margins as ``curve``, in time order.
    curve : ReturnCurve
    p : float, optional
        Target probability; defaults to ``curve.p``.
    n_angles : int, default=150
    n_boot : int, default=500
    block_size : int, default=40
    seed : optional

    Returns
    -------
    CurveDiagnostic
    """
    X = check_bivariate(sample, exponential=curve.margin_tag == "exponential")
    p = curve.p if p is None else check_probability(p, "p")
    angles = diagnostic_angles(n_angles)
    pts = points_at_angles(curve.points, angles)
    reps = bootstrap_replicates(X, block_size, n_boot, seed, lambda Z: _joint_survival(Z, pts))
    lo, med, hi = np.quantile(reps, [0.025, 0.5, 0.975], axis=0)
    meta = {"n_angles": n_angles, "n_boot": n_boot, "block_size": block_size, "seed": seed}
    return CurveDiagnostic(angles=angles, points=pts, estimate=_joint_survival(X, pts),
                           median=med, lo95=lo, hi95=hi, target_p=p, meta=meta)
