import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adfest.adf import AdfCurve, lower_bound
from adfest.exceptions import DataError
from adfest.margins import fit_marginal
from adfest.minproj import MinProjectionTable, angular_grid
from adfest.returncurve import (curve_diagnostic, curve_to_original, diagnostic_angles,
                                estimate_curve, monotonise, points_at_angles,
                                probability_from_period)

GRID = angular_grid(201)
EXACT_U = np.full(GRID.size, -np.log(0.1))


def test_independence_line():
    curve = estimate_curve(None, AdfCurve(GRID, np.ones_like(GRID)), 0.01, thresholds=EXACT_U)
    assert np.allclose(curve.raw_points.sum(axis=1), -np.log(0.01), atol=1e-12)


def test_full_dependence_corner():
    lam = lower_bound(GRID)
    curve = estimate_curve(None, AdfCurve(GRID, lam), 0.01, thresholds=EXACT_U / lam)
    mid = curve.points[GRID.size // 2]
    assert np.allclose(mid, [-np.log(0.01)] * 2)


def test_model_self_consistency():
    # plugging the raw points back into the min-projection tail model returns p
    rng = np.random.default_rng(0)
    lam = np.maximum(lower_bound(GRID), 0.7 + 0.05 * rng.random(GRID.size))
    lam[[0, -1]] = 1.0
    curve = AdfCurve(GRID, lam)
    X = rng.exponential(size=(5000, 2))
    rc = estimate_curve(X, curve, 0.005)
    u = MinProjectionTable(X, GRID).quantile(0.9)
    level = rc.raw_points.sum(axis=1)[1:-1]
    surv = 0.1 * np.exp(-lam[1:-1] * (level - u[1:-1]))
    assert np.allclose(surv, 0.005, rtol=1e-12)


def test_p_inside_threshold():
    with pytest.raises(DataError, match="inside threshold"):
        estimate_curve(None, AdfCurve(GRID, np.ones_like(GRID)), 0.2, q=0.9, thresholds=EXACT_U)


@settings(max_examples=60, deadline=None)
@given(arrays(float, (30, 2), elements=st.floats(0, 10)))
def test_monotonise_properties(points):
    out = monotonise(points)
    assert np.all(np.diff(out[:, 0]) >= 0) and np.all(np.diff(out[:, 1]) <= 0)
    assert np.array_equal(monotonise(out), out)


def test_monotonise_keeps_ordered_points():
    pts = np.array([[0, 5.0], [1, 4.0], [0.5, 4.5], [2, 1.0]])
    out = monotonise(pts)
    assert np.array_equal(out[[0, 1, 3]], pts[[0, 1, 3]])


@settings(max_examples=30, deadline=None)
@given(st.floats(1e-4, 0.05), st.floats(1.01, 10))
def test_smaller_p_dominates(p, factor):
    lam = (GRID ** 2.5 + (1 - GRID) ** 2.5) ** 0.4
    curve = AdfCurve(GRID, lam)
    big = estimate_curve(None, curve, p, thresholds=EXACT_U)
    small = estimate_curve(None, curve, p / factor, thresholds=EXACT_U)
    angles = diagnostic_angles(25)
    assert np.all(points_at_angles(small.points, angles) >= points_at_angles(big.points, angles) - 1e-12)


def test_to_original_round_trip():
    rng = np.random.default_rng(3)
    data = rng.gamma(2.0, size=(4000, 2))
    mx, my = fit_marginal(data[:, 0]), fit_marginal(data[:, 1])
    curve = estimate_curve(None, AdfCurve(GRID, np.ones_like(GRID)), 0.01, thresholds=EXACT_U)
    orig = curve_to_original(curve, mx, my)
    assert orig.margin_tag == "original"
    assert np.all(np.diff(orig.x) >= 0) and np.all(np.diff(orig.y) <= 0)
    back = np.column_stack([mx.to_exponential(orig.x), my.to_exponential(orig.y)])
    assert np.allclose(back, curve.points, rtol=1e-6, atol=1e-9)


def test_period_probability():
    assert probability_from_period(5, 4659, 28) == pytest.approx(28 / (5 * 4659))


def test_points_at_angles_on_line():
    curve = estimate_curve(None, AdfCurve(GRID, np.ones_like(GRID)), 0.01, thresholds=EXACT_U)
    pts = points_at_angles(curve.points, diagnostic_angles(150))
    assert np.allclose(pts.sum(axis=1), -np.log(0.01))
    single = points_at_angles(curve.points, diagnostic_angles(1))
    assert np.allclose(single, [[-np.log(0.01) / 2] * 2])


def test_diagnostic_coverage_and_shift():
    X = np.random.default_rng(8).exponential(size=(10_000, 2))
    curve = estimate_curve(X, AdfCurve(GRID, np.ones_like(GRID)), 0.05)
    diag = curve_diagnostic(X, curve, n_boot=200, seed=0)
    assert diag.fraction_covered >= 0.9
    shifted = type(curve)(p=curve.p, points=curve.points + 1.0)
    worse = curve_diagnostic(X, shifted, n_boot=200, seed=0)
    assert np.all(worse.median[1:-1] < 0.05)
