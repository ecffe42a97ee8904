import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from adfest.adf import check_properties, lower_bound, postprocess
from adfest.copulas import STUDY_COPULAS, sample_copula
from adfest.estimators import (ESTIMATORS, CompositeLikelihoodADF, CondExtFit, HillADF,
                               QuantilePairGrid, as_table, cl_objective, combined,
                               fit_cl_stats, fit_composite_likelihood, fit_conditional_extremes,
                               fit_pr_gaps, fit_probability_ratio, hill_adf, make_estimator,
                               random_restart_objective, _design, _ray_stats)
from adfest.minproj import angular_grid, excesses, min_projection

TRUE_MID = 2 ** (0.4 - 1)


# --- Hill ------------------------------------------------------------------

def test_hill_is_reciprocal_mean_excess(inv_logistic_sample, grid):
    curve = hill_adf(inv_logistic_sample, grid, q=0.9)
    for w in (0.0, 0.137, 0.5, 0.9, 1.0):
        _, exc = excesses(min_projection(inv_logistic_sample, w), 0.9)
        i = int(round(w * 1000))
        assert curve.values[i] == pytest.approx(exc.size / exc.sum(), rel=1e-12)
    assert not curve.processed


def test_hill_unit_excesses():
    # T_0.5 = 2x; with the top half of values one unit above the median every excess is 1
    x = np.r_[np.zeros(50), np.full(50, 0.5)]
    X = np.column_stack([x, x])
    curve = hill_adf(X, angular_grid(3), q=0.3)
    u = np.quantile(2 * x, 0.3)
    assert u == 0.0
    assert curve.values[1] == pytest.approx(1.0)


def test_hill_exponential_rate():
    x = np.random.default_rng(0).exponential(1 / 5.0, 5000)
    curve = hill_adf(np.column_stack([x, x]), angular_grid(3), q=0.5)
    assert curve.values[1] == pytest.approx(2.5, abs=0.1)


def test_hill_independence(independent_sample, grid):
    curve = postprocess(hill_adf(independent_sample, grid))
    assert curve(0.5) == pytest.approx(1.0, abs=0.1)


# --- composite likelihood ------------------------------------------------------

def test_cl_single_ray_matches_mle(inv_logistic_sample):
    _, exc = excesses(min_projection(inv_logistic_sample, 0.5), 0.9)
    coef, curve = fit_composite_likelihood(inv_logistic_sample, q=0.9, fit_rays=[0.5])
    assert curve(0.5) == pytest.approx(exc.size / exc.sum(), abs=1e-3)


def test_cl_inverted_logistic(inv_logistic_sample):
    _, curve = fit_composite_likelihood(inv_logistic_sample)
    assert curve(0.5) == pytest.approx(TRUE_MID, abs=0.1)


def test_cl_independence(independent_sample):
    _, curve = fit_composite_likelihood(independent_sample)
    assert np.all(np.abs(curve.values - 1.0) < 0.1)


def test_cl_optimum_verified_by_random_restarts(inv_logistic_sample):
    table = as_table(inv_logistic_sample)
    rays = table.grid
    _, counts, sums = _ray_stats(table, 0.9)
    coef, value = fit_cl_stats(rays, counts, sums, 7)
    check = random_restart_objective(rays, counts, sums, 7, n_starts=20, seed=1)
    assert value <= check * (1 + 1e-6) + 1e-12
    offset, design = _design(rays, 7, None)
    assert value <= cl_objective(np.ones(6), offset, design, counts, sums)[0]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_cl_never_worse_than_independence_start(seed):
    rng = np.random.default_rng(seed)
    rays = angular_grid(21)
    counts = rng.integers(5, 200, rays.size).astype(float)
    sums = counts / rng.uniform(0.5, 2.0, rays.size)
    coef, value = fit_cl_stats(rays, counts, sums, 5)
    offset, design = _design(rays, 5, None)
    assert value <= cl_objective(np.ones(4), offset, design, counts, sums)[0] + 1e-12
    assert np.all(coef.beta >= 0)


# --- probability ratio -------------------------------------------------------

def test_pair_grid_defaults():
    pg = QuantilePairGrid.default()
    assert len(pg.pairs) == 31
    assert pg.pairs[0] == pytest.approx((0.87, 0.92))
    assert pg.pairs[-1] == pytest.approx((0.93, 0.98))
    with pytest.raises(ValueError):
        QuantilePairGrid([(0.9, 0.85)])


def test_pr_exact_exponential_quantiles():
    pg = QuantilePairGrid.default()
    rays = angular_grid(51)
    gaps = np.tile(np.log((1 - pg.lower) / (1 - pg.upper)), (rays.size, 1))
    coef, value = fit_pr_gaps(rays, gaps, pg.target, 7, hill=np.ones(rays.size))
    assert value == pytest.approx(0.0, abs=1e-6)


def test_pr_single_pair_single_ray():
    pg = QuantilePairGrid([(0.9, 0.95)])
    gaps = np.array([[np.log(2) / 1.5]])
    coef, _ = fit_pr_gaps(np.array([0.5]), gaps, pg.target, 7)
    assert coef(0.5) == pytest.approx(1.5, abs=1e-3)


def test_pr_inverted_logistic(inv_logistic_sample):
    _, curve = fit_probability_ratio(inv_logistic_sample)
    assert curve(0.5) == pytest.approx(0.66, abs=0.12)


# --- conditional extremes and combined estimators ----------------------------

def test_condext_comonotone():
    x = np.random.default_rng(1).exponential(size=2000)
    fit = fit_conditional_extremes(np.column_stack([x, x]))
    assert fit.alpha_y_given_x == 1.0 and fit.alpha_x_given_y == 1.0
    assert fit.alpha_star_lo == fit.alpha_star_hi == 0.5


def test_condext_independence(independent_sample):
    fit = fit_conditional_extremes(independent_sample)
    assert fit.alpha_y_given_x <= 0.1 and fit.alpha_x_given_y <= 0.1
    assert 0 <= fit.alpha_star_lo <= 0.5 <= fit.alpha_star_hi <= 1


@pytest.mark.parametrize("base", ["hill", "cl", "pr"])
def test_combined_known_alpha_region(base, inv_logistic_sample, grid):
    fit = CondExtFit.from_alphas(0.25, 0.25)
    curve, _, _ = combined(base, inv_logistic_sample, grid, fit=fit)
    outside = (grid <= 0.2) | (grid >= 0.8)
    assert np.array_equal(curve.values[outside], lower_bound(grid[outside]))


def test_combined_cl_anchor_and_continuity(inv_logistic_sample, grid):
    fit = CondExtFit.from_alphas(0.3, 0.2)
    curve, coef, _ = combined("cl", inv_logistic_sample, grid, fit=fit)
    lo, hi = fit.alpha_star_lo, fit.alpha_star_hi
    assert coef(lo) == pytest.approx(1 - lo, abs=1e-12)
    assert coef(hi) == pytest.approx(hi, abs=1e-12)
    step = grid[1] - grid[0]
    for a in (lo, hi):
        below, above = grid[grid < a][-1], grid[grid > a][0]
        for ray in (below, above):
            assert abs(curve(ray) - max(a, 1 - a)) <= 2 * step


def test_combined_degenerate_interval_warns(inv_logistic_sample, grid):
    fit = CondExtFit.from_alphas(1.0, 1.0)
    with pytest.warns(RuntimeWarning, match="degenerate"):
        curve, coef, _ = combined("cl", inv_logistic_sample, grid, fit=fit)
    assert coef is None
    assert np.array_equal(curve.values, lower_bound(grid))


# --- estimator API -----------------------------------------------------------

@pytest.mark.parametrize("name", ESTIMATORS)
def test_processed_outputs_are_valid(name, inv_logistic_sample):
    est = make_estimator(name).fit(inv_logistic_sample)
    assert est.curve_.processed
    assert check_properties(est.curve_).ok
    assert est.predict(0.5) == pytest.approx(TRUE_MID, abs=0.15)
    assert (est.cond_fit_ is not None) == name.endswith("2")


def test_sklearn_params_and_clone(inv_logistic_sample):
    est = CompositeLikelihoodADF(k=5, conditional=True)
    assert est.get_params()["k"] == 5
    twin = clone(est).set_params(k=6)
    assert twin.k == 6 and est.k == 5
    est.fit(inv_logistic_sample)
    assert est.coef_.k == 5 and est.coef_.domain is not None


def test_score_prefers_matching_fit(inv_logistic_sample, independent_sample):
    held_out = sample_copula(STUDY_COPULAS[6], 10_000, seed=99)
    good = HillADF().fit(inv_logistic_sample)
    bad = HillADF().fit(independent_sample)
    assert good.score(held_out) > bad.score(held_out)


def test_make_estimator_unknown():
    with pytest.raises(ValueError, match="unknown estimator"):
        make_estimator("st")


def test_predict_rejects_out_of_range(inv_logistic_sample):
    est = HillADF().fit(inv_logistic_sample)
    with pytest.raises(ValueError):
        est.predict(1.5)
