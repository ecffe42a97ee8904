import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from adfest.exceptions import DataError
from adfest.margins import (SemiParametricMargins, fit_gpd, fit_marginal, gpd_negloglik, gpd_qq,
                            gpd_quantile)


@pytest.mark.parametrize("xi", [-0.2, 0.0, 0.3])
def test_gpd_fit_matches_scipy_likelihood(xi):
    excess = stats.genpareto.rvs(xi, scale=2.0, size=3000, random_state=np.random.default_rng(1))
    sigma, xi_hat = fit_gpd(excess)
    c, _, scale = stats.genpareto.fit(excess, floc=0)
    ours = gpd_negloglik(sigma, xi_hat, excess)
    theirs = -stats.genpareto.logpdf(excess, c, scale=scale).sum()
    assert ours <= theirs + 1e-6
    assert xi_hat == pytest.approx(xi, abs=0.08)
    assert sigma == pytest.approx(2.0, rel=0.1)


def test_gpd_errors():
    with pytest.raises(DataError, match="insufficient"):
        fit_gpd(np.ones(5))
    with pytest.raises(DataError, match="zero-variance"):
        fit_gpd(np.ones(50))


def test_gpd_quantile_inverts_cdf():
    p = np.linspace(0.01, 0.99, 9)
    q = gpd_quantile(p, 1.5, 0.2)
    assert np.allclose(stats.genpareto.cdf(q, 0.2, scale=1.5), p)


@pytest.fixture(scope="module")
def gumbel_model():
    data = stats.gumbel_r.rvs(size=5000, random_state=np.random.default_rng(3))
    return data, fit_marginal(data, 0.95)


def test_threshold_continuity(gumbel_model):
    _, m = gumbel_model
    eps = 1e-9
    e_u = -np.log(0.05)
    assert m.to_exponential(m.u) == pytest.approx(e_u, abs=1e-9)
    assert m.to_exponential(m.u + eps) == pytest.approx(e_u, abs=1e-6)
    assert m.cdf(m.sorted_sample[0]) == 0.0


def test_round_trip(gumbel_model):
    data, m = gumbel_model
    e = m.to_exponential(data)
    assert np.allclose(m.from_exponential(e), data, rtol=1e-8, atol=1e-8)


def test_transformed_margins_are_exponential():
    data = stats.lognorm.rvs(0.8, size=20_000, random_state=np.random.default_rng(4))
    e = SemiParametricMargins().fit_transform(data[:, None].repeat(2, axis=1))
    assert stats.kstest(e[:, 0], "expon").statistic < 0.01


@pytest.mark.filterwarnings("ignore:values beyond")
@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_to_exponential_monotone(seed):
    data = np.random.default_rng(seed).standard_t(4, size=400)
    m = fit_marginal(data)
    grid = np.linspace(data.min(), data.max() + 1, 200)
    assert np.all(np.diff(m.to_exponential(grid)) >= -1e-12)


def test_margin_errors():
    with pytest.raises(DataError):
        fit_marginal(np.arange(50.0))
    with pytest.raises(DataError):
        fit_marginal(np.r_[np.arange(200.0), np.nan])


def test_gpd_qq_shape(gumbel_model):
    _, m = gumbel_model
    qq = gpd_qq(m, n_boot=200, seed=0)
    assert qq.shape[1] == 4
    assert np.all(np.diff(qq[:, 0]) > 0)
    assert np.all(qq[:, 2] <= qq[:, 3])
