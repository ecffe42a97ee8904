import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from adfest.exceptions import DataError
from adfest.minproj import (BivariateSample, MinProjectionTable, angular_grid, check_grid,
                            excesses, min_projection)


def test_grid_shape():
    g = angular_grid()
    assert g.size == 1001
    assert g[0] == 0.0 and g[500] == 0.5 and g[-1] == 1.0
    assert np.allclose(np.diff(g), 1e-3)


@pytest.mark.parametrize("bad", [2, 1000, 1])
def test_grid_rejects_even_or_tiny(bad):
    with pytest.raises(ValueError):
        angular_grid(bad)


def test_check_grid_needs_midpoint():
    with pytest.raises(ValueError):
        check_grid([0.0, 0.4, 1.0])


def test_endpoint_projections():
    X = np.array([[1.0, 2.0], [3.0, 0.5]])
    assert np.array_equal(min_projection(X, 0.0), X[:, 1])
    assert np.array_equal(min_projection(X, 1.0), X[:, 0])
    assert np.allclose(min_projection(X, 0.5), [2.0, 1.0])


def test_excesses_keep_order_and_sign():
    t = np.array([5.0, 1.0, 7.0, 2.0, 9.0])
    u, exc = excesses(t, 0.5)
    assert u == 5.0
    assert np.array_equal(exc, [2.0, 4.0])


def test_excesses_all_tied():
    with pytest.raises(DataError, match="no exceedances"):
        excesses(np.ones(10), 0.9)


def test_sample_rejects_negative_exponential():
    with pytest.raises(DataError):
        BivariateSample([1.0, -1.0], [1.0, 1.0])
    s = BivariateSample([1.0, -1.0], [1.0, 1.0], margin_tag="original")
    assert s.values.shape == (2, 2)


@settings(max_examples=40, deadline=None)
@given(arrays(float, (60, 2), elements=st.floats(0, 20)), st.sampled_from([0.5, 0.8, 0.9, 0.95]))
def test_table_matches_direct_computation(X, q):
    grid = angular_grid(11)
    table = MinProjectionTable(X, grid)
    u_all, counts, sums = table.exceedance_stats(q)
    for i, w in enumerate(grid):
        t = min_projection(X, w)
        u = np.quantile(t, q)
        assert u_all[i] == pytest.approx(u, rel=1e-12, abs=1e-12)
        exc = t[t > u] - u
        assert counts[i] == exc.size
        assert sums[i] == pytest.approx(exc.sum(), rel=1e-10, abs=1e-10)
