import numpy as np
import pytest

from norwa.numerics import (
    central_difference,
    cumulative_integral,
    derivative_series,
    newton_refine,
)


def test_central_difference_fourth_order():
    f = np.sin
    err_h = abs(central_difference(f, 1.0, 1e-2) - np.cos(1.0))
    err_h2 = abs(central_difference(f, 1.0, 5e-3) - np.cos(1.0))
    assert err_h / err_h2 == pytest.approx(16.0, rel=0.2)


def test_derivative_series_matches_analytic():
    ts = np.linspace(0.0, 2.0, 401)
    y = np.exp(0.7 * ts) * np.sin(3.0 * ts)
    dy = np.exp(0.7 * ts) * (0.7 * np.sin(3.0 * ts) + 3.0 * np.cos(3.0 * ts))
    got = derivative_series(y, ts[1] - ts[0])
    assert np.max(np.abs(got - dy)) < 2e-7


def test_derivative_series_boundary_stencils():
    ts = np.linspace(0.0, 1.0, 101)
    y = ts**3
    got = derivative_series(y, ts[1] - ts[0])
    # cubic is exact for the 4th-order stencils everywhere, including edges
    assert np.max(np.abs(got - 3.0 * ts**2)) < 1e-12


def test_cumulative_integral_matches_analytic():
    ts = np.linspace(0.0, 3.0, 601)
    y = np.cos(2.0 * ts)
    got = cumulative_integral(y, ts[1] - ts[0])
    assert got[0] == 0.0
    assert np.max(np.abs(got - np.sin(2.0 * ts) / 2.0)) < 2e-10


def test_cumulative_integral_order():
    exact = (np.exp(1.0) - 1.0)

    def run(n):
        ts = np.linspace(0.0, 1.0, n + 1)
        return abs(cumulative_integral(np.exp(ts), ts[1] - ts[0])[-1] - exact)

    assert run(100) / run(200) == pytest.approx(16.0, rel=0.3)


def test_newton_refine_finds_root():
    root = newton_refine(lambda x: x**2 - 2.0, lambda x: 2.0 * x, 1.0)
    assert root == pytest.approx(np.sqrt(2.0), abs=1e-12)


@pytest.mark.parametrize("fn,n", [(derivative_series, 4), (cumulative_integral, 3)])
def test_minimum_lengths_enforced(fn, n):
    with pytest.raises(ValueError):
        fn(np.zeros(n), 0.1)
