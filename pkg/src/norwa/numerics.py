"""Small shared numerical kernels: finite-difference stencils and a
fourth-order cumulative quadrature on uniform grids."""

from __future__ import annotations

import numpy as np


def central_difference(fn, t, h: float = 1e-5):
    """Fourth-order central difference of a callable at time(s) t."""
    t = np.asarray(t, dtype=float)
    f1 = np.asarray(fn(t - 2 * h))
    f2 = np.asarray(fn(t - h))
    f3 = np.asarray(fn(t + h))
    f4 = np.asarray(fn(t + 2 * h))
    return (f1 - 8.0 * f2 + 8.0 * f3 - f4) / (12.0 * h)


def derivative_series(y: np.ndarray, dt: float) -> np.ndarray:
    """Fourth-order first derivative of a uniformly sampled series.

    Five-point central stencil in the interior, matching one-sided stencils
    on the two samples at each boundary. Needs at least five samples.
    """
    y = np.asarray(y)
    n = len(y)
    if n < 5:
        raise ValueError("derivative_series needs at least 5 samples")
    d = np.empty_like(y, dtype=np.result_type(y.dtype, float))
    d[2:-2] = (y[:-4] - 8.0 * y[1:-3] + 8.0 * y[3:-1] - y[4:]) / (12.0 * dt)
    d[0] = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * dt)
    d[1] = (-3.0 * y[0] - 10.0 * y[1] + 18.0 * y[2] - 6.0 * y[3] + y[4]) / (12.0 * dt)
    d[-2] = (3.0 * y[-1] + 10.0 * y[-2] - 18.0 * y[-3] + 6.0 * y[-4] - y[-5]) / (12.0 * dt)
    d[-1] = (25.0 * y[-1] - 48.0 * y[-2] + 36.0 * y[-3] - 16.0 * y[-4] + 3.0 * y[-5]) / (12.0 * dt)
    return d


def cumulative_integral(y: np.ndarray, dt: float) -> np.ndarray:
    """Fourth-order cumulative integral of a uniformly sampled series.

    Each step integrates the cubic through the four nearest samples, so the
    result matches composite Simpson accuracy while being cumulative at every
    sample. Needs at least four samples. The first entry is zero.
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n < 4:
        raise ValueError("cumulative_integral needs at least 4 samples")
    steps = np.empty(n - 1, dtype=float)
    steps[0] = dt * (9.0 * y[0] + 19.0 * y[1] - 5.0 * y[2] + y[3]) / 24.0
    steps[1:-1] = dt * (-y[:-3] + 13.0 * y[1:-2] + 13.0 * y[2:-1] - y[3:]) / 24.0
    steps[-1] = dt * (9.0 * y[-1] + 19.0 * y[-2] - 5.0 * y[-3] + y[-4]) / 24.0
    out = np.empty(n, dtype=float)
    out[0] = 0.0
    np.cumsum(steps, out=out[1:])
    return out


def newton_refine(f, df, x0: float, tol: float = 1e-13, max_iter: int = 60) -> float:
    """Newton iteration for a root of f near x0; falls back to x0 on stall."""
    x = float(x0)
    for _ in range(max_iter):
        fx = float(f(x))
        dfx = float(df(x))
        if dfx == 0.0:
            break
        step = fx / dfx
        x -= step
        if abs(step) < tol * max(1.0, abs(x)):
            break
    return x
