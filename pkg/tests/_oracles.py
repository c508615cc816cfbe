"""Independent oracles the production code is checked against.

Everything here recomputes expected values along a different route than the
implementation: the counterdiabatic matrix from the eigenbasis sum with
finite-differenced dH/dt, populations from the textbook resonance formula,
and brute-force quadrature/differentiation.
"""

import numpy as np

from norwa import Hamiltonian2x2, eigensystem


def spectral_cd_matrix(h: Hamiltonian2x2, t: float, fd_step: float = 1e-5) -> np.ndarray:
    """i sum_{m != n} |m><m| dH/dt |n><n| / (E_n - E_m) evaluated directly."""
    es = eigensystem(h, t)
    dh = (
        h.matrix(t - 2 * fd_step)
        - 8.0 * h.matrix(t - fd_step)
        + 8.0 * h.matrix(t + fd_step)
        - h.matrix(t + 2 * fd_step)
    ) / (12.0 * fd_step)
    proj_p = np.outer(es.v_plus, es.v_plus.conj())
    proj_m = np.outer(es.v_minus, es.v_minus.conj())
    out = 1j * proj_p @ dh @ proj_m / (es.e_minus - es.e_plus)
    out += 1j * proj_m @ dh @ proj_p / (es.e_plus - es.e_minus)
    return out


def rabi_populations(omega_r: float, times: np.ndarray) -> np.ndarray:
    """P_e(t) = sin^2(Omega_R t / 2) for resonant constant driving of |g>."""
    return np.sin(omega_r * np.asarray(times) / 2.0) ** 2


def brute_force_integral(fn, t_end: float, n: int = 200001) -> float:
    """Dense trapezoidal quadrature, refined by Richardson extrapolation."""
    ts = np.linspace(0.0, t_end, n)
    full = np.trapezoid(fn(ts), ts)
    half = np.trapezoid(fn(ts[::2]), ts[::2])
    return float(full + (full - half) / 3.0)
