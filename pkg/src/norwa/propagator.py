"""Fixed-step fourth-order propagation of the time-dependent Schroedinger
equation i d/dt psi = H(t) psi for 2x2 Hamiltonians.

The classic RK4 kernel is used with the Hamiltonian evaluated at t, t+dt/2
and t+dt (no interpolation; evaluators are closed-form or live on the
matching half-step grid). Because the equation is linear, the kernel for one
step is a 2x2 matrix that depends only on those three evaluations, so all
step matrices are built vectorized up front and applied in sequence. The
same matrices power a final-state-only path that reduces the whole product
pairwise, used by the optimizers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    Hamiltonian2x2,
    NumericsError,
    Picture,
    ResolutionError,
    StateVector,
    TimeGrid,
)

__all__ = [
    "PropagationResult",
    "propagate",
    "propagate_final",
    "propagate_step",
    "fidelity_inversion",
]

_NORM_TOL = 1e-10


@dataclass(frozen=True)
class PropagationResult:
    """State trajectory with populations and conservation diagnostics."""

    grid: TimeGrid
    states: np.ndarray  # (n_steps + 1, 2) complex
    p_g: np.ndarray
    p_e: np.ndarray
    norm_error: np.ndarray  # | ||psi|| - 1 |
    picture: Picture

    def state(self, k: int) -> StateVector:
        return StateVector.from_array(self.states[k])

    @property
    def max_norm_error(self) -> float:
        return float(np.max(self.norm_error))


def fidelity_inversion(result: PropagationResult) -> float:
    """Final excited-state population P_e(tf)."""
    return float(result.p_e[-1])


def _half_grid_elements(h: Hamiltonian2x2, grid: TimeGrid):
    times = np.linspace(grid.t0, grid.tf, 2 * grid.n_steps + 1)
    hgg, hge, heg, hee = h.elements(times)
    for name, arr in (("h_gg", hgg), ("h_ge", hge), ("h_eg", heg), ("h_ee", hee)):
        bad = ~np.isfinite(arr)
        if np.any(bad):
            t_bad = times[np.argmax(bad)]
            raise NumericsError(f"non-finite Hamiltonian sample: {name} at t = {t_bad:.9g} ns")
    return times, (hgg, hge, heg, hee)


def _estimate_steps_per_period(elements, dt: float) -> float:
    """Steps per period of the fastest frequency seen in the sampled elements.

    Two rates are combined: the slew rate of each element relative to its own
    peak magnitude (a rotating phasor of constant magnitude gives exactly its
    angular frequency), and the largest spectral gap, which covers constant
    Hamiltonians whose phases still have to be resolved.
    """
    hgg, hge, _, hee = (np.asarray(a) for a in elements)
    w_max = float(np.max(np.sqrt(0.25 * np.abs(hee - hgg) ** 2 + np.abs(hge) ** 2)))
    global_scale = max(float(np.max(np.abs(np.array(elements)))), 1e-300)
    half_dt = dt / 2.0
    for arr in elements:
        scale = float(np.max(np.abs(arr)))
        if scale < 1e-12 * global_scale:
            continue
        w_max = max(w_max, float(np.max(np.abs(np.diff(arr)))) / (half_dt * scale))
    if w_max == 0.0:
        return np.inf
    return (2.0 * np.pi / w_max) / dt


def _check_resolution(elements, dt: float) -> None:
    spp = _estimate_steps_per_period(elements, dt)
    if spp < 4.0:
        raise ResolutionError(
            f"grid resolves the Hamiltonian at only {spp:.3g} steps per period; need >= 4"
        )
    if spp < 20.0:
        warnings.warn(
            f"marginal resolution: {spp:.3g} steps per period of the fastest "
            "Hamiltonian oscillation",
            stacklevel=3,
        )


def _mmul(m1, m2):
    a1, b1, c1, d1 = m1
    a2, b2, c2, d2 = m2
    return (
        a1 * a2 + b1 * c2,
        a1 * b2 + b1 * d2,
        c1 * a2 + d1 * c2,
        c1 * b2 + d1 * d2,
    )


def _rk4_step_matrix(e0, e_half, e1, dt: float):
    """RK4 one-step matrix from H at the step start, midpoint and end.

    Components may be scalars or aligned arrays (one entry per step).
    """
    a1 = tuple(-1j * np.asarray(e, dtype=complex) for e in e0)
    a2 = tuple(-1j * np.asarray(e, dtype=complex) for e in e_half)
    a3 = tuple(-1j * np.asarray(e, dtype=complex) for e in e1)
    one = np.ones_like(a1[0])
    zero = np.zeros_like(a1[0])
    ident = (one, zero, zero, one)

    def plus_scaled(k, s):
        return (ident[0] + s * k[0], s * k[1], s * k[2], ident[3] + s * k[3])

    k1 = a1
    k2 = _mmul(a2, plus_scaled(k1, dt / 2.0))
    k3 = _mmul(a2, plus_scaled(k2, dt / 2.0))
    k4 = _mmul(a3, plus_scaled(k3, dt))
    return tuple(
        ident[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) for i in range(4)
    )


def _step_matrices(h: Hamiltonian2x2, grid: TimeGrid, check_resolution: bool):
    _, (hgg, hge, heg, hee) = _half_grid_elements(h, grid)
    dt = grid.dt
    if check_resolution:
        _check_resolution((hgg, hge, heg, hee), dt)
    e0 = (hgg[0:-2:2], hge[0:-2:2], heg[0:-2:2], hee[0:-2:2])
    e_half = (hgg[1::2], hge[1::2], heg[1::2], hee[1::2])
    e1 = (hgg[2::2], hge[2::2], heg[2::2], hee[2::2])
    return _rk4_step_matrix(e0, e_half, e1, dt)


def _check_psi0(psi0) -> np.ndarray:
    arr = psi0.as_array() if isinstance(psi0, StateVector) else np.asarray(psi0, dtype=complex)
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1.0) > _NORM_TOL:
        raise ValueError(f"initial state must be unit norm, got ||psi0|| = {norm!r}")
    return arr


def propagate(
    h: Hamiltonian2x2,
    psi0,
    grid: TimeGrid,
    check_resolution: bool = True,
) -> PropagationResult:
    """Integrate the Schroedinger equation over the grid.

    Deterministic for identical inputs. Raises on non-unit initial states,
    non-finite Hamiltonian samples, and hopelessly coarse grids.
    """
    arr = _check_psi0(psi0)
    r00, r01, r10, r11 = _step_matrices(h, grid, check_resolution)
    n = grid.n_steps
    states = np.empty((n + 1, 2), dtype=complex)
    cg, ce = complex(arr[0]), complex(arr[1])
    states[0, 0], states[0, 1] = cg, ce
    l00, l01, l10, l11 = r00.tolist(), r01.tolist(), r10.tolist(), r11.tolist()
    for k in range(n):
        cg, ce = l00[k] * cg + l01[k] * ce, l10[k] * cg + l11[k] * ce
        states[k + 1, 0] = cg
        states[k + 1, 1] = ce
    p_g = np.abs(states[:, 0]) ** 2
    p_e = np.abs(states[:, 1]) ** 2
    norm_error = np.abs(np.sqrt(p_g + p_e) - 1.0)
    return PropagationResult(grid, states, p_g, p_e, norm_error, h.picture)


def propagate_final(
    h: Hamiltonian2x2,
    psi0,
    grid: TimeGrid,
    check_resolution: bool = True,
) -> np.ndarray:
    """Final state only, via pairwise reduction of the step matrices.

    Same step matrices as ``propagate`` multiplied in a balanced order; used
    where only psi(tf) matters (objective evaluations).
    """
    arr = _check_psi0(psi0)
    comps = [np.asarray(c) for c in _step_matrices(h, grid, check_resolution)]
    while comps[0].size > 1:
        n = comps[0].size
        m = n // 2
        left = tuple(c[0 : 2 * m : 2] for c in comps)
        right = tuple(c[1 : 2 * m : 2] for c in comps)
        prod = _mmul(right, left)  # later step applied after earlier step
        if n % 2:
            comps = [np.append(p, c[-1]) for p, c in zip(prod, comps)]
        else:
            comps = list(prod)
    u00, u01, u10, u11 = (complex(c[0]) for c in comps)
    return np.array([u00 * arr[0] + u01 * arr[1], u10 * arr[0] + u11 * arr[1]])


def propagate_step(h_start, h_mid, h_end, psi, dt: float) -> StateVector:
    """One RK4 step from three Hamiltonian evaluations (2x2 matrices).

    dt = 0 returns the state unchanged.
    """
    if dt < 0.0:
        raise ValueError("dt must be non-negative")
    arr = psi.as_array() if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    if dt == 0.0:
        return StateVector.from_array(arr)

    def comps(m):
        m = np.asarray(m, dtype=complex)
        return (m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    r = _rk4_step_matrix(comps(h_start), comps(h_mid), comps(h_end), dt)
    return StateVector(
        complex(r[0] * arr[0] + r[1] * arr[1]),
        complex(r[2] * arr[0] + r[3] * arr[1]),
    )
