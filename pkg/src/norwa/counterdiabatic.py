"""Counterdiabatic repair of a fast sweep that fails to invert on its own.

Starting from the exact interaction-picture Hamiltonian with coupling Omega
and detuning Delta, the counterdiabatic term

    H1 = (i / (2 C1)) [[-B1/2, A1], [-A1*, B1/2]],
    A1 = dOmega/dt * Delta - dDelta/dt * Omega,
    B1 = conj(dOmega/dt) * Omega - dOmega/dt * conj(Omega)   (purely imaginary),
    C1 = Delta^2 + |Omega|^2,

suppresses transitions between the instantaneous eigenstates of the original
Hamiltonian. Adding it yields a total Hamiltonian of the same form with
Omega~ = Omega + i A1/C1 and Delta~ = Delta + i B1/(2 C1), but this pair no
longer shares a single phase function: the physically required structure
Omega~ = Omega_R~ (1 + exp(-2i phi~)) holds only for a repaired phase

    phi~ = -arg(Omega~) + 2 pi n,   n integer chosen for continuity.

The repaired Rabi frequency Omega_R~ = |Omega~| / (2 cos phi~) is singular at
the zeros of cos(phi~), yet the synthesized field 2 Omega_R~ cos(phi~), which
equals |Omega~| pointwise, stays finite everywhere. A matching transition
frequency omega0~ = Delta~ + dphi~/dt completes a consistent Schroedinger
picture.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DegeneracyError,
    Hamiltonian2x2,
    Picture,
    PulseSpec,
    SingularSampleError,
    TimeGrid,
)
from .numerics import central_difference, derivative_series

__all__ = [
    "AllenEberlyParams",
    "allen_eberly_pulse",
    "CdDecomposition",
    "cd_term",
    "total_hamiltonian",
    "extract_phase_tilde",
    "RepairedPulse",
    "repair_consistency",
    "h_s_doubleprime",
]

# guard against division by C1 at a level crossing, (rad/ns)^2
C1_FLOOR = 1e-18
# |cos(phi~)| below this marks the repaired Rabi frequency as singular
SINGULARITY_THRESHOLD = 1e-6
# default step for finite-difference pulse derivatives, ns
FD_STEP = 1e-5


@dataclass(frozen=True)
class AllenEberlyParams:
    """Hyperbolic sweep at constant carrier frequency.

    Detuning (2 delta^2 t0 / pi) tanh[pi (t - tf/2) / (2 t0)] with a
    bell-shaped sech Rabi envelope of peak omega_m by default; the
    "sinh" envelope variant replaces sech by sinh (odd, unbounded at the
    edges). Phase is omega_l * t.
    """

    omega_m: float
    delta: float
    t0: float
    tf: float
    omega_l: float
    envelope: str = "sech"

    def __post_init__(self):
        if self.envelope not in ("sech", "sinh"):
            raise ValueError(f"envelope must be 'sech' or 'sinh', got {self.envelope!r}")
        for name in ("omega_m", "delta", "t0", "tf", "omega_l"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


def allen_eberly_pulse(p: AllenEberlyParams) -> PulseSpec:
    rate = math.pi / (2.0 * p.t0)
    sweep = 2.0 * p.delta**2 * p.t0 / math.pi

    def x(t):
        return rate * (np.asarray(t, dtype=float) - p.tf / 2.0)

    if p.envelope == "sech":

        def rabi(t):
            return p.omega_m / np.cosh(x(t))

        def rabi_rate(t):
            xv = x(t)
            return -p.omega_m * rate * np.tanh(xv) / np.cosh(xv)

    else:  # sinh

        def rabi(t):
            return p.omega_m * np.sinh(x(t))

        def rabi_rate(t):
            return p.omega_m * rate * np.cosh(x(t))

    def omega0(t):
        return sweep * np.tanh(x(t)) + p.omega_l

    def omega0_rate(t):
        return p.delta**2 / np.cosh(x(t)) ** 2

    def phase(t):
        return p.omega_l * np.asarray(t, dtype=float)

    def phase_rate(t):
        return np.full_like(np.asarray(t, dtype=float), p.omega_l)

    def phase_accel(t):
        return np.zeros_like(np.asarray(t, dtype=float))

    return PulseSpec(
        rabi=rabi,
        phase=phase,
        phase_rate=phase_rate,
        omega0=omega0,
        rabi_rate=rabi_rate,
        omega0_rate=omega0_rate,
        phase_accel=phase_accel,
    )


def _pulse_derivatives(pulse: PulseSpec, t, fd_step: float = FD_STEP):
    """Omega, dOmega/dt, Delta, dDelta/dt at time(s) t.

    Analytic rates are used when the pulse provides them; otherwise
    fourth-order central differences with step ``fd_step``.
    """
    t = np.asarray(t, dtype=float)
    rabi = np.asarray(pulse.rabi(t))
    phi = np.asarray(pulse.phase(t))
    dphi = np.asarray(pulse.phase_rate(t))
    rot = np.exp(-2j * phi)
    omega = rabi * (1.0 + rot)
    delta = np.asarray(pulse.omega0(t)) - dphi

    drabi = (
        np.asarray(pulse.rabi_rate(t))
        if pulse.rabi_rate is not None
        else central_difference(pulse.rabi, t, fd_step)
    )
    domega = drabi * (1.0 + rot) - 2j * dphi * rabi * rot

    dw0 = (
        np.asarray(pulse.omega0_rate(t))
        if pulse.omega0_rate is not None
        else central_difference(pulse.omega0, t, fd_step)
    )
    ddphi = (
        np.asarray(pulse.phase_accel(t))
        if pulse.phase_accel is not None
        else central_difference(pulse.phase_rate, t, fd_step)
    )
    return omega, domega, delta, dw0 - ddphi


def _abc(pulse: PulseSpec, t, fd_step: float = FD_STEP):
    omega, domega, delta, ddelta = _pulse_derivatives(pulse, t, fd_step)
    a1 = domega * delta - ddelta * omega
    b1 = np.conj(domega) * omega - domega * np.conj(omega)
    c1 = (delta**2 + np.abs(omega) ** 2).real
    if np.any(c1 < C1_FLOOR):
        t_bad = np.asarray(t, dtype=float).reshape(-1)[
            int(np.argmax(np.atleast_1d(c1 < C1_FLOOR)))
        ]
        raise DegeneracyError(f"CD undefined at crossing: C1 < {C1_FLOOR} at t = {t_bad:.9g} ns")
    return omega, delta, a1, b1, c1


def cd_term(h: Hamiltonian2x2, pulse: PulseSpec, t: float, fd_step: float = FD_STEP) -> np.ndarray:
    """Counterdiabatic matrix H1(t) for the interaction-picture Hamiltonian."""
    if h.picture is not Picture.I:
        raise ValueError("cd_term expects the interaction-picture Hamiltonian")
    _, _, a1, b1, c1 = _abc(pulse, float(t), fd_step)
    a1 = complex(a1)
    b1 = complex(b1)
    c1 = float(c1)
    hgg = (1j * (-b1 / 2.0) / (2.0 * c1)).real
    hge = 1j * a1 / (2.0 * c1)
    return np.array([[hgg, hge], [np.conj(hge), -hgg]], dtype=complex)


@dataclass(frozen=True)
class CdDecomposition:
    """Series of the counterdiabatic decomposition on a grid."""

    grid: TimeGrid
    a1: np.ndarray
    b1: np.ndarray
    c1: np.ndarray
    omega_tilde: np.ndarray
    delta_tilde: np.ndarray


def total_hamiltonian(
    h: Hamiltonian2x2,
    pulse: PulseSpec,
    grid: TimeGrid | None = None,
    fd_step: float = FD_STEP,
):
    """Reference-plus-counterdiabatic Hamiltonian, and its decomposition.

    Returns a closed-form Hamiltonian with elements (-Delta~/2, Omega~/2;
    Omega~*/2, Delta~/2). When a grid is supplied the decomposition series
    (A1, B1, C1, Omega~, Delta~) sampled on it is returned as well,
    otherwise None.
    """
    if h.picture is not Picture.I:
        raise ValueError("total_hamiltonian expects the interaction-picture Hamiltonian")

    def tilde(t):
        omega, delta, a1, b1, c1 = _abc(pulse, t, fd_step)
        omega_t = omega + 1j * a1 / c1
        delta_t = delta + (1j * b1 / (2.0 * c1)).real  # B1 purely imaginary
        return omega_t, delta_t, a1, b1, c1

    def element_fn(t):
        omega_t, delta_t, _, _, _ = tilde(t)
        d = delta_t.astype(complex)
        return -d / 2.0, omega_t / 2.0, np.conj(omega_t) / 2.0, d / 2.0

    ham = Hamiltonian2x2(Picture.I_PRIME, element_fn)
    decomp = None
    if grid is not None:
        omega_t, delta_t, a1, b1, c1 = tilde(grid.samples)
        decomp = CdDecomposition(grid, a1, b1, c1, omega_t, delta_t)
    return ham, decomp


def extract_phase_tilde(omega_tilde: np.ndarray, grid: TimeGrid):
    """Continuous phase phi~ = -arg(Omega~) + 2 pi n from a sampled coupling.

    The starting branch lies in (-pi, pi]; subsequent samples pick the integer
    n that keeps consecutive differences inside (-pi, pi]. Returns the phase
    series and the integer branch series.
    """
    omega_tilde = np.asarray(omega_tilde, dtype=complex)
    if len(omega_tilde) != grid.n_steps + 1:
        raise ValueError("series length must match grid samples")
    mags = np.abs(omega_tilde)
    floor = 1e-14 * float(np.max(mags))
    if np.any(mags < floor):
        t_bad = grid.samples[int(np.argmax(mags < floor))]
        raise SingularSampleError(
            f"phase undefined at zero of the coupling, t = {t_bad:.9g} ns"
        )
    principal = np.angle(omega_tilde)
    raw = -principal
    if raw[0] <= -math.pi:
        raw[0] += 2.0 * math.pi
    phase = np.unwrap(raw)
    branch = np.rint((phase + principal) / (2.0 * math.pi)).astype(int)
    return phase, branch


@dataclass(frozen=True)
class RepairedPulse:
    """Consistent control synthesized from the counterdiabatic Hamiltonian.

    ``rabi_tilde`` is NaN at samples where |cos(phi~)| falls below the
    singularity threshold (see ``singular_mask``); ``field`` carries
    2 Omega_R~ cos(phi~), which is finite everywhere and equals
    |Omega~| pointwise.
    """

    grid: TimeGrid
    phase_tilde: np.ndarray
    rabi_tilde: np.ndarray
    omega0_tilde: np.ndarray
    field: np.ndarray
    branch_indices: np.ndarray
    singular_mask: np.ndarray


def repair_consistency(
    decomp: CdDecomposition, pulse: PulseSpec, grid: TimeGrid
) -> RepairedPulse:
    """Extract phi~, Omega_R~, omega0~ and the synthesized field on the grid.

    Singular Rabi samples are flagged, not fatal; the field bypasses them.
    The dphi~/dt term of omega0~ uses the fourth-order stencil on the
    unwrapped phase series.
    """
    if decomp.grid is not grid and not np.array_equal(decomp.grid.samples, grid.samples):
        raise ValueError("decomposition was sampled on a different grid")
    phase_tilde, branch = extract_phase_tilde(decomp.omega_tilde, grid)
    cos_pt = np.cos(phase_tilde)
    field = np.abs(decomp.omega_tilde)
    singular = np.abs(cos_pt) < SINGULARITY_THRESHOLD
    # a sign change of cos(phi~) between samples brackets a pole of the
    # repaired Rabi frequency; flag both neighbours of the crossing
    crossing = np.signbit(cos_pt[:-1]) != np.signbit(cos_pt[1:])
    singular[:-1] |= crossing
    singular[1:] |= crossing
    rabi_tilde = np.full_like(field, np.nan)
    np.divide(field, 2.0 * cos_pt, out=rabi_tilde, where=~singular)
    dphase = derivative_series(phase_tilde, grid.dt)
    omega0_tilde = decomp.delta_tilde + dphase
    return RepairedPulse(
        grid=grid,
        phase_tilde=phase_tilde,
        rabi_tilde=rabi_tilde,
        omega0_tilde=omega0_tilde,
        field=field,
        branch_indices=branch,
        singular_mask=singular,
    )


def h_s_doubleprime(repaired: RepairedPulse) -> Hamiltonian2x2:
    """Schroedinger-picture Hamiltonian of the repaired pulse.

    Matrix (1/2) [[-omega0~, 2 Omega_R~ cos phi~], [2 Omega_R~ cos phi~,
    omega0~]], built from the field series so singular Rabi samples are never
    evaluated alone. Defined on the repair grid (sampled, no interpolation).
    """
    off = repaired.field / 2.0
    return Hamiltonian2x2.from_series(
        Picture.S_DOUBLEPRIME,
        repaired.grid,
        hgg=-repaired.omega0_tilde / 2.0,
        hge=off,
        hee=repaired.omega0_tilde / 2.0,
    )
