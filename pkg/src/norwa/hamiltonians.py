"""Two-level Hamiltonians in every picture, picture transformations, and the
closed-form eigensystem of the exact interaction-picture Hamiltonian.

Conventions (hbar = 1, basis ordered (|g>, |e>)):

* Schroedinger picture: diagonal -/+ omega0/2, off-diagonal Omega_R cos(phi).
* Interaction picture:  diagonal -/+ Delta/2 with Delta = omega0 - dphi/dt,
  off-diagonal Omega/2 with Omega = Omega_R (1 + exp(-2i phi)).
* RWA picture: as interaction picture but off-diagonal Omega_R/2, the
  counter-rotating exp(-2i phi) term dropped.

The two pictures are linked by the diagonal unitary
U_phi = diag(exp(i phi/2), exp(-i phi/2)) via H_I = U^dag (H_S - H_phi) U
with H_phi = diag(-dphi/dt, +dphi/dt)/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Hamiltonian2x2, Picture, PulseSpec

__all__ = [
    "detuning",
    "omega_complex",
    "h_interaction",
    "h_schrodinger",
    "h_rwa",
    "u_phi",
    "transform_between_pictures",
    "EigenSystem",
    "eigensystem",
    "eigensystem_series",
]

def detuning(pulse: PulseSpec, t):
    """Delta(t) = omega0(t) - dphi/dt(t)."""
    return np.asarray(pulse.omega0(t)) - np.asarray(pulse.phase_rate(t))


def omega_complex(pulse: PulseSpec, t):
    """Omega(t) = Omega_R(t) (1 + exp(-2i phi(t))), the full complex coupling.

    Identically equal to 2 Omega_R cos(phi) exp(-i phi).
    """
    return np.asarray(pulse.rabi(t)) * (1.0 + np.exp(-2j * np.asarray(pulse.phase(t))))


def h_interaction(pulse: PulseSpec) -> Hamiltonian2x2:
    """Exact Hamiltonian in the field-adapted interaction picture."""

    def element_fn(t):
        d = detuning(pulse, t).astype(complex)
        om = omega_complex(pulse, t)
        return -d / 2.0, om / 2.0, np.conj(om) / 2.0, d / 2.0

    return Hamiltonian2x2(Picture.I, element_fn)


def h_schrodinger(pulse: PulseSpec) -> Hamiltonian2x2:
    """Bare Schroedinger-picture Hamiltonian of the driven atom."""

    def element_fn(t):
        w0 = np.asarray(pulse.omega0(t), dtype=complex)
        coupling = (np.asarray(pulse.rabi(t)) * np.cos(np.asarray(pulse.phase(t)))).astype(
            complex
        )
        return -w0 / 2.0, coupling, coupling, w0 / 2.0

    return Hamiltonian2x2(Picture.S, element_fn)


def h_rwa(pulse: PulseSpec) -> Hamiltonian2x2:
    """Rotating-wave approximated Hamiltonian; the field phase is absent from
    the off-diagonal elements."""

    def element_fn(t):
        d = detuning(pulse, t).astype(complex)
        r = np.asarray(pulse.rabi(t), dtype=complex)
        return -d / 2.0, r / 2.0, r / 2.0, d / 2.0

    return Hamiltonian2x2(Picture.RWA, element_fn)


def u_phi(phase_value: float) -> np.ndarray:
    """diag(exp(i phi/2), exp(-i phi/2)) on (|g>, |e>)."""
    return np.array(
        [[np.exp(0.5j * phase_value), 0.0], [0.0, np.exp(-0.5j * phase_value)]],
        dtype=complex,
    )


_S_LIKE_TO_I_LIKE = {Picture.S: Picture.I, Picture.S_DOUBLEPRIME: Picture.I_PRIME}
_I_LIKE_TO_S_LIKE = {Picture.I: Picture.S, Picture.I_PRIME: Picture.S_DOUBLEPRIME}


def transform_between_pictures(
    h: Hamiltonian2x2, phase_fn, phase_rate_fn, direction: str
) -> Hamiltonian2x2:
    """Apply the U_phi picture change (or its inverse) to a Hamiltonian.

    direction "S_to_I": H -> U^dag (H - H_phi) U, i.e. shift the diagonal by
    the rotation rate and rotate the off-diagonal by exp(-i phi).
    direction "I_to_S": the exact inverse. The round trip is the identity.
    """
    if direction == "S_to_I":
        if h.picture not in _S_LIKE_TO_I_LIKE:
            raise ValueError(f"S_to_I expects an S-like Hamiltonian, got {h.picture}")
        target = _S_LIKE_TO_I_LIKE[h.picture]

        def element_fn(t):
            hgg, hge, heg, hee = h.elements(t)
            rate = np.asarray(phase_rate_fn(t))
            rot = np.exp(-1j * np.asarray(phase_fn(t)))
            return hgg + rate / 2.0, hge * rot, heg * np.conj(rot), hee - rate / 2.0

        return Hamiltonian2x2(target, element_fn)

    if direction == "I_to_S":
        if h.picture not in _I_LIKE_TO_S_LIKE:
            raise ValueError(f"I_to_S expects an I-like Hamiltonian, got {h.picture}")
        target = _I_LIKE_TO_S_LIKE[h.picture]

        def element_fn(t):
            hgg, hge, heg, hee = h.elements(t)
            rate = np.asarray(phase_rate_fn(t))
            rot = np.exp(1j * np.asarray(phase_fn(t)))
            return hgg - rate / 2.0, hge * rot, heg * np.conj(rot), hee + rate / 2.0

        return Hamiltonian2x2(target, element_fn)

    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True)
class EigenSystem:
    """Instantaneous eigensystem of a 2x2 Hermitian Hamiltonian.

    epsilon0 is the gap; for traceless Hamiltonians the energies are exactly
    +/- epsilon0/2. ``degenerate`` marks epsilon0 = 0, where the returned
    vectors fall back to the bare pair (|g>, |e>).
    """

    epsilon0: float
    e_plus: float
    e_minus: float
    v_plus: np.ndarray
    v_minus: np.ndarray
    degenerate: bool = False


def _eigvecs_from_delta_omega(delta: float, omega: complex):
    # Bloch-angle construction, stable for any Delta/|Omega| ratio:
    # cos(Theta) = -Delta/eps0, azimuth = -arg(Omega). The |e> amplitude is
    # kept real and non-negative. At exactly zero coupling atan2(0, 0) = 0
    # and a unit phase give the bare pair without a special case; the
    # 0.0 - delta form avoids the negative-zero atan2 branch.
    theta = np.arctan2(abs(omega), 0.0 - delta + 0.0)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    if omega == 0.0:
        phase = 1.0 + 0.0j
    else:
        phase = omega / abs(omega)
    v_plus = np.array([c * phase, s], dtype=complex)
    v_minus = np.array([-s * phase, c], dtype=complex)
    return v_plus, v_minus


def eigensystem(h: Hamiltonian2x2, t: float) -> EigenSystem:
    """Closed-form eigensystem at time t.

    With Delta = h_ee - h_gg and Omega = 2 h_ge: epsilon0 =
    sqrt(Delta^2 + |Omega|^2); energies are centered on the trace. The
    construction stays stable down to zero coupling, where the limiting
    bare-basis vectors selected by sign(Delta) come out directly.
    """
    hgg, hge, _, hee = (complex(e) for e in h.elements(float(t)))
    delta = (hee - hgg).real
    omega = 2.0 * hge
    center = (hgg + hee).real / 2.0
    eps0 = float(np.hypot(delta, abs(omega)))
    degenerate = eps0 == 0.0
    v_plus, v_minus = _eigvecs_from_delta_omega(delta, omega)
    return EigenSystem(
        epsilon0=eps0,
        e_plus=center + eps0 / 2.0,
        e_minus=center - eps0 / 2.0,
        v_plus=v_plus,
        v_minus=v_minus,
        degenerate=degenerate,
    )


def eigensystem_series(h: Hamiltonian2x2, times) -> list:
    """Eigensystems along a trajectory with a continuous sign convention.

    Each vector is flipped, if needed, to maximize its overlap with the
    previous sample, which removes spurious sign jumps when the coupling
    crosses zero.
    """
    out = []
    prev = None
    for t in np.asarray(times, dtype=float):
        es = eigensystem(h, t)
        if prev is not None:
            v_plus = es.v_plus if np.vdot(prev.v_plus, es.v_plus).real >= 0.0 else -es.v_plus
            v_minus = (
                es.v_minus if np.vdot(prev.v_minus, es.v_minus).real >= 0.0 else -es.v_minus
            )
            es = EigenSystem(es.epsilon0, es.e_plus, es.e_minus, v_plus, v_minus, es.degenerate)
        out.append(es)
        prev = es
    return out
