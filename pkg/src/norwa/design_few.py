"""Few-oscillation inversion designer.

For a constant-frequency field phase phi = omega_l t spanning only a handful
of cycles, the polar angle theta(t) is interpolated by a single polynomial
that (i) runs from 0 to pi with vanishing end slopes, (ii) has zero slope at
every interior zero of cos(phi) so the Rabi inverse stays finite, and (iii)
passes through a few shaping values that keep the ascent smooth. The
auxiliary angle alpha(t) is a low-degree polynomial pinned to pi/2 at the
poles of cot(theta) (normally the two endpoints), with free end slopes set to
zero and one midpoint value for smoothness. The controls then follow from the
exact inverse formulas.

Polynomials are solved in the scaled variable s = t/tf, which keeps the
degree-13 collocation system well conditioned; coefficients are available in
both bases.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P

from .core import (
    DesignInfeasibleError,
    PulseSpec,
    TimeGrid,
    make_uniform_grid,
)
from .hamiltonians import h_interaction
from .invariants import (
    AngleTrajectory,
    C2Function,
    LinearPhase,
    THETA_START_EPSILON,
    _cos_zero_times,
    inverse_exact,
    invariance_residual_series,
)
from .numerics import newton_refine
from .propagator import propagate

__all__ = [
    "Constraint",
    "ConstraintSet",
    "PolynomialAnsatz",
    "DEFAULT_SHAPING",
    "DEFAULT_ALPHA_MIDPOINT",
    "cos_phase_zeros",
    "build_theta_constraints",
    "build_alpha_constraints",
    "solve_polynomial",
    "sin_theta_singularities",
    "FewOscillationDesign",
    "design_few_oscillation",
    "design_to_json",
]

# shaping values (time ns, theta rad) forcing a smooth ascent to pi
DEFAULT_SHAPING = ((1.0, 2.0), (1.6, 2.4), (2.5, 2.8), (4.0, 2.8), (4.5, 3.0))
DEFAULT_ALPHA_MIDPOINT = 2.0

_CONDITION_LIMIT = 1e14
_RESIDUAL_LIMIT = 1e-9


@dataclass(frozen=True)
class Constraint:
    kind: str  # "value" | "derivative"
    time: float
    target: float


@dataclass(frozen=True)
class ConstraintSet:
    constraints: tuple
    tf: float

    def __len__(self):
        return len(self.constraints)


def _compose_power_series(coeffs: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Power-series coefficients of p(q(t)) for power-series p and linear q."""
    out = np.array([coeffs[-1]])
    for c in coeffs[-2::-1]:
        out = P.polyadd(P.polymul(out, inner), [c])
    return out


@dataclass(frozen=True)
class PolynomialAnsatz:
    """Interpolating polynomial with analytic derivatives in t.

    Stored and evaluated in the Chebyshev basis on x = 2 t/tf - 1, which
    keeps both the collocation solve and the evaluation well conditioned at
    degree 13. Monomial coefficients in s = t/tf and in t are derived views
    for reporting.
    """

    coeffs_cheb: np.ndarray
    tf: float
    solve_residual: float = 0.0
    condition_number: float = 0.0

    @property
    def degree(self) -> int:
        return len(self.coeffs_cheb) - 1

    @property
    def coeffs_scaled(self) -> np.ndarray:
        """Monomial coefficients in powers of s = t/tf."""
        in_x = C.cheb2poly(self.coeffs_cheb)
        return _compose_power_series(in_x, np.array([-1.0, 2.0]))

    @property
    def coeffs_unscaled(self) -> np.ndarray:
        """Monomial coefficients in powers of t (ns)."""
        in_x = C.cheb2poly(self.coeffs_cheb)
        return _compose_power_series(in_x, np.array([-1.0, 2.0 / self.tf]))

    def _x(self, t):
        return 2.0 * np.asarray(t, dtype=float) / self.tf - 1.0

    def value(self, t):
        return C.chebval(self._x(t), self.coeffs_cheb)

    def d1(self, t):
        return C.chebval(self._x(t), C.chebder(self.coeffs_cheb, 1)) * (2.0 / self.tf)

    def d2(self, t):
        return C.chebval(self._x(t), C.chebder(self.coeffs_cheb, 2)) * (2.0 / self.tf) ** 2

    def __call__(self, t):
        return self.value(t)

    def as_c2(self) -> C2Function:
        return C2Function(self.value, self.d1, self.d2)


def cos_phase_zeros(omega_l: float, tf: float) -> list:
    """All t in the open interval (0, tf) with cos(omega_l t) = 0."""
    return _cos_zero_times(omega_l, tf)


def _check_no_duplicates(constraints):
    seen = set()
    for c in constraints:
        key = (c.kind, round(c.time, 12))
        if key in seen:
            raise DesignInfeasibleError(f"duplicate constraint {c.kind} at t = {c.time}")
        seen.add(key)


def build_theta_constraints(tf: float, zeros, shaping) -> ConstraintSet:
    """Boundary, cancellation, and shaping constraints for theta.

    theta(0) = 0, theta(tf) = pi, zero end slopes, zero slope at each
    supplied cos(phi) zero, plus the (time, value) shaping pairs, whose
    values must lie in (0, pi).
    """
    for t_s, value in shaping:
        if not 0.0 < value < math.pi:
            raise DesignInfeasibleError(f"shaping value {value} at t = {t_s} outside (0, pi)")
        if not 0.0 < t_s < tf:
            raise DesignInfeasibleError(f"shaping time {t_s} outside (0, {tf})")
    constraints = [
        Constraint("value", 0.0, 0.0),
        Constraint("value", tf, math.pi),
        Constraint("derivative", 0.0, 0.0),
        Constraint("derivative", tf, 0.0),
    ]
    constraints += [Constraint("derivative", float(z), 0.0) for z in zeros]
    constraints += [Constraint("value", float(t_s), float(v)) for t_s, v in shaping]
    _check_no_duplicates(constraints)
    return ConstraintSet(tuple(constraints), tf)


def build_alpha_constraints(
    tf: float, cot_theta_singularities, midpoint_value: float
) -> ConstraintSet:
    """alpha = pi/2 at every pole of cot(theta), zero end slopes, and one
    midpoint value. For the standard design the poles are t = 0 and t = tf,
    giving five constraints for a quartic."""
    constraints = [Constraint("value", float(t_s), math.pi / 2.0) for t_s in cot_theta_singularities]
    constraints += [
        Constraint("derivative", 0.0, 0.0),
        Constraint("derivative", tf, 0.0),
        Constraint("value", tf / 2.0, float(midpoint_value)),
    ]
    _check_no_duplicates(constraints)
    return ConstraintSet(tuple(constraints), tf)


def solve_polynomial(constraints: ConstraintSet, degree: int) -> PolynomialAnsatz:
    """Solve the square collocation system for the polynomial coefficients.

    Rows are Chebyshev values or first derivatives at the constraint times.
    One step of iterative refinement keeps the back-substituted residual at
    the rounding floor; the solve fails if the residual exceeds 1e-9 or the
    condition number 1e14.
    """
    m = len(constraints)
    if m != degree + 1:
        raise DesignInfeasibleError(
            f"need exactly degree + 1 = {degree + 1} constraints, got {m}"
        )
    tf = constraints.tf
    a = np.zeros((m, m))
    b = np.zeros(m)
    for i, c in enumerate(constraints.constraints):
        x = 2.0 * c.time / tf - 1.0
        if c.kind == "value":
            a[i] = C.chebvander(x, degree)
        elif c.kind == "derivative":
            for k in range(m):
                e_k = np.zeros(k + 1)
                e_k[k] = 1.0
                a[i, k] = 0.0 if k == 0 else C.chebval(x, C.chebder(e_k)) * (2.0 / tf)
        else:
            raise ValueError(f"unknown constraint kind {c.kind!r}")
        b[i] = c.target
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > _CONDITION_LIMIT:
        raise DesignInfeasibleError(
            f"constraint system is ill conditioned (cond = {cond:.3e}); "
            "check for clustered or duplicate constraint times"
        )
    coeffs = np.linalg.solve(a, b)
    coeffs += np.linalg.solve(a, b - a @ coeffs)  # one refinement pass
    residual = float(np.max(np.abs(a @ coeffs - b)))
    if residual > _RESIDUAL_LIMIT:
        raise DesignInfeasibleError(
            f"constraint residual {residual:.3e} exceeds {_RESIDUAL_LIMIT}"
        )
    return PolynomialAnsatz(coeffs, tf, solve_residual=residual, condition_number=cond)


def sin_theta_singularities(theta: PolynomialAnsatz, tol: float = 1e-9) -> list:
    """Times where sin(theta) vanishes (theta hits 0 or pi) on [0, tf].

    The endpoints qualify by the boundary conditions; interior candidates are
    located on a dense scan and refined on the derivative with Newton.
    """
    tf = theta.tf
    sing = [0.0, tf]
    ts = np.linspace(0.0, tf, 20001)[1:-1]
    vals = np.asarray(theta.value(ts))
    near = np.minimum(np.abs(vals), np.abs(vals - math.pi)) < 1e-4
    if np.any(near):
        idx = np.flatnonzero(near)
        groups = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
        for g in groups:
            t_c = newton_refine(theta.d1, theta.d2, float(ts[g[len(g) // 2]]))
            val = float(theta.value(t_c))
            is_new = all(abs(t_c - t_s) > 1e-6 * tf for t_s in sing)
            if 0.0 < t_c < tf and is_new and min(abs(val), abs(val - math.pi)) < tol:
                sing.append(t_c)
    return sorted(sing)


@dataclass(frozen=True)
class FewOscillationDesign:
    pulse: PulseSpec
    trajectory: AngleTrajectory
    theta: PolynomialAnsatz
    alpha: PolynomialAnsatz
    theta_constraints: ConstraintSet
    alpha_constraints: ConstraintSet
    diagnostics: dict = field(default_factory=dict)


def _fastest_frequency(pulse: PulseSpec, tf: float) -> float:
    ts = np.linspace(0.0, tf, 2001)
    rabi = np.abs(np.asarray(pulse.rabi(ts)))
    om0 = np.abs(np.asarray(pulse.omega0(ts)))
    rate = np.abs(np.asarray(pulse.phase_rate(ts)))
    delta = np.asarray(pulse.omega0(ts)) - np.asarray(pulse.phase_rate(ts))
    eps0 = np.sqrt(delta**2 + (2.0 * rabi) ** 2)
    return float(max(rabi.max(), om0.max(), rate.max(), eps0.max()))


def design_few_oscillation(
    omega_l: float,
    tf: float,
    shaping=None,
    alpha_midpoint: float = DEFAULT_ALPHA_MIDPOINT,
    theta_degree: int = 13,
    alpha_degree: int = 4,
    n_steps: int | None = None,
    verify: bool = True,
) -> FewOscillationDesign:
    """Full design pipeline: zeros, theta ansatz, alpha ansatz, inversion.

    Returns the synthesized pulse (phase omega_l t, patched Rabi and
    detuning), the designed angle trajectory on the output grid, and
    diagnostics including a verification propagation of |g> at about 200
    steps per period of the fastest synthesized frequency.
    """
    shaping = tuple(shaping) if shaping is not None else DEFAULT_SHAPING
    zeros = cos_phase_zeros(omega_l, tf)
    theta_cs = build_theta_constraints(tf, zeros, shaping)
    theta = solve_polynomial(theta_cs, theta_degree)
    singularities = sin_theta_singularities(theta)
    alpha_cs = build_alpha_constraints(tf, singularities, alpha_midpoint)
    alpha = solve_polynomial(alpha_cs, alpha_degree)
    phase = LinearPhase(omega_l)
    pulse = inverse_exact(theta.as_c2(), alpha.as_c2(), phase, tf)

    if n_steps is None:
        period = 2.0 * math.pi / _fastest_frequency(pulse, tf)
        n_steps = max(2000, int(math.ceil(200.0 * tf / period)))
    grid = make_uniform_grid(0.0, tf, n_steps)
    th = np.asarray(theta.value(grid.samples), dtype=float)
    al = np.asarray(alpha.value(grid.samples), dtype=float)
    trajectory = AngleTrajectory(
        grid=grid, theta=th, beta=al + np.asarray(phase(grid.samples)), alpha=al
    )

    diagnostics = {
        "cos_phase_zeros": list(zeros),
        "sin_theta_singularities": list(singularities),
        "theta_condition_number": theta.condition_number,
        "theta_solve_residual": theta.solve_residual,
        "alpha_condition_number": alpha.condition_number,
        "alpha_solve_residual": alpha.solve_residual,
        "alpha_range": (float(al.min()), float(al.max())),
        "n_steps": grid.n_steps,
    }
    rabi_lhopital = {}
    for z in zeros:
        rabi_lhopital[float(z)] = float(theta.d2(z)) / (
            2.0 * omega_l * math.sin(omega_l * z) * math.sin(float(alpha.value(z)))
        )
    diagnostics["rabi_at_cos_zeros"] = rabi_lhopital

    if verify:
        ham = h_interaction(pulse)
        result = propagate(ham, np.array([1.0, 0.0], dtype=complex), grid)
        omega0 = np.asarray(pulse.omega0(grid.samples), dtype=float)
        residual = invariance_residual_series(trajectory, ham)
        diagnostics.update(
            {
                "final_p_e": float(result.p_e[-1]),
                "max_norm_error": result.max_norm_error,
                "omega0_changes_sign": bool(omega0.min() < 0.0 < omega0.max()),
                "omega0_boundary": (float(omega0[0]), float(omega0[-1])),
                "max_invariance_residual": float(np.max(residual)),
                "rabi_finite": bool(np.all(np.isfinite(pulse.rabi(grid.samples)))),
            }
        )
    return FewOscillationDesign(
        pulse=pulse,
        trajectory=trajectory,
        theta=theta,
        alpha=alpha,
        theta_constraints=theta_cs,
        alpha_constraints=alpha_cs,
        diagnostics=diagnostics,
    )


def design_to_json(design: FewOscillationDesign) -> dict:
    """Reproducibility document: coefficients, constraints, diagnostics."""

    def constraints_doc(cs: ConstraintSet):
        return [
            {"kind": c.kind, "time_ns": c.time, "target_rad": c.target}
            for c in cs.constraints
        ]

    doc = {
        "theta_coefficients_chebyshev": design.theta.coeffs_cheb.tolist(),
        "alpha_coefficients_chebyshev": design.alpha.coeffs_cheb.tolist(),
        "theta_coefficients_scaled": design.theta.coeffs_scaled.tolist(),
        "theta_coefficients_per_ns": design.theta.coeffs_unscaled.tolist(),
        "alpha_coefficients_scaled": design.alpha.coeffs_scaled.tolist(),
        "alpha_coefficients_per_ns": design.alpha.coeffs_unscaled.tolist(),
        "tf_ns": design.theta.tf,
        "theta_constraints": constraints_doc(design.theta_constraints),
        "alpha_constraints": constraints_doc(design.alpha_constraints),
        "diagnostics": {
            k: v for k, v in design.diagnostics.items() if not isinstance(v, np.ndarray)
        },
    }
    # round-trip through json to normalize tuples and numpy scalars
    return json.loads(json.dumps(doc, default=float))
