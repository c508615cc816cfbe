"""Shared domain types: time grids, pulse specifications, two-level state and
Hamiltonian containers, unit parsing, and scenario configuration.

Unit convention used throughout the package: time in nanoseconds, every
angular frequency in rad/ns, hbar = 1. Quantities written in spectroscopy
notation (e.g. "2pi*3MHz") are converted to these base units once, at the
configuration boundary, and never inside the numerics.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi

# Resolution rule: integration steps per period of the fastest frequency.
STEPS_PER_PERIOD_WARN = 20.0
STEPS_PER_PERIOD_ERROR = 4.0


class PulseDesignError(Exception):
    """Base class for all domain errors raised by this package."""


class ConfigError(PulseDesignError):
    """Scenario configuration is missing, unreadable, or malformed."""


class ResolutionError(PulseDesignError):
    """Time grid is far too coarse for the frequencies involved."""


class DegeneracyError(PulseDesignError):
    """An operation hit a level crossing where it is undefined."""


class SingularSampleError(PulseDesignError):
    """A series was evaluated at a sample flagged as singular."""


class DesignInfeasibleError(PulseDesignError):
    """A pulse design cannot satisfy its constraints."""


class NumericsError(PulseDesignError):
    """Numerical integrity failure (non-finite samples, norm blowup)."""


# ---------------------------------------------------------------------------
# time grids


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid over [t0, tf] with n_steps intervals.

    ``samples`` has n_steps + 1 strictly increasing entries with exact
    endpoints. Instances are immutable and safe to share.
    """

    t0: float
    tf: float
    n_steps: int
    samples: np.ndarray

    @property
    def dt(self) -> float:
        return (self.tf - self.t0) / self.n_steps

    def half_step_grid(self) -> "TimeGrid":
        """Grid with doubled resolution; its even samples coincide with ours."""
        return make_uniform_grid(self.t0, self.tf, 2 * self.n_steps)


def make_uniform_grid(t0: float, tf: float, n_steps: int) -> TimeGrid:
    if not (np.isfinite(t0) and np.isfinite(tf)):
        raise ValueError(f"grid endpoints must be finite, got t0={t0}, tf={tf}")
    if not tf > t0:
        raise ValueError(f"grid requires tf > t0, got t0={t0}, tf={tf}")
    n_steps = int(n_steps)
    if n_steps < 1:
        raise ValueError(f"grid requires n_steps >= 1, got {n_steps}")
    samples = np.linspace(t0, tf, n_steps + 1)
    return TimeGrid(float(t0), float(tf), n_steps, samples)


# ---------------------------------------------------------------------------
# pulses


@dataclass(frozen=True)
class PulseSpec:
    """The physical control of a two-level system.

    All fields are vectorized callables of time (ns): Rabi envelope (rad/ns,
    real, sign allowed), field phase (rad), its exact rate (rad/ns), and the
    transition frequency (rad/ns). Optional analytic derivatives speed up and
    sharpen the counterdiabatic construction; when absent, central finite
    differences are used instead.
    """

    rabi: Callable
    phase: Callable
    phase_rate: Callable
    omega0: Callable
    rabi_rate: Callable | None = None
    omega0_rate: Callable | None = None
    phase_accel: Callable | None = None


def constant(value: float) -> Callable:
    """A vectorized constant function of time."""

    def fn(t):
        return np.full_like(np.asarray(t, dtype=float), value)

    return fn


def phase_rate_defect(pulse: PulseSpec, times: np.ndarray, h: float = 1e-6) -> float:
    """Worst mismatch between phase_rate and the finite-difference slope of phase.

    Returns max |central difference - phase_rate| over ``times``; consistent
    pulses stay below 1e-6 * max|phase_rate|.
    """
    times = np.asarray(times, dtype=float)
    fd = (np.asarray(pulse.phase(times + h)) - np.asarray(pulse.phase(times - h))) / (2 * h)
    return float(np.max(np.abs(fd - np.asarray(pulse.phase_rate(times)))))


# ---------------------------------------------------------------------------
# states


@dataclass(frozen=True)
class StateVector:
    """Amplitudes on the bare basis (|g>, |e>)."""

    cg: complex
    ce: complex

    @property
    def p_g(self) -> float:
        return abs(self.cg) ** 2

    @property
    def p_e(self) -> float:
        return abs(self.ce) ** 2

    @property
    def norm(self) -> float:
        return math.sqrt(self.p_g + self.p_e)

    def as_array(self) -> np.ndarray:
        return np.array([self.cg, self.ce], dtype=complex)

    @staticmethod
    def from_array(arr) -> "StateVector":
        return StateVector(complex(arr[0]), complex(arr[1]))


GROUND = StateVector(1.0 + 0.0j, 0.0 + 0.0j)
EXCITED = StateVector(0.0 + 0.0j, 1.0 + 0.0j)


# ---------------------------------------------------------------------------
# Hamiltonians


class Picture(Enum):
    """Dynamical picture a Hamiltonian lives in.

    S: bare Schroedinger picture. I: field-adapted interaction picture.
    I_PRIME: interaction picture with the counterdiabatic term added.
    S_DOUBLEPRIME: Schroedinger picture reached from I_PRIME with the
    repaired phase. RWA: rotating-wave approximated interaction picture.
    """

    S = "S"
    I = "I"
    I_PRIME = "I_prime"
    S_DOUBLEPRIME = "S_doubleprime"
    RWA = "RWA"


@dataclass(frozen=True)
class Hamiltonian2x2:
    """A 2x2 Hermitian operator evaluated in a named picture.

    ``element_fn`` maps an array of times to the four matrix entries
    (h_gg, h_ge, h_eg, h_ee) in rad/ns (hbar = 1), broadcasting over time.
    """

    picture: Picture
    element_fn: Callable

    def elements(self, t):
        t = np.asarray(t, dtype=float)
        hgg, hge, heg, hee = self.element_fn(t)
        shape = t.shape
        out = []
        for e in (hgg, hge, heg, hee):
            e = np.asarray(e, dtype=complex)
            out.append(np.broadcast_to(e, shape) if e.shape != shape else e)
        return tuple(out)

    def matrix(self, t: float) -> np.ndarray:
        hgg, hge, heg, hee = self.elements(float(t))
        return np.array([[complex(hgg), complex(hge)], [complex(heg), complex(hee)]])

    @staticmethod
    def from_series(
        picture: Picture,
        grid: TimeGrid,
        hgg: np.ndarray,
        hge: np.ndarray,
        hee: np.ndarray,
    ) -> "Hamiltonian2x2":
        """Hamiltonian defined by samples on a uniform grid.

        Evaluations are exact index lookups; asking for a time that is not a
        grid sample raises, by design there is no interpolation.
        """
        hgg = np.asarray(hgg, dtype=complex)
        hge = np.asarray(hge, dtype=complex)
        hee = np.asarray(hee, dtype=complex)
        n = grid.n_steps
        t0, dt = grid.t0, grid.dt
        if not (hgg.shape == hge.shape == hee.shape == (n + 1,)):
            raise ValueError("series length must match grid samples")

        def element_fn(t):
            t = np.asarray(t, dtype=float)
            idx = np.rint((t - t0) / dt).astype(int)
            if np.any(idx < 0) or np.any(idx > n):
                raise SingularSampleError("sampled Hamiltonian evaluated outside its grid")
            if np.max(np.abs(t - (t0 + idx * dt))) > 1e-9 * dt + 1e-15:
                raise SingularSampleError(
                    "sampled Hamiltonian evaluated off-grid; no interpolation is provided"
                )
            return hgg[idx], hge[idx], np.conj(hge[idx]), hee[idx]

        return Hamiltonian2x2(picture, element_fn)


def hermiticity_defect(h: Hamiltonian2x2, times) -> float:
    """Relative deviation from Hermiticity, max over the given times."""
    hgg, hge, heg, hee = h.elements(times)
    scale = max(float(np.max(np.abs(np.array([hgg, hge, heg, hee])))), 1e-300)
    d = max(
        float(np.max(np.abs(hge - np.conj(heg)))),
        float(np.max(np.abs(np.imag(hgg)))),
        float(np.max(np.abs(np.imag(hee)))),
    )
    return d / scale


# ---------------------------------------------------------------------------
# quantity parsing ("2pi*3MHz" notation)

# Grammar (documented in README, bit-exact):
#   quantity  := [prefix "*"] number [unit]
#   prefix    := "2pi" | "(2pi)^2"
#   number    := a Python float literal
#   unit      := time | frequency | frequency^2 | "rad/ns" | "rad/ns^2" | ""
# Times convert to ns, frequencies to 1/ns, squared frequencies to 1/ns^2;
# the prefix multiplies by 2*pi or (2*pi)^2. A bare JSON number is taken
# as-is, already in base units (ns, rad/ns, rad^2/ns^2 as appropriate).

_UNIT_SCALE = {
    "": 1.0,
    "ns": 1.0,
    "us": 1e3,
    "ms": 1e6,
    "s": 1e9,
    "Hz": 1e-9,
    "kHz": 1e-6,
    "MHz": 1e-3,
    "GHz": 1.0,
    "Hz^2": 1e-18,
    "kHz^2": 1e-12,
    "MHz^2": 1e-6,
    "GHz^2": 1.0,
    "rad/ns": 1.0,
    "rad/ns^2": 1.0,
}

_PREFIX_SCALE = {"2pi": TWO_PI, "(2pi)^2": TWO_PI**2}

_QUANTITY_RE = re.compile(
    r"^\s*(?:(2pi|\(2pi\)\^2)\s*\*\s*)?"
    r"([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*"
    r"([A-Za-z/^0-9]*)\s*$"
)


def parse_quantity(value) -> float:
    """Convert a config number to base units (ns / rad/ns / rad^2/ns^2)."""
    if isinstance(value, bool):
        raise ConfigError(f"not a quantity: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"not a quantity: {value!r}")
    m = _QUANTITY_RE.match(value)
    if m is None:
        raise ConfigError(f"cannot parse quantity {value!r}")
    prefix, number, unit = m.groups()
    if unit not in _UNIT_SCALE:
        raise ConfigError(f"unknown unit {unit!r} in {value!r}")
    scale = _PREFIX_SCALE[prefix] if prefix else 1.0
    return float(number) * scale * _UNIT_SCALE[unit]


# ---------------------------------------------------------------------------
# scenario configuration


SCENARIO_NAMES = ("cd_allen_eberly", "invariant_few", "invariant_many", "propagate_custom")

# required numeric parameter keys per scenario
REQUIRED_PARAMETERS = {
    "cd_allen_eberly": ("omega_m", "delta", "t0", "omega_l"),
    "invariant_few": ("omega_l",),
    "invariant_many": ("a", "omega_rabi", "big_a", "omega_atom"),
    "propagate_custom": ("omega_rabi", "omega_atom", "omega_field"),
}

KNOWN_OUTPUTS = (
    "populations",
    "field",
    "angles",
    "omega0",
    "omega0_tilde",
    "rabi_tilde",
    "phase_tilde",
    "rabi_detuning",
    "design",
    "trace",
)


@dataclass(frozen=True)
class GridSpec:
    t0: float
    tf: float
    n_steps: int


@dataclass(frozen=True)
class ScenarioConfig:
    """Declarative description of a run, parsed from JSON."""

    scenario: str
    parameters: dict
    grid: GridSpec
    outputs: tuple
    options: dict = field(default_factory=dict)
    comment: str = ""


@dataclass
class ValidationReport:
    missing: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.missing and not self.violations

    def summary(self) -> str:
        lines = []
        for key in self.missing:
            lines.append(f"missing: {key}")
        for v in self.violations:
            lines.append(f"error: {v}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines) if lines else "ok"


def config_from_dict(doc: dict) -> ScenarioConfig:
    try:
        scenario = doc["scenario"]
        raw_params = dict(doc.get("parameters", {}))
        grid_doc = doc["grid"]
        grid = GridSpec(
            t0=parse_quantity(grid_doc["t0"]),
            tf=parse_quantity(grid_doc["tf"]),
            n_steps=int(grid_doc["n_steps"]),
        )
    except KeyError as exc:
        raise ConfigError(f"config missing top-level key: {exc}") from exc
    parameters = {}
    options = {}
    for key, value in raw_params.items():
        if isinstance(value, str) and _QUANTITY_RE.match(value) is None:
            options[key] = value  # enumerated option such as envelope="sech"
        else:
            parameters[key] = parse_quantity(value)
    for key in ("shaping", "mode", "label", "budget", "output_stride", "envelope"):
        if key in doc:
            options[key] = doc[key]
    outputs = tuple(doc.get("outputs", ()))
    return ScenarioConfig(
        scenario=scenario,
        parameters=parameters,
        grid=grid,
        outputs=outputs,
        options=options,
        comment=str(doc.get("comment", "")),
    )


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return config_from_dict(doc)


def _fastest_frequency(config: ScenarioConfig) -> float:
    """Largest of max|phase rate|, max|omega0|, max|Omega_R|, max eps0 that can
    be bounded from the scenario parameters alone (rad/ns)."""
    p = config.parameters
    s = config.scenario
    tf = config.grid.tf
    if s == "cd_allen_eberly":
        sweep = 2.0 * p["delta"] ** 2 * p["t0"] / math.pi
        if str(config.options.get("envelope", "sech")) == "sinh":
            rabi_max = abs(p["omega_m"]) * math.sinh(math.pi * tf / (4.0 * p["t0"]))
        else:
            rabi_max = abs(p["omega_m"])
        omega0_max = abs(p["omega_l"]) + sweep
        eps0_max = math.hypot(sweep, 2.0 * rabi_max)
        return max(abs(p["omega_l"]), omega0_max, rabi_max, eps0_max)
    if s == "invariant_few":
        # the synthesized pulse is not known before the design runs; bound by
        # the carrier here, the propagator re-checks on the actual samples
        return abs(p["omega_l"])
    if s == "invariant_many":
        chirp_max = abs(p["omega_atom"]) + abs(p["a"]) * tf / 2.0
        return max(chirp_max, abs(p["omega_rabi"]))
    if s == "propagate_custom":
        return max(abs(p["omega_field"]), abs(p["omega_atom"]), abs(p["omega_rabi"]))
    return 0.0


def validate_scenario(config: ScenarioConfig) -> ValidationReport:
    """Check required keys, finiteness/sign rules, and grid resolution.

    Failures are reported, never raised; ``ok`` is true iff the report is
    free of missing keys and violations (resolution warnings do not block).
    """
    report = ValidationReport()
    if config.scenario not in SCENARIO_NAMES:
        report.violations.append(
            f"unknown scenario {config.scenario!r}; known: {', '.join(SCENARIO_NAMES)}"
        )
        return report
    for key in REQUIRED_PARAMETERS[config.scenario]:
        if key not in config.parameters:
            report.missing.append(key)
        elif not np.isfinite(config.parameters[key]):
            report.violations.append(f"parameter {key} is not finite")
    grid = config.grid
    if not (np.isfinite(grid.t0) and np.isfinite(grid.tf)):
        report.violations.append("grid endpoints not finite")
    elif grid.tf <= grid.t0:
        report.violations.append(f"grid requires tf > t0, got [{grid.t0}, {grid.tf}]")
    if grid.n_steps < 1:
        report.violations.append(f"n_steps must be >= 1, got {grid.n_steps}")
    for name in config.outputs:
        if name not in KNOWN_OUTPUTS:
            report.warnings.append(f"unknown output series {name!r} will be ignored")
    if report.missing or report.violations:
        return report

    omega_max = _fastest_frequency(config)
    if omega_max > 0.0:
        dt = (grid.tf - grid.t0) / grid.n_steps
        steps_per_period = (TWO_PI / omega_max) / dt
        if steps_per_period < STEPS_PER_PERIOD_WARN:
            report.warnings.append(
                f"resolution: {steps_per_period:.3g} steps per period of the fastest "
                f"frequency {omega_max:.6g} rad/ns (want >= {STEPS_PER_PERIOD_WARN:g})"
            )
        if steps_per_period < STEPS_PER_PERIOD_ERROR:
            report.violations.append(
                f"resolution: {steps_per_period:.3g} steps per period is below the "
                f"hard floor of {STEPS_PER_PERIOD_ERROR:g}"
            )
    return report
