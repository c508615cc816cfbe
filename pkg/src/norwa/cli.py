"""Command-line front end: run a scenario config, persist every requested
series as CSV plus a JSON run manifest.

    norwa run config.json [--out DIR] [--steps N]
    norwa list

Exit codes: 0 success, 2 validation failure, 3 numerical failure. The output
directory defaults to --out, then $PULSE_OUT_DIR, then the working
directory. CSV files are byte-identical for identical config and version:
the first column is always t_ns and frequency columns are exported divided
by 2 pi (suffix _over_2pi_GHz).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .core import (
    GROUND,
    ConfigError,
    PulseDesignError,
    PulseSpec,
    ScenarioConfig,
    TimeGrid,
    constant,
    load_config,
    make_uniform_grid,
    validate_scenario,
)
from .counterdiabatic import (
    AllenEberlyParams,
    allen_eberly_pulse,
    h_s_doubleprime,
    repair_consistency,
    total_hamiltonian,
)
from .design_few import design_few_oscillation, design_to_json
from .design_many import (
    ChirpGaussParams,
    DEFAULT_BUDGET,
    chirp_gauss_pulse,
    optimize_inversion,
    write_trace_csv,
)
from .hamiltonians import h_interaction, h_rwa, h_schrodinger
from .propagator import propagate

TWO_PI = 2.0 * math.pi


@dataclass
class RunManifest:
    scenario: str
    parameters: dict
    grid: dict
    version: str
    wall_time_s: float
    outputs: list
    checks: dict

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True, default=float)


def _write_csv(path, header, columns) -> None:
    columns = [np.asarray(c) for c in columns]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _stride(config: ScenarioConfig) -> int:
    return max(1, int(config.options.get("output_stride", 1)))


def _downsample(grid: TimeGrid, series: dict, stride: int):
    idx = np.arange(0, grid.n_steps + 1, stride)
    if idx[-1] != grid.n_steps:
        idx = np.append(idx, grid.n_steps)
    return grid.samples[idx], {k: np.asarray(v)[idx] for k, v in series.items()}


def _run_cd_allen_eberly(config: ScenarioConfig, grid: TimeGrid, out_dir: str):
    p = config.parameters
    params = AllenEberlyParams(
        omega_m=p["omega_m"],
        delta=p["delta"],
        t0=p["t0"],
        tf=grid.tf,
        omega_l=p["omega_l"],
        envelope=str(config.options.get("envelope", "sech")),
    )
    pulse = allen_eberly_pulse(params)
    reference = h_interaction(pulse)
    half = grid.half_step_grid()
    total, decomp = total_hamiltonian(reference, pulse, grid=half)
    repaired = repair_consistency(decomp, pulse, half)

    psi0 = GROUND.as_array()
    res_ref = propagate(reference, psi0, grid)
    res_cd = propagate(total, psi0, grid)

    main_idx = np.arange(0, half.n_steps + 1, 2)
    stride = _stride(config)
    t_out, series = _downsample(
        grid,
        {
            "p_g_reference": res_ref.p_g,
            "p_e_reference": res_ref.p_e,
            "p_g_cd": res_cd.p_g,
            "p_e_cd": res_cd.p_e,
            "phi": np.asarray(pulse.phase(grid.samples)),
            "phi_tilde": repaired.phase_tilde[main_idx],
            "omega0_tilde": repaired.omega0_tilde[main_idx],
            "field": repaired.field[main_idx],
            "rabi_tilde": repaired.rabi_tilde[main_idx],
        },
        stride,
    )

    files = {}
    if "populations" in config.outputs:
        files["populations.csv"] = (
            ["t_ns", "p_g_reference", "p_e_reference", "p_g_cd", "p_e_cd"],
            [t_out, series["p_g_reference"], series["p_e_reference"], series["p_g_cd"], series["p_e_cd"]],
        )
    if "phase_tilde" in config.outputs:
        files["phases.csv"] = (
            ["t_ns", "phi_rad", "phi_tilde_rad"],
            [t_out, series["phi"], series["phi_tilde"]],
        )
    if "omega0_tilde" in config.outputs:
        files["omega0_tilde.csv"] = (
            ["t_ns", "omega0_tilde_over_2pi_GHz"],
            [t_out, series["omega0_tilde"] / TWO_PI],
        )
    if "field" in config.outputs:
        files["field.csv"] = (
            ["t_ns", "field_over_2pi_GHz"],
            [t_out, series["field"] / TWO_PI],
        )
    if "rabi_tilde" in config.outputs:
        files["rabi_tilde.csv"] = (
            ["t_ns", "rabi_tilde_over_2pi_GHz"],
            [t_out, series["rabi_tilde"] / TWO_PI],
        )
    written = _write_all(files, out_dir)

    checks = {
        "reference_final_p_g": float(res_ref.p_g[-1]),
        "cd_final_p_e": float(res_cd.p_e[-1]),
        "cd_inverts": bool(res_cd.p_e[-1] >= 0.999),
        "max_norm_error": max(res_ref.max_norm_error, res_cd.max_norm_error),
        "phase_divergence_rad": float(
            np.max(np.abs(repaired.phase_tilde - np.asarray(pulse.phase(half.samples))))
        ),
        "phase_max_jump_rad": float(np.max(np.abs(np.diff(repaired.phase_tilde)))),
        "field_max_over_2pi_GHz": float(np.max(repaired.field)) / TWO_PI,
        "field_finite": bool(np.all(np.isfinite(repaired.field))),
        "singular_rabi_samples": int(np.count_nonzero(repaired.singular_mask)),
        "envelope": params.envelope,
    }
    return written, checks


def _run_invariant_few(config: ScenarioConfig, grid: TimeGrid, out_dir: str):
    p = config.parameters
    shaping = config.options.get("shaping")
    if shaping is not None:
        from .core import parse_quantity

        shaping = tuple((parse_quantity(t), float(v)) for t, v in shaping)
    design = design_few_oscillation(
        omega_l=p["omega_l"],
        tf=grid.tf,
        shaping=shaping,
        alpha_midpoint=float(p.get("alpha_midpoint", 2.0)),
        n_steps=grid.n_steps,
    )
    pulse = design.pulse
    result = propagate(h_interaction(pulse), GROUND.as_array(), design.trajectory.grid)
    t = design.trajectory.grid.samples
    stride = _stride(config)
    t_out, series = _downsample(
        design.trajectory.grid,
        {
            "theta": design.trajectory.theta,
            "alpha": design.trajectory.alpha,
            "rabi": np.asarray(pulse.rabi(t)),
            "detuning": np.asarray(pulse.omega0(t)) - np.asarray(pulse.phase_rate(t)),
            "omega0": np.asarray(pulse.omega0(t)),
            "p_g": result.p_g,
            "p_e": result.p_e,
        },
        stride,
    )

    files = {}
    if "angles" in config.outputs:
        files["theta_alpha.csv"] = (
            ["t_ns", "theta_rad", "alpha_rad"],
            [t_out, series["theta"], series["alpha"]],
        )
    if "rabi_detuning" in config.outputs:
        files["rabi_detuning.csv"] = (
            ["t_ns", "rabi_over_2pi_GHz", "detuning_over_2pi_GHz"],
            [t_out, series["rabi"] / TWO_PI, series["detuning"] / TWO_PI],
        )
    if "populations" in config.outputs:
        files["populations.csv"] = (
            ["t_ns", "p_g", "p_e"],
            [t_out, series["p_g"], series["p_e"]],
        )
    if "omega0" in config.outputs:
        files["omega0.csv"] = (
            ["t_ns", "omega0_over_2pi_GHz"],
            [t_out, series["omega0"] / TWO_PI],
        )
    written = _write_all(files, out_dir)
    if "design" in config.outputs:
        path = os.path.join(out_dir, "design.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(design_to_json(design), fh, indent=2, sort_keys=True)
        written.append("design.json")

    checks = {
        "final_p_e": float(result.p_e[-1]),
        "inverts": bool(result.p_e[-1] >= 0.999),
        "max_norm_error": result.max_norm_error,
        **{
            k: design.diagnostics[k]
            for k in (
                "theta_solve_residual",
                "alpha_solve_residual",
                "omega0_changes_sign",
                "omega0_boundary",
                "max_invariance_residual",
                "rabi_finite",
            )
            if k in design.diagnostics
        },
    }
    return written, checks


def _run_invariant_many(config: ScenarioConfig, grid: TimeGrid, out_dir: str):
    p = config.parameters
    params = ChirpGaussParams(
        a=p["a"],
        omega_rabi=p["omega_rabi"],
        big_a=p["big_a"],
        tf=grid.tf,
        omega_atom=p["omega_atom"],
    )
    mode = str(config.options.get("mode", "evaluate"))
    label = str(config.options.get("label", mode))
    written = []
    checks = {"mode": mode}

    if mode == "optimize":
        budget = int(config.options.get("budget", DEFAULT_BUDGET))
        trace_path = os.path.join(out_dir, "trace.csv")
        best, trace = optimize_inversion(
            params, grid, budget=budget,
            checkpoint_path=trace_path if "trace" in config.outputs else None,
        )
        if "trace" in config.outputs:
            write_trace_csv(trace, trace_path)
            written.append("trace.csv")
        summary = {
            "seed": {"a_rad_ns2": params.a, "omega_rabi_rad_ns": params.omega_rabi},
            "best": {
                "a_rad_ns2": best.a,
                "omega_rabi_rad_ns": best.omega_rabi,
                "objective": trace.best[2],
            },
            "evaluations": trace.evaluations,
            "converged": trace.converged,
        }
        with open(os.path.join(out_dir, "optimization.json"), "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
        written.append("optimization.json")
        checks.update(
            {
                "converged": trace.converged,
                "best_objective": trace.best[2],
                "evaluations": trace.evaluations,
            }
        )
        params = best
        label = "opt"

    pulse = chirp_gauss_pulse(params)
    res_exact = propagate(h_interaction(pulse), GROUND.as_array(), grid)
    res_rwa = propagate(h_rwa(pulse), GROUND.as_array(), grid)
    stride = _stride(config)
    t_out, series = _downsample(
        grid,
        {
            "p_g_exact": res_exact.p_g,
            "p_e_exact": res_exact.p_e,
            "p_g_rwa": res_rwa.p_g,
            "p_e_rwa": res_rwa.p_e,
        },
        stride,
    )
    if "populations" in config.outputs:
        name = f"populations_{label}.csv"
        _write_csv(
            os.path.join(out_dir, name),
            ["t_ns", "p_g_exact", "p_e_exact", "p_g_rwa", "p_e_rwa"],
            [t_out, series["p_g_exact"], series["p_e_exact"], series["p_g_rwa"], series["p_e_rwa"]],
        )
        written.append(name)
    checks.update(
        {
            "final_p_e_exact": float(res_exact.p_e[-1]),
            "final_p_e_rwa": float(res_rwa.p_e[-1]),
            "exact_inverts": bool(res_exact.p_e[-1] >= 0.99),
            "rwa_inverts": bool(res_rwa.p_e[-1] >= 0.99),
            "max_norm_error": max(res_exact.max_norm_error, res_rwa.max_norm_error),
            "a_rad_ns2": params.a,
            "omega_rabi_rad_ns": params.omega_rabi,
        }
    )
    return written, checks


def _run_propagate_custom(config: ScenarioConfig, grid: TimeGrid, out_dir: str):
    p = config.parameters
    pulse = PulseSpec(
        rabi=constant(p["omega_rabi"]),
        phase=lambda t: p["omega_field"] * np.asarray(t, dtype=float),
        phase_rate=constant(p["omega_field"]),
        omega0=constant(p["omega_atom"]),
        rabi_rate=constant(0.0),
        omega0_rate=constant(0.0),
        phase_accel=constant(0.0),
    )
    picture = str(config.options.get("picture", "exact"))
    ham = {"exact": h_interaction, "rwa": h_rwa, "schrodinger": h_schrodinger}[picture](pulse)
    result = propagate(ham, GROUND.as_array(), grid)
    stride = _stride(config)
    t_out, series = _downsample(grid, {"p_g": result.p_g, "p_e": result.p_e}, stride)
    written = []
    if "populations" in config.outputs:
        _write_csv(
            os.path.join(out_dir, "populations.csv"),
            ["t_ns", "p_g", "p_e"],
            [t_out, series["p_g"], series["p_e"]],
        )
        written.append("populations.csv")
    checks = {
        "final_p_e": float(result.p_e[-1]),
        "max_norm_error": result.max_norm_error,
        "picture": picture,
    }
    return written, checks


def _write_all(files: dict, out_dir: str):
    written = []
    for name, (header, columns) in files.items():
        _write_csv(os.path.join(out_dir, name), header, columns)
        written.append(name)
    return written


_RUNNERS = {
    "cd_allen_eberly": _run_cd_allen_eberly,
    "invariant_few": _run_invariant_few,
    "invariant_many": _run_invariant_many,
    "propagate_custom": _run_propagate_custom,
}

_SCENARIO_HELP = (
    (
        "cd_allen_eberly",
        "omega_m, delta, t0, omega_l [envelope=sech]",
        "counterdiabatic repair of the hyperbolic sweep; example config configs/fig1.json",
    ),
    (
        "invariant_few",
        "omega_l [alpha_midpoint=2, shaping=...]",
        "few-oscillation polynomial design; example config configs/fig3.json",
    ),
    (
        "invariant_many",
        "a, omega_rabi, big_a, omega_atom [mode=evaluate|optimize, budget=200]",
        "chirped-Gaussian family; example configs configs/fig4_seed.json, "
        "configs/fig4_opt.json, configs/fig4_optimize.json",
    ),
    (
        "propagate_custom",
        "omega_rabi, omega_atom, omega_field [picture=exact|rwa|schrodinger]",
        "constant-parameter propagation of |g>",
    ),
)


def list_scenarios() -> str:
    lines = ["scenario            parameters & defaults"]
    for name, params, desc in _SCENARIO_HELP:
        lines.append(f"{name:<20}{params}")
        lines.append(f"{'':<20}{desc}")
    return "\n".join(lines)


def run(config_path, out_dir=None, steps_override=None):
    """Execute one scenario; returns (exit_code, manifest | None)."""
    start = time.monotonic()
    try:
        config = load_config(config_path)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2, None
    if steps_override is not None:
        from dataclasses import replace as _replace

        config = _replace(config, grid=_replace(config.grid, n_steps=int(steps_override)))
    report = validate_scenario(config)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.ok:
        print("invalid scenario configuration:", file=sys.stderr)
        print(report.summary(), file=sys.stderr)
        if config.scenario not in _RUNNERS:
            print(list_scenarios(), file=sys.stderr)
        return 2, None

    out_dir = out_dir or os.environ.get("PULSE_OUT_DIR") or "."
    os.makedirs(out_dir, exist_ok=True)
    grid = make_uniform_grid(config.grid.t0, config.grid.tf, config.grid.n_steps)
    try:
        written, checks = _RUNNERS[config.scenario](config, grid, out_dir)
    except PulseDesignError as exc:
        print(f"numerical failure in scenario {config.scenario}: {exc}", file=sys.stderr)
        return 3, None

    manifest = RunManifest(
        scenario=config.scenario,
        parameters=dict(sorted(config.parameters.items())),
        grid={"t0_ns": grid.t0, "tf_ns": grid.tf, "n_steps": grid.n_steps},
        version=__version__,
        wall_time_s=time.monotonic() - start,
        outputs=sorted(written),
        checks=checks,
    )
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        fh.write(manifest.to_json())
    print(f"{config.scenario}: wrote {len(written)} series to {out_dir}")
    return 0, manifest


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="norwa",
        description="design and verify fast two-level inversion pulses beyond the "
        "rotating-wave approximation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a scenario config")
    run_p.add_argument("config", help="path to a scenario JSON document")
    run_p.add_argument("--out", default=None, help="output directory (default $PULSE_OUT_DIR or .)")
    run_p.add_argument("--steps", type=int, default=None, help="override grid n_steps")
    sub.add_parser("list", help="list scenarios and their parameters")
    args = parser.parse_args(argv)
    if args.command == "list":
        print(list_scenarios())
        return 0
    code, _ = run(args.config, out_dir=args.out, steps_override=args.steps)
    return code


def entry() -> None:
    raise SystemExit(main())
