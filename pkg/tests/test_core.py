import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from norwa import (
    ConfigError,
    StateVector,
    make_uniform_grid,
    parse_quantity,
    validate_scenario,
)
from norwa.core import (
    ScenarioConfig,
    config_from_dict,
    constant,
    phase_rate_defect,
)
from norwa import PulseSpec

TWO_PI = 2.0 * math.pi


class TestMakeUniformGrid:
    def test_simple_samples(self):
        grid = make_uniform_grid(0.0, 0.4, 4)
        assert np.allclose(grid.samples, [0.0, 0.1, 0.2, 0.3, 0.4], atol=1e-15)

    def test_endpoints_only(self):
        grid = make_uniform_grid(0.0, 5.0, 1)
        assert grid.samples.tolist() == [0.0, 5.0]

    def test_fine_grid_resolves_carrier(self):
        # dt = 5e-6 ns; a 2pi*10 rad/ns phase has period 0.1 ns, so the grid
        # puts 20000 steps into each period (computed directly from dt)
        grid = make_uniform_grid(0.0, 0.4, 80000)
        assert grid.dt == pytest.approx(5e-6, rel=1e-12)
        period = TWO_PI / (TWO_PI * 10.0)
        assert period / grid.dt == pytest.approx(20000.0, rel=1e-9)

    @pytest.mark.parametrize(
        "t0,tf,n",
        [(0.0, 0.0, 4), (1.0, 0.5, 4), (0.0, 1.0, 0), (np.nan, 1.0, 4), (0.0, np.inf, 4)],
    )
    def test_rejects_bad_inputs(self, t0, tf, n):
        with pytest.raises(ValueError):
            make_uniform_grid(t0, tf, n)

    @given(
        t0=st.floats(-10.0, 10.0),
        span=st.floats(1e-3, 100.0),
        n=st.integers(1, 5000),
    )
    def test_uniform_and_monotone(self, t0, span, n):
        grid = make_uniform_grid(t0, t0 + span, n)
        assert len(grid.samples) == n + 1
        assert grid.samples[0] == t0 and grid.samples[-1] == t0 + span
        steps = np.diff(grid.samples)
        assert np.all(steps > 0)
        # uniform within rounding of the sample values themselves
        scale = max(1.0, abs(grid.t0), abs(grid.tf))
        assert np.max(np.abs(steps - grid.dt)) <= 8.0 * np.finfo(float).eps * scale


class TestStateVector:
    def test_populations(self):
        sv = StateVector(0.6, 0.8j)
        assert sv.p_g == pytest.approx(0.36)
        assert sv.p_e == pytest.approx(0.64)
        assert sv.norm == pytest.approx(1.0)

    def test_array_round_trip(self):
        sv = StateVector(1 / math.sqrt(2), 1j / math.sqrt(2))
        assert StateVector.from_array(sv.as_array()) == sv


class TestParseQuantity:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("2pi*3MHz", TWO_PI * 3e-3),
            ("2pi*10GHz", TWO_PI * 10.0),
            ("2pi*200MHz", TWO_PI * 0.2),
            ("(2pi)^2*254.648MHz^2", TWO_PI**2 * 254.648e-6),
            ("(2pi)^2*506.606MHz^2", TWO_PI**2 * 506.606e-6),
            ("0.05ns", 0.05),
            ("0.1us", 100.0),
            ("5ns", 5.0),
            ("2pi*500MHz", TWO_PI * 0.5),
            ("1.5", 1.5),
            ("2pi*1", TWO_PI),
            ("3.0rad/ns", 3.0),
            ("1e-3s", 1e6),
        ],
    )
    def test_notation(self, text, expected):
        assert parse_quantity(text) == pytest.approx(expected, rel=1e-12)

    def test_plain_numbers_pass_through(self):
        assert parse_quantity(3) == 3.0
        assert parse_quantity(0.25) == 0.25

    @pytest.mark.parametrize("bad", ["2pi x 3MHz", "3 furlongs", "MHz", "", None, True])
    def test_rejects_garbage(self, bad):
        with pytest.raises(ConfigError):
            parse_quantity(bad)

    @given(value=st.floats(1e-6, 1e6), unit=st.sampled_from(["MHz", "GHz", "kHz"]))
    def test_prefix_scales_by_two_pi(self, value, unit):
        plain = parse_quantity(f"{value!r}{unit}")
        with_prefix = parse_quantity(f"2pi*{value!r}{unit}")
        assert with_prefix == pytest.approx(TWO_PI * plain, rel=1e-12)


class TestPulseSpecConsistency:
    def test_phase_rate_matches_derivative(self, ae_pulse):
        times = np.linspace(0.01, 0.39, 200)
        max_rate = np.max(np.abs(ae_pulse.phase_rate(times)))
        assert phase_rate_defect(ae_pulse, times) < 1e-6 * max_rate

    def test_chirp_phase_rate_matches_derivative(self, chirp_seed):
        from norwa import chirp_gauss_pulse

        pulse = chirp_gauss_pulse(chirp_seed)
        times = np.linspace(1.0, 99.0, 200)
        max_rate = np.max(np.abs(pulse.phase_rate(times)))
        assert phase_rate_defect(pulse, times) < 1e-6 * max_rate


def _fig1_config(n_steps=20000, drop=None):
    doc = {
        "scenario": "cd_allen_eberly",
        "parameters": {
            "omega_m": "2pi*3MHz",
            "delta": "2pi*200MHz",
            "t0": "0.05ns",
            "omega_l": "2pi*10GHz",
        },
        "grid": {"t0": "0ns", "tf": "0.4ns", "n_steps": n_steps},
        "outputs": ["populations", "phase_tilde"],
    }
    if drop:
        del doc["parameters"][drop]
    return config_from_dict(doc)


class TestValidateScenario:
    def test_complete_config_is_ok(self):
        report = validate_scenario(_fig1_config())
        assert report.ok, report.summary()
        assert not report.warnings

    def test_missing_key_listed(self):
        report = validate_scenario(_fig1_config(drop="t0"))
        assert not report.ok
        assert "t0" in report.missing

    def test_coarse_grid_flags_resolution(self):
        # 10 steps over 0.4 ns cannot resolve a 2pi*10 rad/ns carrier
        report = validate_scenario(_fig1_config(n_steps=10))
        assert any("resolution" in w for w in report.warnings)

    def test_unknown_scenario(self):
        cfg = ScenarioConfig(
            scenario="nope",
            parameters={},
            grid=type(_fig1_config().grid)(0.0, 1.0, 100),
            outputs=(),
        )
        report = validate_scenario(cfg)
        assert not report.ok
        assert any("unknown scenario" in v for v in report.violations)

    def test_non_finite_parameter(self):
        cfg = _fig1_config()
        cfg.parameters["delta"] = float("inf")
        report = validate_scenario(cfg)
        assert not report.ok


class TestConfigParsing:
    def test_round_trip_through_json(self, tmp_path):
        from norwa import load_config

        doc = {
            "comment": "test",
            "scenario": "invariant_many",
            "parameters": {
                "a": "(2pi)^2*254.648MHz^2",
                "omega_rabi": "2pi*2GHz",
                "big_a": "(2pi)^2*506.606MHz^2",
                "omega_atom": "2pi*5GHz",
            },
            "mode": "evaluate",
            "grid": {"t0": 0, "tf": "0.1us", "n_steps": 400000},
            "outputs": ["populations"],
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(doc))
        cfg = load_config(path)
        assert cfg.grid.tf == pytest.approx(100.0)
        assert cfg.parameters["omega_atom"] == pytest.approx(TWO_PI * 5.0)
        assert cfg.options["mode"] == "evaluate"
        assert validate_scenario(cfg).ok

    def test_enumerated_string_goes_to_options(self):
        doc = {
            "scenario": "cd_allen_eberly",
            "parameters": {
                "omega_m": "2pi*3MHz",
                "delta": "2pi*200MHz",
                "t0": "0.05ns",
                "omega_l": "2pi*10GHz",
                "envelope": "sinh",
            },
            "grid": {"t0": 0, "tf": "0.4ns", "n_steps": 1000},
        }
        cfg = config_from_dict(doc)
        assert cfg.options["envelope"] == "sinh"
        assert "envelope" not in cfg.parameters


def test_constant_evaluator_broadcasts():
    fn = constant(2.5)
    assert fn(0.3) == pytest.approx(2.5)
    assert np.all(fn(np.zeros(7)) == 2.5)


def test_pulsespec_is_immutable():
    pulse = PulseSpec(
        rabi=constant(1.0),
        phase=constant(0.0),
        phase_rate=constant(0.0),
        omega0=constant(0.0),
    )
    with pytest.raises(Exception):
        pulse.rabi = constant(2.0)
