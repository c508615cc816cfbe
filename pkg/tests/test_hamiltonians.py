import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from norwa import (
    GROUND,
    Picture,
    PulseSpec,
    detuning,
    eigensystem,
    eigensystem_series,
    h_interaction,
    h_rwa,
    h_schrodinger,
    make_uniform_grid,
    omega_complex,
    propagate,
    transform_between_pictures,
    u_phi,
)
from norwa.core import constant, hermiticity_defect

TWO_PI = 2.0 * math.pi


def make_pulse(rabi=1.0, omega0=0.0, omega_l=0.0, phi0=0.0):
    return PulseSpec(
        rabi=constant(rabi),
        phase=lambda t: omega_l * np.asarray(t, dtype=float) + phi0,
        phase_rate=constant(omega_l),
        omega0=constant(omega0),
    )


class TestDetuning:
    def test_resonance(self):
        pulse = make_pulse(omega0=TWO_PI * 5, omega_l=TWO_PI * 5)
        assert detuning(pulse, 0.3) == pytest.approx(0.0)

    def test_allen_eberly_midpoint(self, ae_pulse, ae_params):
        assert detuning(ae_pulse, ae_params.tf / 2) == pytest.approx(0.0, abs=1e-14)

    def test_zero_transition_frequency(self):
        pulse = make_pulse(omega0=0.0, omega_l=TWO_PI * 10)
        assert detuning(pulse, 1.0) == pytest.approx(-TWO_PI * 10)


class TestOmegaComplex:
    def test_zero_phase_doubles(self):
        pulse = make_pulse(rabi=0.7, phi0=0.0)
        assert omega_complex(pulse, 0.0) == pytest.approx(1.4)

    def test_quarter_turn_vanishes(self):
        pulse = make_pulse(rabi=0.7, phi0=math.pi / 2)
        assert abs(omega_complex(pulse, 0.0)) == pytest.approx(0.0, abs=1e-15)

    def test_eighth_turn_hand_value(self):
        # 1 + exp(-i pi/2) = 1 - i
        pulse = make_pulse(rabi=1.0, phi0=math.pi / 4)
        assert omega_complex(pulse, 0.0) == pytest.approx(1.0 - 1.0j)

    @given(rabi=st.floats(-5, 5), phi=st.floats(-20, 20))
    def test_polar_identity(self, rabi, phi):
        pulse = make_pulse(rabi=rabi, phi0=phi)
        expected = 2.0 * rabi * math.cos(phi) * np.exp(-1j * phi)
        assert omega_complex(pulse, 0.0) == pytest.approx(expected, abs=1e-12)


class TestInteractionHamiltonian:
    def test_zero_pulse_gives_zero_matrix(self):
        pulse = make_pulse(rabi=0.0, omega0=0.0)
        assert np.allclose(h_interaction(pulse).matrix(0.1), 0.0)

    def test_structure_matches_pulse(self, ae_pulse):
        h = h_interaction(ae_pulse)
        ts = np.linspace(0.0, 0.4, 57)
        hgg, hge, _, hee = h.elements(ts)
        assert np.allclose(hge, omega_complex(ae_pulse, ts) / 2.0)
        assert np.allclose(hee - hgg, detuning(ae_pulse, ts))

    def test_three_four_five_gap(self):
        pulse = make_pulse(rabi=2.0, omega0=3.0)  # Delta=3, Omega=4
        es = eigensystem(h_interaction(pulse), 0.0)
        assert es.epsilon0 == pytest.approx(5.0)

    def test_hermitian_on_random_times(self, ae_pulse):
        rng = np.random.default_rng(7)
        ts = rng.uniform(0.0, 0.4, 1000)
        assert hermiticity_defect(h_interaction(ae_pulse), ts) < 1e-12


class TestSchrodingerHamiltonian:
    def test_quarter_phase_kills_coupling(self):
        pulse = make_pulse(rabi=1.0, phi0=math.pi / 2)
        m = h_schrodinger(pulse).matrix(0.0)
        assert abs(m[0, 1]) < 1e-15

    def test_no_drive_is_bare_atom(self):
        pulse = make_pulse(rabi=0.0, omega0=2.0)
        m = h_schrodinger(pulse).matrix(0.3)
        assert np.allclose(m, np.diag([-1.0, 1.0]))

    def test_picture_equivalent_populations(self, ae_pulse):
        # same physics propagated in S and in I agree on bare populations
        grid = make_uniform_grid(0.0, 0.4, 30000)
        res_s = propagate(h_schrodinger(ae_pulse), GROUND.as_array(), grid)
        res_i = propagate(h_interaction(ae_pulse), GROUND.as_array(), grid)
        assert np.max(np.abs(res_s.p_g - res_i.p_g)) < 2e-8


class TestRwaHamiltonian:
    def test_phase_absent_from_coupling(self):
        pulse = make_pulse(rabi=0.8, omega_l=TWO_PI * 3)
        ts = np.linspace(0.0, 1.0, 11)
        _, hge, _, _ = h_rwa(pulse).elements(ts)
        assert np.allclose(hge, 0.4)

    def test_resonant_rabi_oscillation(self):
        omega_r = TWO_PI * 0.1
        pulse = make_pulse(rabi=omega_r)
        grid = make_uniform_grid(0.0, 5.0, 500)
        res = propagate(h_rwa(pulse), GROUND.as_array(), grid)
        assert np.max(np.abs(res.p_e - np.sin(omega_r * grid.samples / 2.0) ** 2)) < 1e-8

    def test_free_evolution_constant_population(self):
        pulse = make_pulse(rabi=0.0, omega0=1.0, omega_l=2.0)
        grid = make_uniform_grid(0.0, 5.0, 200)
        res = propagate(h_rwa(pulse), GROUND.as_array(), grid)
        assert np.max(np.abs(res.p_g - 1.0)) < 1e-14


class TestUPhi:
    def test_identity_at_zero(self):
        assert np.allclose(u_phi(0.0), np.eye(2))

    def test_full_turn_is_minus_identity(self):
        assert np.allclose(u_phi(2.0 * math.pi), -np.eye(2))

    @given(phi=st.floats(-50, 50))
    def test_unitary(self, phi):
        u = u_phi(phi)
        assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-15)


class TestPictureTransforms:
    def test_schrodinger_to_interaction_matches_direct(self, ae_pulse):
        h_s = h_schrodinger(ae_pulse)
        h_i_direct = h_interaction(ae_pulse)
        h_i = transform_between_pictures(
            h_s, ae_pulse.phase, ae_pulse.phase_rate, "S_to_I"
        )
        rng = np.random.default_rng(3)
        for t in rng.uniform(0.0, 0.4, 100):
            assert np.allclose(h_i.matrix(t), h_i_direct.matrix(t), atol=1e-12)

    def test_round_trip_is_identity(self, ae_pulse):
        h_s = h_schrodinger(ae_pulse)
        back = transform_between_pictures(
            transform_between_pictures(h_s, ae_pulse.phase, ae_pulse.phase_rate, "S_to_I"),
            ae_pulse.phase,
            ae_pulse.phase_rate,
            "I_to_S",
        )
        assert back.picture is Picture.S
        for t in (0.0, 0.123, 0.4):
            assert np.allclose(back.matrix(t), h_s.matrix(t), atol=1e-12)

    def test_pure_rotation_transforms_to_zero(self):
        # H equal to the rotation generator itself vanishes in the new picture
        omega_l = TWO_PI * 2.0
        from norwa import Hamiltonian2x2

        def element_fn(t):
            t = np.asarray(t, dtype=float)
            half = np.full_like(t, omega_l / 2.0).astype(complex)
            zero = np.zeros_like(t).astype(complex)
            return -half, zero, zero, half

        h_phi = Hamiltonian2x2(Picture.S, element_fn)
        moved = transform_between_pictures(
            h_phi, lambda t: omega_l * np.asarray(t, float), constant(omega_l), "S_to_I"
        )
        assert np.allclose(moved.matrix(0.37), 0.0, atol=1e-14)

    def test_direction_mismatch_raises(self, ae_pulse):
        with pytest.raises(ValueError):
            transform_between_pictures(
                h_interaction(ae_pulse), ae_pulse.phase, ae_pulse.phase_rate, "S_to_I"
            )


class TestEigensystem:
    def test_symmetric_superposition_at_resonance(self):
        pulse = make_pulse(rabi=0.5, omega0=0.0)  # Delta=0, Omega=1 real
        es = eigensystem(h_interaction(pulse), 0.0)
        assert np.allclose(np.abs(es.v_plus), [1 / math.sqrt(2)] * 2, atol=1e-12)
        assert es.e_plus == pytest.approx(0.5)

    def test_large_detuning_limit(self):
        # Delta/|Omega| = 1e6 with Delta > 0: plus state is essentially |e>
        pulse = make_pulse(rabi=0.5, omega0=1e6)
        es = eigensystem(h_interaction(pulse), 0.0)
        assert abs(es.v_plus[1]) > 1.0 - 1e-6
        assert abs(es.v_minus[0]) > 1.0 - 1e-6

    def test_degenerate_point_flagged(self):
        pulse = make_pulse(rabi=0.0, omega0=0.0)
        es = eigensystem(h_interaction(pulse), 0.0)
        assert es.degenerate
        assert np.allclose(es.v_plus, [1, 0])
        assert np.allclose(es.v_minus, [0, 1])

    @given(
        delta=st.floats(-10, 10),
        om_re=st.floats(-10, 10),
        om_im=st.floats(-10, 10),
    )
    def test_eigen_identity_and_orthogonality(self, delta, om_re, om_im):
        from norwa import Hamiltonian2x2

        omega = om_re + 1j * om_im

        def element_fn(t):
            t = np.asarray(t, dtype=float)
            shape = np.broadcast_to(1.0, t.shape)
            return (
                -delta / 2.0 * shape.astype(complex),
                omega / 2.0 * shape.astype(complex),
                np.conj(omega) / 2.0 * shape.astype(complex),
                delta / 2.0 * shape.astype(complex),
            )

        h = Hamiltonian2x2(Picture.I, element_fn)
        es = eigensystem(h, 0.0)
        tol = 1e-10 * es.epsilon0 if es.epsilon0 > 0 else 1e-10
        m = h.matrix(0.0)
        assert np.linalg.norm(m @ es.v_plus - es.e_plus * es.v_plus) <= tol
        assert np.linalg.norm(m @ es.v_minus - es.e_minus * es.v_minus) <= tol
        assert abs(np.vdot(es.v_plus, es.v_minus)) < 1e-12
        assert np.linalg.norm(es.v_plus) == pytest.approx(1.0, abs=1e-12)
        assert es.epsilon0 == pytest.approx(math.hypot(delta, abs(omega)), rel=1e-12)

    def test_series_has_continuous_sign(self, ae_pulse):
        h = h_interaction(ae_pulse)
        ts = np.linspace(0.0, 0.4, 4001)
        systems = eigensystem_series(h, ts)
        overlaps = [
            abs(np.vdot(a.v_plus, b.v_plus))
            for a, b in zip(systems[:-1], systems[1:])
        ]
        # magnitude of successive overlaps should stay near 1 (no flips)
        assert min(np.vdot(a.v_plus, b.v_plus).real for a, b in zip(systems[:-1], systems[1:])) > 0.9
        assert min(overlaps) > 0.9
