import math

import hypothesis
import numpy as np
import pytest

from norwa import AllenEberlyParams, ChirpGaussParams, PulseSpec, allen_eberly_pulse
from norwa.core import constant

hypothesis.settings.register_profile(
    "numeric", max_examples=25, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("numeric")

TWO_PI = 2.0 * math.pi


@pytest.fixture(scope="session")
def ae_params():
    """Sweep parameters of the headline counterdiabatic scenario."""
    return AllenEberlyParams(
        omega_m=TWO_PI * 3e-3,
        delta=TWO_PI * 0.2,
        t0=0.05,
        tf=0.4,
        omega_l=TWO_PI * 10.0,
    )


@pytest.fixture(scope="session")
def ae_pulse(ae_params):
    return allen_eberly_pulse(ae_params)


@pytest.fixture(scope="session")
def chirp_seed():
    """Seed of the chirped-Gaussian scenario (fails to invert)."""
    return ChirpGaussParams(
        a=TWO_PI**2 * 254.648e-6,
        omega_rabi=TWO_PI * 2.0,
        big_a=TWO_PI**2 * 506.606e-6,
        tf=100.0,
        omega_atom=TWO_PI * 5.0,
    )


@pytest.fixture(scope="session")
def chirp_opt(chirp_seed):
    """Published optimized pair of the chirped-Gaussian scenario."""
    from dataclasses import replace

    return replace(chirp_seed, a=TWO_PI**2 * 272.824e-6, omega_rabi=TWO_PI * 2.202)


def resonant_pulse(omega_r: float) -> PulseSpec:
    """Constant Rabi drive at zero detuning and zero phase."""
    return PulseSpec(
        rabi=constant(omega_r),
        phase=lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        phase_rate=constant(0.0),
        omega0=constant(0.0),
        rabi_rate=constant(0.0),
        omega0_rate=constant(0.0),
        phase_accel=constant(0.0),
    )
