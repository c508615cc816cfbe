"""Design and verification of fast population-inversion pulses for two-level
systems when the rotating-wave approximation does not hold."""

__version__ = "0.1.0"

from .core import (
    GROUND,
    EXCITED,
    ConfigError,
    DegeneracyError,
    DesignInfeasibleError,
    Hamiltonian2x2,
    NumericsError,
    Picture,
    PulseDesignError,
    PulseSpec,
    ResolutionError,
    ScenarioConfig,
    SingularSampleError,
    StateVector,
    TimeGrid,
    ValidationReport,
    load_config,
    make_uniform_grid,
    parse_quantity,
    validate_scenario,
)
from .counterdiabatic import (
    AllenEberlyParams,
    CdDecomposition,
    RepairedPulse,
    allen_eberly_pulse,
    cd_term,
    extract_phase_tilde,
    h_s_doubleprime,
    repair_consistency,
    total_hamiltonian,
)
from .design_few import (
    FewOscillationDesign,
    PolynomialAnsatz,
    build_alpha_constraints,
    build_theta_constraints,
    cos_phase_zeros,
    design_few_oscillation,
    solve_polynomial,
)
from .design_many import (
    ChirpGaussParams,
    OptimizationTrace,
    chirp_gauss_pulse,
    inversion_objective,
    optimize_inversion,
    theta_final,
)
from .hamiltonians import (
    EigenSystem,
    detuning,
    eigensystem,
    eigensystem_series,
    h_interaction,
    h_rwa,
    h_schrodinger,
    omega_complex,
    transform_between_pictures,
    u_phi,
)
from .invariants import (
    AngleTrajectory,
    C2Function,
    InvariantParams,
    LinearPhase,
    LrPhase,
    auxiliary_odes_exact,
    auxiliary_odes_rwa,
    invariance_residual,
    invariance_residual_series,
    invariant_eigenstates,
    invariant_matrix,
    inverse_exact,
    inverse_rwa,
    lr_phase,
)
from .propagator import (
    PropagationResult,
    fidelity_inversion,
    propagate,
    propagate_final,
    propagate_step,
)
