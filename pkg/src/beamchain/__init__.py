"""Collision-model simulator for a mode repeatedly meeting fresh reservoir
modes at a beam splitter, with exact phase-space analytics to check it."""

from .channel import (
    ChannelParams,
    CollisionChannel,
    CouplingSchedule,
    RelaxationTrajectory,
    apply_channel,
    beam_splitter_unitary,
    heisenberg_check,
    iterate_to_fixed_point,
    run_schedule,
    sector_blocks,
)
from .charfn import (
    CharFn,
    CharFnMoments,
    ProductTruncation,
    asymptotic_charfn,
    asymptotic_product,
    charfn_coherent,
    charfn_fock,
    charfn_of_state,
    charfn_thermal,
    laguerre_polynomial,
    log_charfn_quartic_coeff,
    moments_from_charfn,
    q_pochhammer,
)
from .errors import (
    BeamchainError,
    ConfigError,
    CutoffTooSmallError,
    EstimationError,
    InvalidLevelError,
    InvalidParameterError,
    NumericalInstabilityError,
    ResourceLimitError,
    ShapeError,
    UnphysicalStateError,
)
from .fock import (
    DensityMatrix,
    FockCutoff,
    ModeOperators,
    coherent_state,
    displace_state,
    displacement_matrix,
    fock_state,
    mode_operators,
    partial_trace_b,
    tensor_product,
    thermal_state,
)
from .gaussian import (
    GaussianState,
    asymptotic_gaussian,
    gaussian_charfn,
    gaussian_entropy,
    gaussian_from_moments,
    gaussian_purity,
    gaussian_qcs_squared,
    symplectic_entropy,
    thermal_match,
)
from .measures import (
    MeasureReport,
    mean_photon_number,
    measure_report,
    purity,
    qcs_squared,
    trace_distance,
    von_neumann_entropy,
)
from .runtime import active_backend, max_dimension
from .scenarios import (
    GridSpec,
    RunRecord,
    ScenarioConfig,
    analytic_charfn,
    build_state,
    emit_plot_data,
    parse_config,
    run_scenario,
    serialize_config,
)

__version__ = "0.1.0"

__all__ = [
    "BeamchainError",
    "ChannelParams",
    "CharFn",
    "CharFnMoments",
    "CollisionChannel",
    "ConfigError",
    "CouplingSchedule",
    "CutoffTooSmallError",
    "DensityMatrix",
    "EstimationError",
    "FockCutoff",
    "GaussianState",
    "GridSpec",
    "InvalidLevelError",
    "InvalidParameterError",
    "MeasureReport",
    "ModeOperators",
    "NumericalInstabilityError",
    "ProductTruncation",
    "RelaxationTrajectory",
    "ResourceLimitError",
    "RunRecord",
    "ScenarioConfig",
    "ShapeError",
    "UnphysicalStateError",
    "active_backend",
    "analytic_charfn",
    "apply_channel",
    "asymptotic_charfn",
    "asymptotic_gaussian",
    "asymptotic_product",
    "beam_splitter_unitary",
    "build_state",
    "charfn_coherent",
    "charfn_fock",
    "charfn_of_state",
    "charfn_thermal",
    "coherent_state",
    "displace_state",
    "displacement_matrix",
    "emit_plot_data",
    "fock_state",
    "gaussian_charfn",
    "gaussian_entropy",
    "gaussian_from_moments",
    "gaussian_purity",
    "gaussian_qcs_squared",
    "heisenberg_check",
    "iterate_to_fixed_point",
    "laguerre_polynomial",
    "log_charfn_quartic_coeff",
    "max_dimension",
    "mean_photon_number",
    "measure_report",
    "mode_operators",
    "moments_from_charfn",
    "parse_config",
    "partial_trace_b",
    "purity",
    "q_pochhammer",
    "qcs_squared",
    "run_scenario",
    "run_schedule",
    "sector_blocks",
    "serialize_config",
    "symplectic_entropy",
    "tensor_product",
    "thermal_match",
    "thermal_state",
    "trace_distance",
    "von_neumann_entropy",
]
