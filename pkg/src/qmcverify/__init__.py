"""Verification toolkit for quantum programs modeled as quantum Markov
chains: terminal-state expectations by three independent routes (series
summation, dual fixed-point invariants, spectral closed forms), average
running time, and exact / almost-sure termination analysis."""

__version__ = "0.1.0"

from .channels import (
    DensityOperator,
    Observable,
    SuperOperator,
    apply,
    apply_dual,
    choi_matrix,
    compose,
    matrix_representation,
    maximally_entangled_vector,
    positive_part_decompose,
)
from .errors import (
    ConsistencyError,
    DimensionMismatchError,
    EigensolverError,
    QmcError,
    RepresentationError,
    SingularResolventError,
    ValidationError,
)
from .invariant import (
    ConditionCheck,
    InvariantCertificate,
    certificate_for,
    check_conditions,
    expectation_via_invariant,
    general_expectation,
    completion_expansion_residual,
    least_fixed_point_q,
)
from .linalg import (
    SpectralData,
    is_positive_semidefinite,
    kron,
    loewner_leq,
    spectral_decompose,
)
from .model import Model, ModelOptions, load_model, model_hash, save_model
from .oracle import OracleResult, oracle_expectation, oracle_fixed_point
from .program import (
    ProgramScheme,
    QuantumProgram,
    SeriesResult,
    StepRecord,
    StepTrace,
    TerminationMeasurement,
    check_recursion,
    step_probabilities,
    terminal_state_series,
)
from .spectral import (
    ProgramRepresentation,
    average_running_time,
    build_representation,
    expectation_closed_form,
    power_norm_bound_check,
    filtered_power_residual,
    vec,
)
from .termination import (
    TerminationVerdict,
    check_program_termination,
    check_scheme_termination,
)

__all__ = [
    "ConditionCheck",
    "ConsistencyError",
    "DensityOperator",
    "DimensionMismatchError",
    "EigensolverError",
    "InvariantCertificate",
    "Model",
    "ModelOptions",
    "Observable",
    "OracleResult",
    "ProgramRepresentation",
    "ProgramScheme",
    "QmcError",
    "QuantumProgram",
    "RepresentationError",
    "SeriesResult",
    "SingularResolventError",
    "SpectralData",
    "StepRecord",
    "StepTrace",
    "SuperOperator",
    "TerminationMeasurement",
    "TerminationVerdict",
    "ValidationError",
    "apply",
    "apply_dual",
    "average_running_time",
    "build_representation",
    "certificate_for",
    "check_conditions",
    "check_program_termination",
    "check_recursion",
    "check_scheme_termination",
    "choi_matrix",
    "compose",
    "expectation_closed_form",
    "expectation_via_invariant",
    "general_expectation",
    "is_positive_semidefinite",
    "completion_expansion_residual",
    "kron",
    "least_fixed_point_q",
    "power_norm_bound_check",
    "filtered_power_residual",
    "load_model",
    "loewner_leq",
    "matrix_representation",
    "maximally_entangled_vector",
    "model_hash",
    "oracle_expectation",
    "oracle_fixed_point",
    "positive_part_decompose",
    "save_model",
    "spectral_decompose",
    "step_probabilities",
    "terminal_state_series",
    "vec",
]
