"""Gradient Mittag-Leffler stability and stabilization of Caputo time-fractional
diffusion systems, computed in closed spectral form."""

from .errors import (
    AccuracyError,
    DesignError,
    DomainError,
    GapError,
    GradStabError,
    GridError,
    PoleError,
    ResolutionError,
)
from .fdesolver import (
    ForcingSignal,
    Trajectory,
    default_time_grid,
    evolve_forced_mode,
    evolve_homogeneous,
    gradient_norm,
    sample_field,
    sample_gradient_field,
    state_norm,
)
from .mlf import MLEvalPolicy, gamma, ml1, ml1_neg_bounds, ml2
from .spectral import (
    Family,
    FeedbackLaw,
    Mode,
    Polynomial,
    SampledGrid,
    SpectralSystem,
    StabilityVerdict,
    Support,
    VerdictKind,
    build_sine_1d,
    build_sine_2d,
    classify_stability,
    closed_loop,
    decompose,
    load_custom_table,
    partition_spectrum,
    project_initial_state,
)
from .stabilizer import (
    REFERENCE_TABLE1,
    TABLE1_Q,
    ExperimentSpec,
    StabilizationReport,
    run_algorithm,
    run_decomposition_feedback,
    benchmark_feedback,
    benchmark_initial_state,
    benchmark_system,
    table1_experiment,
)

__version__ = "0.1.0"
