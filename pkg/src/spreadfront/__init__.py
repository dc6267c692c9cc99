"""Semi-wave profiles, spreading speeds, and free-boundary simulation for
two-species weak competition with a Stefan-type moving front."""
from __future__ import annotations

from .errors import (
    BlowUp,
    BracketError,
    CFLViolation,
    ConfigError,
    DomainError,
    FitError,
    NonConvergence,
    NumericalError,
    QuadratureError,
    SpeedOutOfRange,
    SpreadfrontError,
    StepRejected,
    UndecidedAtHorizon,
)
from .model_core import (
    CompetitionParams,
    Equilibria,
    SpectralRoots,
    equilibria,
    kernel_exponents,
    linearization_roots,
    nondimensionalize,
)
from .scalar_waves import ScalarProfile, solve_kpp, solve_omega
from .semiwave import (
    IterationState,
    NoNontrivialSolution,
    SemiWaveConfig,
    SemiWaveProfile,
    apply_F,
    build_upper_solution,
    critical_speed,
    decay_fit,
    perturbed_speed,
    solve_semiwave,
    speed_for_gamma,
)
from .stefan_sim import (
    FreeBoundaryState,
    InitialData,
    SimOutcome,
    StefanConfig,
    classify_threshold_gamma,
    make_initial_data,
    simulate,
    step,
)
from .dynamics import (
    SandwichIterates,
    dichotomy_predicates,
    logistic_upper_bound,
    sandwich,
)

__version__ = "0.1.0"
