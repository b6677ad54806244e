"""Convergence-rate certification and parameter selection for
over-relaxed ADMM."""

from .bounds import (
    BoundPair,
    WorstCase,
    bound_pair,
    lower_bound_rate,
    t_matrix_eig,
    upper_rate,
    worst_case_construction,
)
from .certify import (
    ConditioningSpec,
    FeasibilityReport,
    LmiBlocks,
    RateCertificate,
    analytic_certificate,
    assemble_lmi,
    build_blocks,
    build_iqc_weights,
    check_certificate,
    find_certificate,
    iqc_form_residual,
    lmi_blocks,
    max_alpha,
    min_rate,
)
from .engine import (
    AdmmState,
    NormalizedTrace,
    ProxProblem,
    QuadraticInstance,
    StoppingRule,
    admm_step,
    empirical_rate,
    quadratic_problem,
    quadratic_step,
    regularize,
    run,
    trace_csv,
    validate_dynamics,
)
from .errors import (
    AdmmCertError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    EstimationError,
    NoCertifiableAlphaError,
    RankDeficiencyError,
    SubproblemError,
    UncertifiedError,
    UnsupportedProblemError,
    UnsupportedSizeError,
)
from .lasso import (
    GridResult,
    LassoInstance,
    conditioning,
    consensus_problem,
    dual_reference,
    generate_instance,
    grid_csv,
    infer_epsilon,
    reference_solution,
    run_grid,
)
from .linalg import SymMatrix, extreme_eigs, is_negative_semidefinite, sym_eigs

__version__ = "0.1.0"
