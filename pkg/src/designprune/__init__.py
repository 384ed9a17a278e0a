"""Optimal approximate designs on finite candidate sets, with certified
candidate deletion.

The library computes phi_p-optimal design weights by a multiplicative
algorithm and, along the way, deletes candidates that provably carry no
weight in any optimal design.  Each deletion check costs one univariate
root solve plus a scan of the variance function over the active set.
"""

from .bound import (
    BoundReport,
    RootBracketError,
    bound_equation,
    deletion_bound,
    h_p_threshold,
    prune_mask,
    root_F,
    root_F_p0,
    support_bound,
)
from .criteria import (
    CriterionConfig,
    CriterionState,
    dir_derivative,
    efficiency_bounds,
    epsilon,
    equivalence_check,
    info_matrix,
    make_state,
    phi_p,
    phi_p_gradient,
    variance_function,
)
from .designspace import (
    CandidateSet,
    ModelSpec,
    example1_design,
    format_float,
    grid_candidates,
    load_candidates_csv,
    load_design_json,
    save_candidates_csv,
    save_design_json,
    uniform_weights,
    validate_weights,
)
from .solver import (
    SolveConfig,
    SolveResult,
    TraceRow,
    multiplicative_step,
    solve,
    support_of,
    write_trace_csv,
)
from .symmat import SingularityError

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "CandidateSet",
    "CriterionConfig",
    "CriterionState",
    "ModelSpec",
    "RootBracketError",
    "SingularityError",
    "SolveConfig",
    "SolveResult",
    "TraceRow",
    "bound_equation",
    "deletion_bound",
    "dir_derivative",
    "efficiency_bounds",
    "epsilon",
    "equivalence_check",
    "example1_design",
    "format_float",
    "grid_candidates",
    "h_p_threshold",
    "info_matrix",
    "load_candidates_csv",
    "load_design_json",
    "make_state",
    "multiplicative_step",
    "phi_p",
    "phi_p_gradient",
    "prune_mask",
    "root_F",
    "root_F_p0",
    "save_candidates_csv",
    "save_design_json",
    "solve",
    "support_bound",
    "support_of",
    "uniform_weights",
    "validate_weights",
    "variance_function",
    "write_trace_csv",
    "__version__",
]
