"""Sharp Bellman functions for multiplicative BMO moment inequalities."""

from .bellman import (
    Leaf,
    gradient,
    gradient_batch,
    hessian,
    hessian_batch,
    hessian_leaf_batch,
    solve_leaf,
    value,
    value_batch,
)
from .domain import (
    Params,
    Regime,
    Region,
    a_k,
    a_m,
    bellman2d,
    classify,
    omega2_contains,
    omega3_contains,
    tangent_params,
    transition_level,
)
from .errors import (
    BmoBellError,
    BoundaryError,
    ConvergenceError,
    DomainError,
    SingularityError,
)
from .specfn import QuadratureSpec, gamma_fn, k_fn, m_fn, quad_k, quad_m
from .testfn import (
    ConstPiece,
    LogPiece,
    PiecewiseFn,
    bmo_norm,
    build_psi,
    distribution,
    evaluate,
    from_csv,
    homogenize,
    mean,
    moments,
    optimizer_phi0,
    optimizer_uminus,
    optimizer_uplus,
    random_step_fn,
    second_moment,
    to_csv,
    transfer,
)
from .verify import (
    VerifyReport,
    check_attainment,
    check_c1_glue,
    check_concavity,
    check_identities,
    check_inequality_oracle,
    check_skeleton,
    edge_ratio,
    extract_constant,
    run_suite,
    sharp_constant,
    transference_demo,
    transference_metrics,
)

__all__ = [
    "BmoBellError",
    "BoundaryError",
    "ConvergenceError",
    "DomainError",
    "SingularityError",
    "QuadratureSpec",
    "gamma_fn",
    "k_fn",
    "m_fn",
    "quad_k",
    "quad_m",
    "Params",
    "Regime",
    "Region",
    "a_k",
    "a_m",
    "bellman2d",
    "classify",
    "omega2_contains",
    "omega3_contains",
    "tangent_params",
    "transition_level",
    "Leaf",
    "solve_leaf",
    "value",
    "value_batch",
    "gradient",
    "gradient_batch",
    "hessian",
    "hessian_batch",
    "hessian_leaf_batch",
    "ConstPiece",
    "LogPiece",
    "PiecewiseFn",
    "evaluate",
    "mean",
    "second_moment",
    "moments",
    "distribution",
    "bmo_norm",
    "transfer",
    "homogenize",
    "to_csv",
    "from_csv",
    "optimizer_uplus",
    "optimizer_uminus",
    "optimizer_phi0",
    "build_psi",
    "random_step_fn",
    "VerifyReport",
    "check_identities",
    "check_skeleton",
    "check_concavity",
    "check_c1_glue",
    "check_inequality_oracle",
    "check_attainment",
    "extract_constant",
    "edge_ratio",
    "sharp_constant",
    "transference_demo",
    "transference_metrics",
    "run_suite",
]

__version__ = "0.1.0"
