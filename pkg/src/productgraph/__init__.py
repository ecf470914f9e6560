"""Learning Cartesian product graphs from two-way signals under Laplacian constraints."""
from .estimator import ProductGraphLearner
from .exceptions import (
    ConnectivityFailure,
    DegenerateSupport,
    DisconnectedGraph,
    DisconnectedIterate,
    EmptyNeighborhood,
    InsufficientPoints,
    InvalidInput,
    NoCleanFiber,
    NonFiniteObjective,
    ProductGraphError,
    StepTooLarge,
    ZeroTrace,
)
from .graph import (
    adjoint_on_matrix,
    kron_sum,
    laplacian_from_weights,
    product_weights,
    project_to_laplacian_weights,
    validate_laplacian,
)
from .metrics import RatePoint, factor_errors, fit_rate_constant, pr_auc, rel_err, trace_normalize
from .missing import initial_impute, masked_mode_covariances, mwgl_missing_solve, tikhonov_refine
from .model import ModeCovariances, full_scm, mode_covariances, sample_igmrf
from .solver import SolveResult, SolverConfig, gradient, initialize_weights, mwgl_solve, objective, pgd_step
from .spectral import (
    compute_H_matrices,
    factor_eigendecomposition,
    naive_H_matrices,
    product_pseudo_logdet,
    product_spectrum,
)
from .synth import GraphRecipe, assign_weights, generate_topology, make_factor

__version__ = "0.1.0"
