"""Randomized low-rank preconditioned ADMM for composite convex problems.

An inexact linearized ADMM whose linear subproblems are solved by conjugate
gradients preconditioned with a randomized low-rank eigenvalue sketch of
the curvature operator. Front-ends cover the elastic net / lasso, l1
logistic regression, and the dual kernel SVM.
"""

from .admm import (
    AdmmConfig,
    AdmmState,
    IterationInfo,
    ProblemSpec,
    SolveReport,
    SubproblemSystem,
    ToleranceSchedule,
    next_subproblem_tol,
    residuals,
    solve,
    stopping_check,
)
from .datasets import Dataset, read_csv, read_libsvm, write_csv, write_libsvm
from .errors import (
    DataFormatError,
    DimensionMismatchError,
    NumericalBreakdownError,
    NysadmmError,
    SketchFactorizationError,
    ValidationError,
)
from .linops import (
    SymmetricPsdOperator,
    as_dense_matrix,
    as_vector,
    gram_operator,
    kernel_matrix,
    random_features,
    svm_operator,
)
from .nystrom import (
    AdaptiveConfig,
    NystromApproximation,
    SketchConfig,
    adaptive_nystrom_approx,
    effective_dimension,
    rand_nystrom_approx,
    theoretical_sketch_size,
)
from .pcg import PcgConfig, PcgReport, nystrom_pcg, theory_pcg_cap
from .precond import (
    NystromPreconditioner,
    build_preconditioner,
    empirical_condition_number,
)
from .problems import (
    ElasticNetProblem,
    LogisticProblem,
    SvmProblem,
    SvmSupportInfo,
    elastic_net_spec,
    lasso_kkt,
    logistic_spec,
    logistic_weights,
    svm_spec,
    svm_support_expansion,
)
from .prox import BoxHyperplaneSet, project_box_hyperplane, soft_threshold

__version__ = "0.1.0"

__all__ = [
    "AdaptiveConfig",
    "AdmmConfig",
    "AdmmState",
    "BoxHyperplaneSet",
    "DataFormatError",
    "Dataset",
    "DimensionMismatchError",
    "ElasticNetProblem",
    "IterationInfo",
    "LogisticProblem",
    "NumericalBreakdownError",
    "NysadmmError",
    "NystromApproximation",
    "NystromPreconditioner",
    "PcgConfig",
    "PcgReport",
    "ProblemSpec",
    "SketchConfig",
    "SketchFactorizationError",
    "SolveReport",
    "SubproblemSystem",
    "SvmProblem",
    "SvmSupportInfo",
    "SymmetricPsdOperator",
    "ToleranceSchedule",
    "ValidationError",
    "adaptive_nystrom_approx",
    "as_dense_matrix",
    "as_vector",
    "build_preconditioner",
    "effective_dimension",
    "elastic_net_spec",
    "empirical_condition_number",
    "gram_operator",
    "kernel_matrix",
    "lasso_kkt",
    "logistic_spec",
    "logistic_weights",
    "next_subproblem_tol",
    "nystrom_pcg",
    "project_box_hyperplane",
    "rand_nystrom_approx",
    "random_features",
    "read_csv",
    "read_libsvm",
    "residuals",
    "soft_threshold",
    "solve",
    "stopping_check",
    "svm_operator",
    "svm_spec",
    "svm_support_expansion",
    "theoretical_sketch_size",
    "theory_pcg_cap",
    "write_csv",
    "write_libsvm",
]
