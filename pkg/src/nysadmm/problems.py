"""Problem front-ends: elastic net / lasso, l1 logistic regression, and the
dual kernel SVM, each packaged as a ProblemSpec for the driver.

The quadratic losses (elastic net, SVM) have constant curvature, so their
specs never ask for a sketch refresh; logistic regression re-weights its
Gram operator every iteration by default.
"""

from dataclasses import dataclass

import numpy as np

from .admm import ProblemSpec
from .errors import ValidationError
from .linops import as_dense_matrix, as_vector, gram_operator, svm_operator
from .prox import BoxHyperplaneSet, project_box_hyperplane, soft_threshold

__all__ = [
    "ElasticNetProblem",
    "LogisticProblem",
    "SvmProblem",
    "SvmSupportInfo",
    "elastic_net_spec",
    "logistic_weights",
    "logistic_spec",
    "svm_spec",
    "lasso_kkt",
    "svm_support_expansion",
]

LOGISTIC_WEIGHT_FLOOR = 1e-12


@dataclass(frozen=True)
class ElasticNetProblem:
    """min 0.5 ||Ax - b||^2 + 0.5 ridge ||x||^2 + gamma ||x||_1."""

    features: np.ndarray
    labels: np.ndarray
    gamma: float
    ridge: float = 0.0

    def __post_init__(self):
        a = as_dense_matrix(self.features, "features")
        b = as_vector(self.labels, "labels", size=a.shape[0])
        if self.gamma < 0:
            raise ValidationError(f"gamma must be nonnegative, got {self.gamma}")
        if self.ridge < 0:
            raise ValidationError(f"ridge must be nonnegative, got {self.ridge}")
        object.__setattr__(self, "features", a)
        object.__setattr__(self, "labels", b)

    @classmethod
    def lasso(cls, features, labels, gamma):
        return cls(features=features, labels=labels, gamma=gamma, ridge=0.0)

    @classmethod
    def coupled(cls, features, labels, gamma):
        """Single-parameter form: gamma ||x||_1 plus (1 - gamma)/2 ||x||^2."""
        if not 0.0 <= gamma <= 1.0:
            raise ValidationError(f"coupled form needs gamma in [0, 1], got {gamma}")
        return cls(features=features, labels=labels, gamma=gamma, ridge=1.0 - gamma)


@dataclass(frozen=True)
class LogisticProblem:
    """min sum_i log(1 + exp((Ax)_i)) - b_i (Ax)_i + gamma ||x||_1, b in {0,1}."""

    features: np.ndarray
    labels: np.ndarray
    gamma: float

    def __post_init__(self):
        a = as_dense_matrix(self.features, "features")
        b = as_vector(self.labels, "labels", size=a.shape[0])
        if not np.isin(b, (0.0, 1.0)).all():
            raise ValidationError("logistic labels must be 0 or 1")
        if self.gamma < 0:
            raise ValidationError(f"gamma must be nonnegative, got {self.gamma}")
        object.__setattr__(self, "features", a)
        object.__setattr__(self, "labels", b)


@dataclass(frozen=True)
class SvmProblem:
    """Dual soft-margin kernel SVM: min 0.5 x^T Q x - 1^T x over the box
    [0, C]^n intersected with the hyperplane b^T x = 0, Q = diag(b) K diag(b)."""

    kernel: np.ndarray
    labels: np.ndarray
    c: float

    def __post_init__(self):
        k = as_dense_matrix(self.kernel, "kernel")
        b = as_vector(self.labels, "labels", size=k.shape[0])
        # svm_operator re-validates shape/symmetry/labels; probe psd here
        svm_operator(k, b)
        if self.c <= 0:
            raise ValidationError(f"c must be positive, got {self.c}")
        scale = max(1.0, float(np.linalg.norm(k, "fro")))
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = rng.standard_normal(k.shape[0])
            quad = float(v @ (k @ v))
            if quad < -1e-8 * scale * float(v @ v):
                raise ValidationError("kernel matrix failed the psd probe check")
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "labels", b)


def elastic_net_spec(problem):
    """ProblemSpec for the elastic net.

    Constant curvature A^T A + ridge I; the linear-system right-hand side
    collapses to rho (z - u) + A^T b.
    """
    a = problem.features
    b = problem.labels
    gamma = problem.gamma
    ridge = problem.ridge
    d = a.shape[1]
    atb = a.T @ b
    hg = np.full(d, ridge) if ridge > 0 else None

    def build_operator(_x):
        return gram_operator(a, hg_diag=hg)

    def build_rhs(_x, z, u, rho):
        return rho * (z - u) + atb

    def z_step(w, rho):
        return soft_threshold(w, gamma / rho)

    def objective(x):
        resid = a @ x - b
        return (
            0.5 * float(resid @ resid)
            + 0.5 * ridge * float(x @ x)
            + gamma * float(np.abs(x).sum())
        )

    kkt = None
    if ridge == 0.0:
        def kkt(x):
            return lasso_kkt(x, a, b, gamma)

    return ProblemSpec(
        dim=d,
        build_operator=build_operator,
        build_rhs=build_rhs,
        z_step=z_step,
        objective=objective,
        kkt_metric=kkt,
        hessian_refresh_interval=0,
        name="elastic_net",
    )


def _sigmoid(t):
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    et = np.exp(t[~pos])
    out[~pos] = et / (1.0 + et)
    return out


def logistic_weights(margins, labels):
    """Curvature weights and working responses at the margins t = Ax.

    w_i = 1 / (2 + exp(-t_i) + exp(t_i)) evaluated in the overflow-safe
    form exp(-|t|) / (1 + exp(-|t|))^2 and floored at 1e-12;
    q_i = t_i + (b_i - sigmoid(t_i)) / w_i.
    """
    t = np.asarray(margins, dtype=np.float64)
    b = np.asarray(labels, dtype=np.float64)
    if t.shape != b.shape:
        raise ValidationError("margins and labels must have the same shape")
    e = np.exp(-np.abs(t))
    w = e / (1.0 + e) ** 2
    w = np.maximum(w, LOGISTIC_WEIGHT_FLOOR)
    q = t + (b - _sigmoid(t)) / w
    return w, q


def logistic_spec(problem):
    """ProblemSpec for l1-regularized logistic regression.

    The curvature operator A^T diag(w) A depends on the current iterate,
    so the returned spec asks for a sketch refresh every iteration.
    """
    a = problem.features
    b = problem.labels
    gamma = problem.gamma
    d = a.shape[1]

    def build_operator(x):
        w, _ = logistic_weights(a @ x, b)
        return gram_operator(a, weights=w)

    def build_rhs(x, z, u, rho):
        w, q = logistic_weights(a @ x, b)
        return rho * (z - u) + a.T @ (w * q)

    def z_step(w, rho):
        return soft_threshold(w, gamma / rho)

    def objective(x):
        t = a @ x
        return float(np.logaddexp(0.0, t).sum() - b @ t) + gamma * float(
            np.abs(x).sum()
        )

    return ProblemSpec(
        dim=d,
        build_operator=build_operator,
        build_rhs=build_rhs,
        z_step=z_step,
        objective=objective,
        hessian_refresh_interval=1,
        name="logistic",
    )


def svm_spec(problem):
    """ProblemSpec for the dual kernel SVM.

    Constant curvature diag(b) K diag(b); the right-hand side collapses to
    rho (z - u) + 1 and the z-step projects onto the feasible set.
    """
    k = problem.kernel
    b = problem.labels
    n = k.shape[0]
    constraint = BoxHyperplaneSet(labels=b, c=problem.c)
    ones = np.ones(n)

    def build_operator(_x):
        return svm_operator(k, b)

    def build_rhs(_x, z, u, rho):
        return rho * (z - u) + ones

    def z_step(w, _rho):
        return project_box_hyperplane(w, constraint)

    def objective(x):
        bx = b * x
        return 0.5 * float(bx @ (k @ bx)) - float(x.sum())

    return ProblemSpec(
        dim=n,
        build_operator=build_operator,
        build_rhs=build_rhs,
        z_step=z_step,
        objective=objective,
        hessian_refresh_interval=0,
        name="svm",
    )


def lasso_kkt(x, a, b, gamma):
    """Relative optimality gap ||x - S(x - A^T(Ax - b), gamma)|| /
    (1 + ||x|| + ||Ax - b||), zero exactly at lasso solutions."""
    x = np.asarray(x, dtype=np.float64)
    resid = a @ x - b
    moved = soft_threshold(x - a.T @ resid, gamma)
    return float(
        np.linalg.norm(x - moved)
        / (1.0 + np.linalg.norm(x) + np.linalg.norm(resid))
    )


@dataclass(frozen=True)
class SvmSupportInfo:
    """Primal-side reporting for a dual SVM solution: signed coefficients
    alpha_i b_i, the support-vector index set, and an intercept recovered
    from the margin conditions of the free support vectors."""

    dual_coef: np.ndarray
    support: np.ndarray
    bias: float


def svm_support_expansion(alpha, kernel, labels, c, tol=None):
    """Support vectors and intercept from a dual solution.

    Free support vectors (0 < alpha_i < C strictly, within tolerance) pin
    the intercept via b_i - (K dual_coef)_i; their mean is returned. Falls
    back to averaging over all support vectors, then to 0 when the
    solution is entirely zero.
    """
    alpha = as_vector(alpha, "alpha", size=np.asarray(kernel).shape[0])
    k = as_dense_matrix(kernel, "kernel")
    b = as_vector(labels, "labels", size=alpha.size)
    if tol is None:
        tol = 1e-8 * c
    dual_coef = alpha * b
    support = np.flatnonzero(alpha > tol)
    margins = k @ dual_coef
    free = np.flatnonzero((alpha > tol) & (alpha < c - tol))
    if free.size:
        bias = float(np.mean(b[free] - margins[free]))
    elif support.size:
        bias = float(np.mean(b[support] - margins[support]))
    else:
        bias = 0.0
    return SvmSupportInfo(dual_coef=dual_coef, support=support, bias=bias)
