"""Randomized Nystrom approximation of symmetric PSD operators.

Builds a rank-s approximation U diag(eigs) U^T from s operator matvecs
against an orthonormalized Gaussian test matrix, with a floating-point
shift for numerical stability. The adaptive variant grows the sketch by
doubling until the approximated spectrum is flat enough relative to a
regularizer, reusing every previously computed matvec.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import SketchFactorizationError, ValidationError
from .linops import SymmetricPsdOperator

__all__ = [
    "SketchConfig",
    "AdaptiveConfig",
    "NystromApproximation",
    "rand_nystrom_approx",
    "adaptive_nystrom_approx",
    "effective_dimension",
    "theoretical_sketch_size",
]


@dataclass(frozen=True)
class SketchConfig:
    """Fixed-size sketch: rank ``s`` and RNG ``seed``."""

    s: int
    seed: int = 0

    def __post_init__(self):
        if self.s < 1:
            raise ValidationError(f"sketch size must be >= 1, got {self.s}")


@dataclass(frozen=True)
class AdaptiveConfig:
    """Doubling sketch schedule driven by an empirical condition number.

    Growth stops once (eigs[-1] + rho) / rho <= tol or the rank reaches
    ``max_rank``.
    """

    initial_rank: int
    max_rank: int
    rho: float
    tol: float
    seed: int = 0

    def __post_init__(self):
        if self.initial_rank < 1:
            raise ValidationError(f"initial_rank must be >= 1, got {self.initial_rank}")
        if self.max_rank < self.initial_rank:
            raise ValidationError(
                f"max_rank ({self.max_rank}) must be >= initial_rank ({self.initial_rank})"
            )
        if self.rho <= 0:
            raise ValidationError(f"rho must be positive, got {self.rho}")
        if self.tol <= 1.0:
            raise ValidationError(f"tol must exceed 1, got {self.tol}")


@dataclass
class NystromApproximation:
    """Low-rank eigendecomposition U diag(eigs) U^T of a PSD operator.

    ``u`` has orthonormal columns, ``eigs`` is nonnegative and
    nonincreasing, ``shift`` is the stabilizing shift actually used, and
    ``rank_capped`` marks an adaptive build that hit its rank budget
    before meeting its tolerance.
    """

    u: np.ndarray
    eigs: np.ndarray
    shift: float
    rank_capped: bool = False

    @property
    def rank(self):
        return self.eigs.size


def _apply_columns(op, block):
    out = np.empty_like(block)
    for j in range(block.shape[1]):
        out[:, j] = op.matvec(block[:, j])
    return out


def _spectral_norm_estimate(y, rng, iters=10):
    """Power iteration on Y^T Y; slight underestimates are fine here."""
    g = y.T @ y
    z = rng.standard_normal(g.shape[0])
    nz = np.linalg.norm(z)
    if nz == 0.0:
        return 0.0
    z /= nz
    for _ in range(iters):
        z = g @ z
        nz = np.linalg.norm(z)
        if nz == 0.0:
            return 0.0
        z /= nz
    return float(math.sqrt(max(z @ (g @ z), 0.0)))


def _factor_sketch(omega, y, nu):
    """Stabilized Cholesky-then-SVD reduction of the shifted sketch.

    Returns (u, eigs, shift_used). Retries once with a 100x larger shift
    before giving up.
    """
    s = omega.shape[1]
    for shift in (nu, 100.0 * nu):
        y_nu = y + shift * omega
        core = omega.T @ y_nu
        core = 0.5 * (core + core.T)
        try:
            chol = np.linalg.cholesky(core)
        except np.linalg.LinAlgError:
            continue
        b = scipy.linalg.solve_triangular(chol, y_nu.T, lower=True).T
        u, sing, _ = np.linalg.svd(b, full_matrices=False)
        eigs = np.maximum(sing * sing - shift, 0.0)
        return u, eigs, shift
    raise SketchFactorizationError(s)


def rand_nystrom_approx(op, cfg):
    """Rank-``cfg.s`` randomized Nystrom approximation of a PSD operator.

    Orthonormalizes a Gaussian d-by-s test matrix, applies the operator
    once per column, shifts by the floating-point spacing of an estimated
    spectral norm, and reduces via Cholesky and a thin SVD. Deterministic
    for a fixed seed; costs exactly ``cfg.s`` matvecs.
    """
    if not isinstance(op, SymmetricPsdOperator):
        raise ValidationError("op must be a SymmetricPsdOperator")
    if op.dim < cfg.s:
        raise ValidationError(
            f"sketch size {cfg.s} exceeds operator dimension {op.dim}"
        )
    rng = np.random.default_rng(cfg.seed)
    omega = rng.standard_normal((op.dim, cfg.s))
    omega, _ = scipy.linalg.qr(omega, mode="economic")
    y = _apply_columns(op, omega)
    nu = np.spacing(_spectral_norm_estimate(y, rng))
    u, eigs, shift = _factor_sketch(omega, y, nu)
    return NystromApproximation(u=u, eigs=eigs, shift=shift)


def adaptive_nystrom_approx(op, cfg):
    """Nystrom approximation with a doubling rank schedule.

    Starts at ``cfg.initial_rank`` and doubles (capped at ``cfg.max_rank``)
    until (eigs[-1] + rho) / rho <= cfg.tol. Matvecs against previous test
    vectors are reused: after appending a Gaussian block, the combined test
    matrix is re-orthonormalized by a QR factorization and the stored
    products are transformed by the inverse triangular factor, so the total
    matvec count equals the final sketch size. If the budget is exhausted
    first, the result is returned with ``rank_capped=True``.
    """
    if not isinstance(op, SymmetricPsdOperator):
        raise ValidationError("op must be a SymmetricPsdOperator")
    if cfg.max_rank > op.dim:
        raise ValidationError(
            f"max_rank {cfg.max_rank} exceeds operator dimension {op.dim}"
        )
    rng = np.random.default_rng(cfg.seed)
    d = op.dim
    block = rng.standard_normal((d, cfg.initial_rank))
    omega, _ = scipy.linalg.qr(block, mode="economic")
    y = _apply_columns(op, omega)
    while True:
        s = omega.shape[1]
        nu = math.sqrt(d) * np.spacing(_spectral_norm_estimate(y, rng))
        u, eigs, shift = _factor_sketch(omega, y, nu)
        if (eigs[-1] + cfg.rho) / cfg.rho <= cfg.tol:
            return NystromApproximation(u=u, eigs=eigs, shift=shift)
        if s >= cfg.max_rank:
            return NystromApproximation(u=u, eigs=eigs, shift=shift, rank_capped=True)
        grow = min(2 * s, cfg.max_rank) - s
        block, _ = scipy.linalg.qr(rng.standard_normal((d, grow)), mode="economic")
        omega = np.hstack([omega, block])
        y = np.hstack([y, _apply_columns(op, block)])
        # re-orthonormalize the combined test matrix; Y R^{-1} keeps Y = H Omega
        omega, r = scipy.linalg.qr(omega, mode="economic")
        y = scipy.linalg.solve_triangular(r, y.T, lower=False, trans="T").T


def effective_dimension(eigs, rho):
    """sum_i eigs[i] / (eigs[i] + rho) for a nonnegative spectrum."""
    if rho <= 0:
        raise ValidationError(f"rho must be positive, got {rho}")
    lam = np.asarray(eigs, dtype=np.float64).ravel()
    if lam.size and lam.min() < 0:
        raise ValidationError("eigenvalues must be nonnegative")
    return float(np.sum(lam / (lam + rho)))


def theoretical_sketch_size(deff, delta):
    """Sketch size sufficient for a well-conditioned preconditioned system.

    Evaluates ceil(8 (sqrt(deff) + sqrt(8 ln(16 / delta)))^2) for failure
    probability ``delta``.
    """
    if deff < 0:
        raise ValidationError(f"deff must be nonnegative, got {deff}")
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    return int(math.ceil(8.0 * (math.sqrt(deff) + math.sqrt(8.0 * math.log(16.0 / delta))) ** 2))
