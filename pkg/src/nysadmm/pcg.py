"""Conjugate gradients for (H + rho I) x = r with a Nystrom preconditioner."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, NumericalBreakdownError, ValidationError

__all__ = ["PcgConfig", "PcgReport", "nystrom_pcg", "theory_pcg_cap"]


@dataclass(frozen=True)
class PcgConfig:
    """Tolerance on the residual 2-norm plus iteration budgets.

    ``theory_cap`` optionally tightens the budget to min(max_iters,
    theory_cap); hitting either budget is reported, never raised.
    ``track_iterates`` stores every iterate in the report for diagnostics.
    """

    tol: float
    max_iters: int = 500
    theory_cap: int | None = None
    track_iterates: bool = False

    def __post_init__(self):
        if self.tol <= 0:
            raise ValidationError(f"tol must be positive, got {self.tol}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.theory_cap is not None and self.theory_cap < 1:
            raise ValidationError(f"theory_cap must be >= 1, got {self.theory_cap}")


@dataclass
class PcgReport:
    solution: np.ndarray
    iterations: int
    final_residual_norm: float
    converged: bool
    true_residual_norm: float
    iterates: list | None = None


def theory_pcg_cap(r_norm_bound, eps, rho):
    """Iteration budget max(1, 4 + ceil(2 ln(R / (eps rho)))).

    ``r_norm_bound`` bounds the right-hand-side norms, ``eps`` is the
    solution-error tolerance the caller converts to a residual tolerance
    via rho.
    """
    if r_norm_bound <= 0 or eps <= 0 or rho <= 0:
        raise ValidationError("theory_pcg_cap arguments must be positive")
    return max(1, 4 + math.ceil(2.0 * math.log(r_norm_bound / (eps * rho))))


def nystrom_pcg(op, rho, r, x0, precond, cfg):
    """Solve (H + rho I) x = r by preconditioned conjugate gradients.

    One H-matvec and one preconditioner inverse per iteration, warm-started
    at ``x0``. ``precond=None`` runs plain CG (identity preconditioner).
    Termination tests the recursively updated residual norm against
    ``cfg.tol``; a final true-residual recomputation guards against drift
    and withdraws convergence if the true residual exceeds 10x the
    tolerance.

    Raises:
        NumericalBreakdownError: a non-finite value appeared in an iterate;
            the error carries the iteration index.
    """
    if rho <= 0:
        raise ValidationError(f"rho must be positive, got {rho}")
    d = op.dim
    r = np.asarray(r, dtype=np.float64)
    if r.ndim != 1 or r.size != d:
        raise DimensionMismatchError("r", d, r.size)
    x = np.array(x0, dtype=np.float64).ravel()
    if x.size != d:
        raise DimensionMismatchError("x0", d, x.size)
    if precond is not None:
        if precond.dim != d:
            raise DimensionMismatchError("precond", d, precond.dim)
        if not math.isclose(precond.rho, rho, rel_tol=1e-12):
            raise ValidationError(
                f"preconditioner was built with rho={precond.rho}, solver got rho={rho}"
            )
        apply_inverse = precond.apply_inverse
    else:
        apply_inverse = lambda v: v

    def operator_rho(v):
        return op.matvec(v) + rho * v

    if x.any():
        w = r - operator_rho(x)
    else:
        w = r.copy()
    res_norm = float(np.linalg.norm(w))
    iterates = [x.copy()] if cfg.track_iterates else None
    cap = cfg.max_iters if cfg.theory_cap is None else min(cfg.max_iters, cfg.theory_cap)
    iterations = 0

    if res_norm > cfg.tol:
        y = apply_inverse(w)
        p = y.copy()
        wy = float(w @ y)
        while True:
            v = operator_rho(p)
            alpha = wy / float(p @ v)
            x += alpha * p
            w -= alpha * v
            res_norm = float(np.linalg.norm(w))
            iterations += 1
            if not math.isfinite(res_norm):
                raise NumericalBreakdownError(iterations)
            if iterates is not None:
                iterates.append(x.copy())
            if res_norm <= cfg.tol or iterations >= cap:
                break
            y = apply_inverse(w)
            wy_new = float(w @ y)
            beta = wy_new / wy
            wy = wy_new
            p = y + beta * p

    true_norm = float(np.linalg.norm(r - operator_rho(x)))
    converged = res_norm <= cfg.tol
    final_norm = res_norm
    if converged and true_norm > 10.0 * cfg.tol:
        converged = False
        final_norm = true_norm
    return PcgReport(
        solution=x,
        iterations=iterations,
        final_residual_norm=final_norm,
        converged=converged,
        true_residual_norm=true_norm,
        iterates=iterates,
    )
