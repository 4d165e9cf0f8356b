"""Preconditioner assembled from a Nystrom approximation.

For an approximation U diag(eigs) U^T of H and a regularizer rho, the
preconditioner and its inverse act as

    P      = (1 / (lam_s + rho)) U (L + rho I) U^T + (I - U U^T)
    P^{-1} = (lam_s + rho) U (L + rho I)^{-1} U^T + (I - U U^T)

with L = diag(eigs) and lam_s = eigs[-1]. Both are applied in factored
form in O(d s); neither is ever materialized.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError

__all__ = ["NystromPreconditioner", "build_preconditioner", "empirical_condition_number"]


@dataclass(frozen=True)
class NystromPreconditioner:
    """Immutable bundle (U, eigs, lam_s, rho); shareable across threads."""

    u: np.ndarray
    eigs: np.ndarray
    lam_s: float
    rho: float

    @property
    def dim(self):
        return self.u.shape[0]

    def apply_inverse(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or v.size != self.dim:
            raise DimensionMismatchError("v", self.dim, v.size)
        uv = self.u.T @ v
        scaled = ((self.lam_s + self.rho) / (self.eigs + self.rho)) * uv
        return self.u @ (scaled - uv) + v

    def apply(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or v.size != self.dim:
            raise DimensionMismatchError("v", self.dim, v.size)
        uv = self.u.T @ v
        scaled = ((self.eigs + self.rho) / (self.lam_s + self.rho)) * uv
        return self.u @ (scaled - uv) + v


def build_preconditioner(approx, rho):
    """Bundle an approximation with rho; O(ds) storage, data copied."""
    if rho <= 0:
        raise ValidationError(f"rho must be positive, got {rho}")
    u = np.asarray(approx.u, dtype=np.float64)
    eigs = np.asarray(approx.eigs, dtype=np.float64).ravel()
    if u.ndim != 2 or u.size == 0 or eigs.size == 0:
        raise ValidationError("approximation is empty")
    if u.shape[1] != eigs.size:
        raise DimensionMismatchError("eigs", u.shape[1], eigs.size)
    if eigs.min() < 0:
        raise ValidationError("approximation eigenvalues must be nonnegative")
    if eigs.size > 1 and (np.diff(eigs) > 1e-12 * max(1.0, eigs[0])).any():
        raise ValidationError("approximation eigenvalues must be nonincreasing")
    return NystromPreconditioner(
        u=u.copy(), eigs=eigs.copy(), lam_s=float(eigs[-1]), rho=float(rho)
    )


def empirical_condition_number(precond):
    """(lam_s + rho) / rho, the sketch-quality diagnostic."""
    return (precond.lam_s + precond.rho) / precond.rho
