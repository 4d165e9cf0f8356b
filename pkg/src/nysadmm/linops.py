"""Dense matrices and the symmetric PSD operators the solvers consume.

Feature matrices are held as float64 Fortran-ordered arrays and every
operator owns a private copy of the data it closes over, so callers may
mutate their inputs freely after construction.
"""

import numpy as np

from .errors import DimensionMismatchError, ValidationError

__all__ = [
    "SymmetricPsdOperator",
    "as_dense_matrix",
    "as_vector",
    "gram_operator",
    "kernel_matrix",
    "svm_operator",
    "random_features",
]


def as_dense_matrix(values, name="matrix"):
    """Copy ``values`` into a float64, column-major, finite 2-D array."""
    a = np.array(values, dtype=np.float64, order="F", copy=True)
    if a.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got ndim={a.ndim}")
    if not np.isfinite(a).all():
        raise ValidationError(f"{name} contains non-finite entries")
    return a


def as_vector(values, name, size=None):
    """Copy ``values`` into a float64 1-D array, checking length when given."""
    v = np.array(values, dtype=np.float64, copy=True).ravel()
    if size is not None and v.size != size:
        raise DimensionMismatchError(name, size, v.size)
    if not np.isfinite(v).all():
        raise ValidationError(f"{name} contains non-finite entries")
    return v


class SymmetricPsdOperator:
    """A symmetric positive semidefinite operator exposed as a matvec.

    ``dim`` is the (square) dimension; ``matvec`` maps a length-``dim``
    vector to a length-``dim`` vector. Symmetry and positive
    semidefiniteness are contracts on the supplied closure, not checked
    per call.
    """

    def __init__(self, dim, matvec):
        dim = int(dim)
        if dim < 1:
            raise ValidationError(f"operator dim must be >= 1, got {dim}")
        self.dim = dim
        self._matvec = matvec

    def matvec(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or v.size != self.dim:
            raise DimensionMismatchError("v", self.dim, v.size)
        return np.asarray(self._matvec(v), dtype=np.float64)

    def __call__(self, v):
        return self.matvec(v)


def gram_operator(features, weights=None, hg_diag=None):
    """Operator for ``v -> A.T @ (w * (A @ v)) + hg * v``.

    Args:
        features: n-by-d matrix ``A``.
        weights: optional nonnegative per-row weights ``w`` (default ones).
        hg_diag: optional nonnegative diagonal ``hg`` added in feature
            space (default zeros).

    Returns:
        SymmetricPsdOperator of dimension d over private copies of the data.
    """
    a = as_dense_matrix(features, "features")
    n, d = a.shape
    if weights is None:
        w = np.ones(n)
    else:
        w = as_vector(weights, "weights", n)
        if (w < 0).any():
            raise ValidationError("weights must be nonnegative")
    if hg_diag is None:
        hg = np.zeros(d)
    else:
        hg = as_vector(hg_diag, "hg_diag", d)
        if (hg < 0).any():
            raise ValidationError("hg_diag must be nonnegative")

    def matvec(v):
        return a.T @ (w * (a @ v)) + hg * v

    return SymmetricPsdOperator(d, matvec)


def kernel_matrix(features, bandwidth):
    """Gaussian kernel ``K[i, j] = exp(-|a_i - a_j|^2 / (2 bandwidth^2))``."""
    a = as_dense_matrix(features, "features")
    if bandwidth <= 0:
        raise ValidationError(f"bandwidth must be positive, got {bandwidth}")
    sq = np.sum(a * a, axis=1)
    dist2 = sq[:, None] + sq[None, :] - 2.0 * (a @ a.T)
    np.maximum(dist2, 0.0, out=dist2)  # roundoff can push it below zero
    k = np.exp(-dist2 / (2.0 * bandwidth**2))
    k = 0.5 * (k + k.T)
    np.fill_diagonal(k, 1.0)
    return np.asfortranarray(k)


def svm_operator(kernel, labels):
    """Operator for ``v -> diag(b) @ K @ (diag(b) @ v)`` with labels b in {-1, +1}.

    The kernel must be square and symmetric; it is symmetrized exactly on
    ingestion so the resulting matvec is symmetric to roundoff.
    """
    k = as_dense_matrix(kernel, "kernel")
    n = k.shape[0]
    if k.shape[1] != n:
        raise DimensionMismatchError("kernel columns", n, k.shape[1])
    scale = max(1.0, float(np.abs(k).max()))
    if np.abs(k - k.T).max() > 1e-8 * scale:
        raise ValidationError("kernel must be symmetric")
    k = np.asfortranarray(0.5 * (k + k.T))
    b = as_vector(labels, "labels", n)
    if not np.all(np.abs(b) == 1.0):
        raise ValidationError("labels must be -1 or +1")

    def matvec(v):
        return b * (k @ (b * v))

    return SymmetricPsdOperator(n, matvec)


def random_features(features, target_dim, bandwidth, seed):
    """Random cosine features approximating the Gaussian kernel.

    Draws frequencies ``omega ~ N(0, bandwidth^-2)`` and phases
    ``beta ~ U[0, 2 pi)`` from a generator seeded with ``seed`` (frequencies
    first, then phases), and returns the n-by-target_dim map
    ``sqrt(2 / target_dim) * cos(A @ omega + beta)``. The expected Gram
    matrix of the result equals kernel_matrix(features, bandwidth).
    """
    a = as_dense_matrix(features, "features")
    if target_dim < 1:
        raise ValidationError(f"target_dim must be >= 1, got {target_dim}")
    if bandwidth <= 0:
        raise ValidationError(f"bandwidth must be positive, got {bandwidth}")
    rng = np.random.default_rng(seed)
    omega = rng.standard_normal((a.shape[1], target_dim)) / bandwidth
    beta = rng.uniform(0.0, 2.0 * np.pi, target_dim)
    phi = np.sqrt(2.0 / target_dim) * np.cos(a @ omega + beta)
    return np.asfortranarray(phi)
