"""Closed-form z-subproblem maps: soft thresholding and the SVM dual projection."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, ValidationError

__all__ = ["BoxHyperplaneSet", "soft_threshold", "project_box_hyperplane"]


@dataclass(frozen=True)
class BoxHyperplaneSet:
    """The set {z : 0 <= z <= c, labels @ z = 0} with labels in {-1, +1}."""

    labels: np.ndarray
    c: float

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.float64).ravel()
        if not np.all(np.abs(labels) == 1.0):
            raise ValidationError("labels must be -1 or +1")
        if self.c <= 0:
            raise ValidationError(f"box bound must be positive, got {self.c}")
        object.__setattr__(self, "labels", labels.copy())
        object.__setattr__(self, "c", float(self.c))


def soft_threshold(v, tau):
    """sign(v) * max(|v| - tau, 0), the proximal map of tau * l1."""
    if tau < 0:
        raise ValidationError(f"threshold must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def project_box_hyperplane(v, constraint):
    """Euclidean projection onto a BoxHyperplaneSet.

    The projection is z(mu) = clip(v - mu * labels, 0, c) where mu solves
    labels @ z(mu) = 0. That scalar function is nonincreasing and piecewise
    linear, so mu is found exactly: sort the 2n breakpoints, locate the
    first with a nonpositive value, and interpolate linearly on the active
    segment (taking the leftmost root; the projection itself is unique).
    The output is clamped to the box exactly.
    """
    b = constraint.labels
    c = constraint.c
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.size != b.size:
        raise DimensionMismatchError("v", b.size, v.size)

    points = np.sort(np.concatenate([b * v, b * (v - c)]))
    g = np.clip(v[None, :] - points[:, None] * b[None, :], 0.0, c) @ b
    j = int(np.argmax(g <= 0.0))  # first nonpositive; one always exists
    if j == 0:
        mu = points[0]
    else:
        g_hi, g_lo = g[j - 1], g[j]
        mu = points[j - 1] + g_hi * (points[j] - points[j - 1]) / (g_hi - g_lo)
    return np.clip(v - mu * b, 0.0, c)
