"""Tangent-space projection of clustered SPD points into Euclidean vectors."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import BadLength, ShapeError
from .manifold import log_map

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class TangentFeature:
    cluster: int
    vector: np.ndarray
    label: Optional[int] = None


def _triu(n):
    rows, cols = np.triu_indices(n)
    weights = np.where(rows == cols, 1.0, SQRT2)
    return rows, cols, weights


def vectorize_sym(T):
    """Upper triangle of a symmetric matrix, row-major, off-diagonals scaled
    by sqrt(2) so that the Euclidean norm equals the Frobenius norm.

    Works on stacks: ``(..., n, n) -> (..., n(n+1)/2)``.
    """
    T = np.asarray(T, dtype=np.float64)
    if T.ndim < 2 or T.shape[-1] != T.shape[-2]:
        raise ShapeError(f"expected square matrices, got {T.shape}")
    rows, cols, weights = _triu(T.shape[-1])
    return T[..., rows, cols] * weights


def unvectorize_sym(v, n):
    """Inverse of :func:`vectorize_sym`."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[-1] != n * (n + 1) // 2:
        raise BadLength(f"vector length {v.shape[-1]} does not match n={n}")
    rows, cols, weights = _triu(n)
    T = np.zeros(v.shape[:-1] + (n, n))
    vals = v / weights
    T[..., rows, cols] = vals
    T[..., cols, rows] = vals
    return T


def project(points, centroid):
    """Vectorized log-map of each point at ``centroid``; shape (m, n(n+1)/2)."""
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 2:
        points = points[None]
    return vectorize_sym(log_map(centroid, points).value)


def project_cluster(points, centroid, cluster=0, labels=None):
    """Tangent features for the members of one cluster."""
    vectors = project(points, centroid)
    if labels is None:
        labels = [None] * len(vectors)
    return [
        TangentFeature(cluster, vec, None if lab is None else int(lab))
        for vec, lab in zip(vectors, labels)
    ]
