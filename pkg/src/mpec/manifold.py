"""Affine-invariant Riemannian geometry on the SPD cone.

Distances, logarithm/exponential maps and the Frechet mean follow the
affine-invariant metric ``g_P(U, V) = tr(P^-1 U P^-1 V)``. Functions taking
``P`` accept a stack of matrices ``(m, n, n)`` against a single base point.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceWarning, EmptyInput, ShapeError
from .linalg import apply_spectral, frobenius_inner, nearest_spd, sym_eig, symmetrize

FRECHET_TOL = 1e-9
FRECHET_MAX_ITER = 50


@dataclass(frozen=True)
class TangentVector:
    """Symmetric matrix ``value`` attached to the SPD point ``base``."""

    base: np.ndarray
    value: np.ndarray


def _check_dims(A, B):
    if A.shape[-2:] != B.shape[-2:]:
        raise ShapeError(f"dimension mismatch {A.shape[-2:]} vs {B.shape[-2:]}")


def _whitened_log(base, P):
    """Eigen-decomposed ``log(base^-1/2 P base^-1/2)`` plus the base roots."""
    isqrt = apply_spectral(base, "inv_sqrt")
    M = isqrt @ P @ isqrt
    w, V = sym_eig(M)
    if np.any(w[..., -1] <= 0):
        # P is not SPD; apply_spectral raises the proper error
        apply_spectral(P, "log")
    return np.log(w), V, isqrt


def _one_sided_distance(A, B):
    logw, _, _ = _whitened_log(A, B)
    return np.sqrt(np.sum(logw**2, axis=-1))


def airm_distance(A, B):
    """Geodesic distance ``||log(A^-1/2 B A^-1/2)||_F``.

    Evaluated from both ends and averaged so that swapping the arguments
    gives a bit-identical result.
    """
    A = symmetrize(A)
    B = symmetrize(B)
    _check_dims(A, B)
    return 0.5 * (_one_sided_distance(A, B) + _one_sided_distance(B, A))


def log_map(base, P):
    """Riemannian logarithm of ``P`` at ``base``.

    ``value = base^1/2 log(base^-1/2 P base^-1/2) base^1/2``.
    """
    base = symmetrize(base)
    P = symmetrize(P)
    _check_dims(base, P)
    logw, V, _ = _whitened_log(base, P)
    root = apply_spectral(base, "sqrt")
    inner = (V * logw[..., None, :]) @ np.swapaxes(V, -1, -2)
    return TangentVector(base, symmetrize(root @ inner @ root))


def exp_map(base, tangent):
    """Riemannian exponential: inverse of :func:`log_map` at ``base``."""
    base = symmetrize(base)
    if isinstance(tangent, TangentVector):
        if tangent.base.shape != base.shape or not np.array_equal(tangent.base, base):
            raise ValueError("tangent vector is attached to a different base point")
        value = tangent.value
    else:
        value = tangent
    value = symmetrize(value)
    _check_dims(base, value)
    root = apply_spectral(base, "sqrt")
    isqrt = apply_spectral(base, "inv_sqrt")
    return symmetrize(root @ apply_spectral(isqrt @ value @ isqrt, "exp") @ root)


def geodesic_midpoint(A, B):
    """``A^1/2 (A^-1/2 B A^-1/2)^1/2 A^1/2``."""
    root = apply_spectral(A, "sqrt")
    isqrt = apply_spectral(A, "inv_sqrt")
    return symmetrize(root @ apply_spectral(isqrt @ B @ isqrt, "sqrt") @ root)


def frechet_mean(points, tol=FRECHET_TOL, max_iter=FRECHET_MAX_ITER):
    """Karcher mean by fixed-point iteration on the log/exp maps.

    Starts from the arithmetic mean and iterates
    ``c <- exp_c(mean_i log_c(x_i))`` until the Frobenius norm of the mean
    tangent falls below ``tol``. Emits :class:`ConvergenceWarning` when
    ``max_iter`` is exhausted first.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 2:
        points = points[None]
    if points.shape[0] == 0:
        raise EmptyInput("frechet_mean of an empty set")
    points = symmetrize(points)
    if points.shape[0] == 1:
        return points[0].copy()

    mean = nearest_spd(points.mean(axis=0))
    for _ in range(max_iter):
        step = log_map(mean, points).value.mean(axis=0)
        if np.linalg.norm(step) < tol:
            return mean
        mean = exp_map(mean, step)
    step = log_map(mean, points).value.mean(axis=0)
    if np.linalg.norm(step) >= tol:
        warnings.warn(
            f"Frechet mean stopped after {max_iter} iterations "
            f"(tangent norm {np.linalg.norm(step):.2e})",
            ConvergenceWarning,
            stacklevel=2,
        )
    return mean


def _angle(U, V, eps=1e-13):
    # half-angle form 2*atan2(|u - v|, |u + v|) stays accurate near 0
    nu = np.sqrt(frobenius_inner(U, U))
    nv = np.sqrt(frobenius_inner(V, V))
    ok = (nu > eps) & (nv > eps)
    u = U / np.where(ok, nu, 1.0)[..., None, None]
    v = V / np.where(ok, nv, 1.0)[..., None, None]
    v = v * np.where(frobenius_inner(u, v) < 0, -1.0, 1.0)[..., None, None]
    theta = 2.0 * np.arctan2(np.linalg.norm(u - v, axis=(-2, -1)), np.linalg.norm(u + v, axis=(-2, -1)))
    return np.where(ok, theta, 0.0)


def chord_tangent_angle(P, C):
    """Angle between the chord ``P - C`` and the log-map direction at ``C``.

    Returns a value in ``[0, pi/2]``; zero when ``P == C`` and for every
    1x1 pair.
    """
    _, theta = distance_and_angle(P, C)
    return theta


def distance_and_angle(P, C):
    """Geodesic distance ``d(C, P)`` and chord-tangent angle, sharing one
    eigendecomposition. Used in the inner loop of the clustering."""
    P = symmetrize(P)
    C = symmetrize(C)
    _check_dims(P, C)
    logw, V, _ = _whitened_log(C, P)
    dist = np.sqrt(np.sum(logw**2, axis=-1))
    root = apply_spectral(C, "sqrt")
    U = root @ ((V * logw[..., None, :]) @ np.swapaxes(V, -1, -2)) @ root
    theta = _angle(U, P - C)
    if P.ndim == 2:
        return float(dist), float(theta)
    return dist, theta
