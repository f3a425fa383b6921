"""Symmetric eigendecomposition and spectral matrix functions.

Every function accepts a single ``(n, n)`` matrix or a stack of shape
``(..., n, n)`` and works in float64.
"""

from typing import NamedTuple

import numpy as np

from .errors import NotPositiveDefinite, NumericalFailure, ShapeError

PD_TOLERANCE = 1e-10
SPD_FLOOR = 1e-8


class EigenPair(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _square(S):
    S = np.asarray(S, dtype=np.float64)
    if S.ndim < 2 or S.shape[-1] != S.shape[-2]:
        raise ShapeError(f"expected square matrices, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NumericalFailure("matrix has non-finite entries")
    return S


def symmetrize(S):
    """Return ``(S + S^T) / 2``; the result is exactly symmetric."""
    S = _square(S)
    return 0.5 * (S + np.swapaxes(S, -1, -2))


def sym_eig(S):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    Parameters
    ----------
    S : ndarray, shape (..., n, n)
        Symmetric matrices. Only the symmetric part is used.

    Returns
    -------
    EigenPair
        ``eigenvalues`` of shape (..., n) sorted in descending order and
        orthonormal ``eigenvectors`` of shape (..., n, n) stored as columns,
        so that ``S = V diag(w) V^T``.
    """
    S = symmetrize(S)
    try:
        w, V = np.linalg.eigh(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"symmetric eigensolver did not converge: {exc}") from exc
    return EigenPair(w[..., ::-1].copy(), V[..., ::-1].copy())


def _reassemble(w, V):
    return symmetrize((V * w[..., None, :]) @ np.swapaxes(V, -1, -2))


_SPECTRAL = {
    "log": np.log,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "inv_sqrt": lambda w: 1.0 / np.sqrt(w),
}


def apply_spectral(S, func, pd_tol=PD_TOLERANCE):
    """Apply a scalar function to the eigenvalues of a symmetric matrix.

    Parameters
    ----------
    S : ndarray, shape (..., n, n)
        Symmetric input. Must be SPD for every function but ``"exp"``.
    func : {"log", "exp", "sqrt", "inv_sqrt"}
        Scalar function applied as ``V f(w) V^T``.
    pd_tol : float
        Smallest eigenvalue accepted as positive.

    Returns
    -------
    ndarray, shape (..., n, n)
    """
    try:
        f = _SPECTRAL[func]
    except KeyError:
        raise ValueError(f"unknown spectral function {func!r}") from None
    w, V = sym_eig(S)
    if func != "exp" and np.any(w[..., -1] <= pd_tol):
        raise NotPositiveDefinite(
            f"{func} needs an SPD matrix; smallest eigenvalue {np.min(w[..., -1]):.3e}"
        )
    return _reassemble(f(w), V)


def is_spd(S, tol=PD_TOLERANCE):
    """True iff the smallest eigenvalue of ``S`` exceeds ``tol``."""
    w = np.linalg.eigvalsh(symmetrize(S))
    return bool(np.all(w[..., 0] > tol))


def nearest_spd(S, floor=SPD_FLOOR):
    """Clip the eigenvalues of ``S`` from below at ``floor``.

    Matrices whose spectrum already sits at or above the floor are returned
    unchanged (up to symmetrization).
    """
    S = symmetrize(S)
    w, V = sym_eig(S)
    if np.all(w[..., -1] >= floor):
        return S
    clipped = _reassemble(np.maximum(w, floor), V)
    if S.ndim == 2:
        return clipped
    keep = w[..., -1] >= floor
    clipped[keep] = S[keep]
    return clipped


def frobenius_inner(A, B):
    """Frobenius inner product ``sum_ij A_ij B_ij`` over the last two axes."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.shape[-2:] != B.shape[-2:]:
        raise ShapeError(f"dimension mismatch {A.shape[-2:]} vs {B.shape[-2:]}")
    return np.einsum("...ij,...ij->...", A, B)
