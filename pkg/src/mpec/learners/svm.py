"""One-vs-rest soft-margin RBF SVM trained by dual coordinate ascent.

The bias is folded into the kernel (``k(x, x') + 1``), which turns the dual
into a box-constrained problem without the equality constraint, so each
coordinate update is a clipped Newton step.
"""

import warnings

import numpy as np

from ..errors import ConvergenceWarning
from ._kernels import svm_dual_coordinate_ascent


def default_sigma(X):
    var = X.var()
    if var <= 0:
        return 1.0
    return float(np.sqrt(X.shape[1] * var / 2.0))


def rbf_kernel(A, B, sigma):
    sq = np.sum(A**2, axis=1)[:, None] + np.sum(B**2, axis=1)[None, :] - 2.0 * A @ B.T
    return np.exp(-np.maximum(sq, 0.0) / (2.0 * sigma**2))


def fit(X, y, n_classes, params, seed):
    sigma = params.kernel_sigma if params.kernel_sigma is not None else default_sigma(X)
    Q = rbf_kernel(X, X, sigma) + 1.0
    Y = np.where(y[:, None] == np.arange(n_classes)[None, :], 1.0, -1.0)
    alpha, passes = svm_dual_coordinate_ascent(Q, Y, float(params.C), float(params.tol), int(params.max_passes), int(seed) % 2**32)
    if passes >= params.max_passes:
        warnings.warn(f"SVM stopped at the {params.max_passes}-pass cap", ConvergenceWarning, stacklevel=3)
    support = np.any(alpha > 0, axis=1)
    return {
        "sigma": float(sigma),
        "support": X[support].copy(),
        "coef": (alpha * Y)[support].copy(),
    }


def scores(state, X):
    if state["support"].shape[0] == 0:
        return np.zeros((X.shape[0], state["coef"].shape[1]))
    K = rbf_kernel(X, state["support"], state["sigma"]) + 1.0
    return K @ state["coef"]
