"""One-vs-rest ridge classifier on +-1 targets with an unpenalized intercept."""

import numpy as np

from ..errors import NumericalFailure


def conjugate_gradient(A, B, tol, max_iter=None):
    """Solve ``A X = B`` column by column for SPD ``A``."""
    X = np.zeros_like(B)
    max_iter = max_iter or 10 * A.shape[0]
    for c in range(B.shape[1]):
        b = B[:, c]
        x = np.zeros_like(b)
        r = b.copy()
        p = r.copy()
        rr = r @ r
        stop = tol * max(np.linalg.norm(b), 1e-300)
        for _ in range(max_iter):
            if np.sqrt(rr) <= stop:
                break
            Ap = A @ p
            step = rr / (p @ Ap)
            x += step * p
            r -= step * Ap
            rr_new = r @ r
            p = r + (rr_new / rr) * p
            rr = rr_new
        else:
            raise NumericalFailure("ridge conjugate gradient did not converge")
        X[:, c] = x
    return X


def fit(X, y, n_classes, params, seed):
    x_mean = X.mean(axis=0)
    Y = np.where(y[:, None] == np.arange(n_classes)[None, :], 1.0, -1.0)
    y_mean = Y.mean(axis=0)
    Xc = X - x_mean
    A = Xc.T @ Xc + params.alpha * np.eye(X.shape[1])
    B = Xc.T @ (Y - y_mean)
    try:
        W = np.linalg.solve(A, B)
    except np.linalg.LinAlgError:
        W = conjugate_gradient(A, B, params.tol)
    return {"coef": W, "intercept": y_mean - x_mean @ W}


def scores(state, X):
    return X @ state["coef"] + state["intercept"]
