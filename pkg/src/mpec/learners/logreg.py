"""Multinomial logistic regression with an L1 penalty.

Minimizes ``mean cross-entropy + l1 * sum|W|`` (intercepts unpenalized) with
accelerated proximal gradient (FISTA) and adaptive restart. Iteration stops
once the gradient mapping falls below ``tol``.
"""

import numpy as np


def softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def _grad(W, Xb, Y):
    P = softmax(Xb @ W)
    return Xb.T @ (P - Y) / Xb.shape[0]


def _prox(W, thresh):
    out = W.copy()
    out[:-1] = np.sign(W[:-1]) * np.maximum(np.abs(W[:-1]) - thresh, 0.0)
    return out


def fit(X, y, n_classes, params, seed):
    m, d = X.shape
    Xb = np.hstack([X, np.ones((m, 1))])
    Y = np.zeros((m, n_classes))
    Y[np.arange(m), y] = 1.0
    # softmax cross-entropy curvature is bounded by 1/2
    lip = 0.5 * np.linalg.norm(Xb, 2) ** 2 / m
    step = 1.0 / max(lip, 1e-12)
    thresh = step * params.l1_strength

    W = np.zeros((d + 1, n_classes))
    Z = W.copy()
    t = 1.0
    iters = 0
    for iters in range(1, params.max_iter + 1):
        W_new = _prox(Z - step * _grad(Z, Xb, Y), thresh)
        mapping = np.linalg.norm(W_new - Z) / step
        if np.sum((Z - W_new) * (W_new - W)) > 0:
            # momentum points uphill: restart
            t = 1.0
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        Z = W_new + ((t - 1.0) / t_new) * (W_new - W)
        W, t = W_new, t_new
        if mapping <= params.tol:
            break
    return {"coef": W[:-1].copy(), "intercept": W[-1].copy(), "iterations": iters}


def scores(state, X):
    return softmax(X @ state["coef"] + state["intercept"])
