"""Independent reference implementations used only by the tests.

None of these touch an eigendecomposition, so they cross-check the spectral
code paths in :mod:`mpec.linalg` from a different direction.
"""

import itertools

import numpy as np


def random_spd(rng, n, cond=100.0):
    """SPD matrix with log-uniform spectrum in ``[1, cond]`` and a random basis."""
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    w = np.exp(rng.uniform(0.0, np.log(cond), size=n))
    S = (Q * w) @ Q.T
    return 0.5 * (S + S.T)


def expm_taylor(A, terms=30):
    """Scaling and squaring around a truncated Taylor series."""
    norm = np.linalg.norm(A, 1)
    s = max(0, int(np.ceil(np.log2(norm / 0.25))) if norm > 0 else 0)
    X = A / 2.0**s
    out = np.eye(A.shape[0])
    term = np.eye(A.shape[0])
    for k in range(1, terms):
        term = term @ X / k
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


def sqrtm_db(A, iters=100, tol=1e-15):
    """Denman-Beavers iteration for the principal square root."""
    Y, Z = A.copy(), np.eye(A.shape[0])
    for _ in range(iters):
        Y_next = 0.5 * (Y + np.linalg.inv(Z))
        Z = 0.5 * (Z + np.linalg.inv(Y))
        done = np.linalg.norm(Y_next - Y) <= tol * np.linalg.norm(Y_next)
        Y = Y_next
        if done:
            break
    return Y


def logm_iss(A, terms=80):
    """Inverse scaling and squaring: repeated square roots, then the series
    of ``log(I + E)``."""
    n = A.shape[0]
    X = A.copy()
    s = 0
    while np.linalg.norm(X - np.eye(n), 2) > 0.1:
        X = sqrtm_db(X)
        s += 1
    E = X - np.eye(n)
    out = np.zeros_like(E)
    power = np.eye(n)
    for k in range(1, terms):
        power = power @ E
        out = out + ((-1) ** (k + 1)) * power / k
    return out * 2.0**s


def airm_generalized(A, B):
    """AIRM distance from the (real, positive) eigenvalues of ``A^-1 B``."""
    lam = np.linalg.eigvals(np.linalg.solve(A, B)).real
    return float(np.sqrt(np.sum(np.log(lam) ** 2)))


def best_two_partition(values):
    """Exhaustive minimum of the within-cluster squared AIRM distance for
    positive scalars split into two non-empty clusters.

    For 1x1 SPD matrices the AIRM distance is ``|log a - log b|`` and the
    Frechet mean of a cluster is its geometric mean, so the cost is the
    within-cluster variance of the logs. Returns a frozenset-of-frozensets
    canonical partition and its cost.
    """
    logs = np.log(np.asarray(values, dtype=float))
    m = logs.size
    best, best_cost = None, np.inf
    for mask in itertools.product((0, 1), repeat=m - 1):
        labels = np.array((0,) + mask)
        if labels.all() or not labels.any():
            continue
        cost = sum(np.sum((logs[labels == c] - logs[labels == c].mean()) ** 2) for c in (0, 1))
        if cost < best_cost:
            best, best_cost = labels, cost
    return canonical_partition(best), best_cost


def canonical_partition(labels):
    labels = np.asarray(labels)
    return frozenset(frozenset(np.flatnonzero(labels == c).tolist()) for c in np.unique(labels))
