"""Compiled inner loops for the SVM and decision-tree learners."""

import numpy as np
from numba import njit


@njit(cache=True)
def svm_dual_coordinate_ascent(Q, Y, C, tol, max_passes, order_seed):
    """Dual coordinate ascent for several one-vs-rest hinge-loss SVMs at once.

    ``Q`` is the (bias-augmented) kernel matrix, ``Y`` an (n, L) matrix of
    +-1 targets. Returns the dual coefficients (n, L) and the number of
    passes run.
    """
    np.random.seed(order_seed)
    n, L = Y.shape
    alpha = np.zeros((n, L))
    f = np.zeros((n, L))
    passes = 0
    for p in range(max_passes):
        passes = p + 1
        order = np.random.permutation(n)
        worst = 0.0
        for t in range(n):
            i = order[t]
            qii = Q[i, i]
            for c in range(L):
                g = Y[i, c] * f[i, c] - 1.0
                a = alpha[i, c]
                if a <= 0.0:
                    pg = min(g, 0.0)
                elif a >= C:
                    pg = max(g, 0.0)
                else:
                    pg = g
                if abs(pg) > worst:
                    worst = abs(pg)
                if pg != 0.0:
                    new = min(max(a - g / qii, 0.0), C)
                    delta = (new - a) * Y[i, c]
                    if delta != 0.0:
                        alpha[i, c] = new
                        for j in range(n):
                            f[j, c] += delta * Q[j, i]
        if worst < tol:
            break
    return alpha, passes


@njit(cache=True)
def _gini_best_split(X, y, idx, feats, n_classes):
    """Best threshold over ``feats`` by weighted Gini impurity.

    Returns (feature, threshold, impurity); feature is -1 when no split
    separates the samples. Features are scanned in the given order and only
    a strictly better impurity replaces the incumbent.
    """
    m = idx.shape[0]
    best_f = -1
    best_t = 0.0
    best_imp = np.inf
    vals = np.empty(m)
    left = np.zeros(n_classes)
    total = np.zeros(n_classes)
    for s in range(m):
        total[y[idx[s]]] += 1.0
    for fi in range(feats.shape[0]):
        f = feats[fi]
        for s in range(m):
            vals[s] = X[idx[s], f]
        order = np.argsort(vals, kind="mergesort")
        left[:] = 0.0
        sum_l2 = 0.0
        sum_r2 = 0.0
        for c in range(n_classes):
            sum_r2 += total[c] * total[c]
        for s in range(m - 1):
            c = y[idx[order[s]]]
            # incremental sums of squared class counts on each side
            sum_l2 += 2.0 * left[c] + 1.0
            right_c = total[c] - left[c]
            sum_r2 += -2.0 * right_c + 1.0
            left[c] += 1.0
            v0 = vals[order[s]]
            v1 = vals[order[s + 1]]
            if v1 <= v0:
                continue
            nl = s + 1.0
            nr = m - nl
            imp = (nl - sum_l2 / nl) + (nr - sum_r2 / nr)
            if imp < best_imp - 1e-12:
                best_imp = imp
                best_f = f
                best_t = 0.5 * (v0 + v1)
                if best_t >= v1:
                    best_t = v0
    return best_f, best_t, best_imp


@njit(cache=True)
def grow_tree(X, y, sample_idx, n_classes, max_features, max_depth, seed):
    """Grow one CART classification tree on the rows ``sample_idx``.

    Returns flat arrays (feature, threshold, left, right, counts); leaves
    have feature -1. ``max_depth`` < 0 means unlimited.
    """
    np.random.seed(seed)
    d = X.shape[1]
    cap = 2 * sample_idx.shape[0] + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    counts = np.zeros((cap, n_classes))
    depth = np.zeros(cap, dtype=np.int64)
    # explicit stack of (node, start, stop) over a shared index buffer
    buf = sample_idx.copy()
    stack_node = np.zeros(cap, dtype=np.int64)
    stack_lo = np.zeros(cap, dtype=np.int64)
    stack_hi = np.zeros(cap, dtype=np.int64)
    n_nodes = 1
    stack_lo[0] = 0
    stack_hi[0] = buf.shape[0]
    top = 1
    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        idx = buf[lo:hi]
        for s in range(idx.shape[0]):
            counts[node, y[idx[s]]] += 1.0
        n_present = 0
        for c in range(n_classes):
            if counts[node, c] > 0:
                n_present += 1
        if n_present <= 1 or idx.shape[0] < 2:
            continue
        if max_depth >= 0 and depth[node] >= max_depth:
            continue
        perm = np.random.permutation(d)
        # max_features random candidates; fall back to the rest if none split
        best_f, best_t, _ = _gini_best_split(X, y, idx, np.sort(perm[:max_features]), n_classes)
        if best_f < 0 and max_features < d:
            best_f, best_t, _ = _gini_best_split(X, y, idx, np.sort(perm[max_features:]), n_classes)
        if best_f < 0:
            continue
        # partition idx in place: <= threshold to the left
        i = 0
        j = idx.shape[0] - 1
        while i <= j:
            if X[idx[i], best_f] <= best_t:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        feature[node] = best_f
        threshold[node] = best_t
        left[node] = n_nodes
        right[node] = n_nodes + 1
        depth[n_nodes] = depth[node] + 1
        depth[n_nodes + 1] = depth[node] + 1
        stack_node[top] = n_nodes + 1
        stack_lo[top] = lo + i
        stack_hi[top] = hi
        top += 1
        stack_node[top] = n_nodes
        stack_lo[top] = lo
        stack_hi[top] = lo + i
        top += 1
        n_nodes += 2
    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        counts[:n_nodes].copy(),
    )
