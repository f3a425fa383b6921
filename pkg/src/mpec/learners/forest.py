"""Random forest of Gini CART trees on bootstrap samples."""

import numpy as np

from ._kernels import grow_tree


def _max_features(rule, d):
    if rule == "sqrt":
        return max(1, int(np.sqrt(d)))
    if rule == "all":
        return d
    return min(int(rule), d)


def fit(X, y, n_classes, params, seed):
    m, d = X.shape
    rng = np.random.default_rng(seed)
    k = _max_features(params.features_per_split, d)
    depth = -1 if params.max_depth is None else int(params.max_depth)
    parts = []
    offset = 0
    roots = []
    for _ in range(params.trees):
        rows = rng.integers(0, m, size=m) if params.bootstrap else np.arange(m)
        tree_seed = int(rng.integers(0, 2**31 - 1))
        feat, thr, left, right, counts = grow_tree(X, y, rows.astype(np.int64), n_classes, k, depth, tree_seed)
        internal = feat >= 0
        left = np.where(internal, left + offset, -1)
        right = np.where(internal, right + offset, -1)
        parts.append((feat, thr, left, right, np.argmax(counts, axis=1)))
        roots.append(offset)
        offset += feat.shape[0]
    feature, threshold, left, right, leaf_class = (np.concatenate(p) for p in zip(*parts))
    return {
        "feature": feature,
        "threshold": threshold,
        "left": left,
        "right": right,
        "leaf_class": leaf_class.astype(np.int64),
        "roots": np.asarray(roots, dtype=np.int64),
    }


def leaves(state, X):
    """Leaf node reached by every sample in every tree, shape (m, trees)."""
    node = np.broadcast_to(state["roots"], (X.shape[0], state["roots"].shape[0])).copy()
    rows = np.arange(X.shape[0])[:, None]
    feature = state["feature"]
    while True:
        f = feature[node]
        internal = f >= 0
        if not internal.any():
            return node
        go_left = X[rows, np.where(internal, f, 0)] <= state["threshold"][node]
        node = np.where(internal, np.where(go_left, state["left"][node], state["right"][node]), node)


def scores(state, X, n_classes):
    votes = state["leaf_class"][leaves(state, X)]
    out = np.zeros((X.shape[0], n_classes))
    for c in range(n_classes):
        out[:, c] = np.count_nonzero(votes == c, axis=1)
    return out / votes.shape[1]
