"""Weak learners and the ridge meta-model behind one classifier contract.

>>> model = fit("logreg", X, y, seed=0)          # doctest: +SKIP
>>> predict(model, X_new)                        # doctest: +SKIP
"""

import numpy as np

from ..errors import ShapeError
from . import forest, logreg, mlp, ridge, svm
from .base import (
    WEAK_KINDS,
    ForestParams,
    LearnerKind,
    LearnerParams,
    LogRegParams,
    MlpParams,
    RidgeParams,
    SvmParams,
    TrainedLearner,
    gradient_checks_enabled,
    validate_xy,
)

__all__ = [
    "WEAK_KINDS",
    "ForestParams",
    "LearnerKind",
    "LearnerParams",
    "LogRegParams",
    "MlpParams",
    "RidgeParams",
    "SvmParams",
    "TrainedLearner",
    "constant_learner",
    "fit",
    "predict",
    "predict_scores",
]


def fit(kind, X, y, params=None, seed=0, class_count=None):
    """Train one learner.

    Parameters
    ----------
    kind : LearnerKind or str
    X : ndarray, shape (m, d)
    y : ndarray of int, shape (m,)
        Class ids in ``0..class_count-1``; at least two must be present.
    params : LearnerParams, optional
    seed : int
        Seeds every random choice the learner makes.
    class_count : int, optional
        Width of the score rows. Defaults to ``max(y) + 1``.
    """
    kind = LearnerKind(kind)
    params = params or LearnerParams()
    X, y, class_count = validate_xy(X, y, class_count)
    seed = int(seed)
    if kind is LearnerKind.SVM:
        state = svm.fit(X, y, class_count, params.svm, seed)
    elif kind is LearnerKind.LOGREG:
        state = logreg.fit(X, y, class_count, params.logreg, seed)
    elif kind is LearnerKind.MLP:
        state = mlp.fit(X, y, class_count, params.mlp, seed, check_gradients=gradient_checks_enabled())
    elif kind is LearnerKind.FOREST:
        state = forest.fit(X, y, class_count, params.forest, seed)
    else:
        state = ridge.fit(X, y, class_count, params.ridge, seed)
    state["n_features"] = X.shape[1]
    return TrainedLearner(kind, class_count, state, seed)


def constant_learner(kind, class_count, label, n_features):
    """Stand-in for a learner whose training data holds a single class."""
    state = {"constant": int(label), "n_features": int(n_features)}
    return TrainedLearner(LearnerKind(kind), int(class_count), state, 0)


def predict_scores(model, X):
    """Per-class score rows: decision values (svm, ridge), probabilities
    (logreg, mlp) or vote fractions (forest)."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None]
    if X.ndim != 2 or X.shape[1] != model.state["n_features"]:
        raise ShapeError(f"expected {model.state['n_features']} features, got shape {X.shape}")
    kind = model.kind
    L = model.class_count
    if "constant" in model.state:
        hot = np.zeros((X.shape[0], L))
        hot[:, model.state["constant"]] = 1.0
        if kind in (LearnerKind.SVM, LearnerKind.RIDGE):
            return 2.0 * hot - 1.0
        return hot
    if kind is LearnerKind.SVM:
        return svm.scores(model.state, X)
    if kind is LearnerKind.LOGREG:
        return logreg.scores(model.state, X)
    if kind is LearnerKind.MLP:
        return mlp.scores(model.state, X)
    if kind is LearnerKind.FOREST:
        return forest.scores(model.state, X, L)
    return ridge.scores(model.state, X)


def predict(model, X):
    """Arg-max class per row; ties resolve to the lowest class id."""
    return np.argmax(predict_scores(model, X), axis=1)
