"""End-to-end MPEC pipeline: features, manifold clustering, per-cluster
tangent-space experts and a ridge meta-model stacked on out-of-fold scores."""

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import learners
from .data import stratified_folds
from .errors import ClusterTooSmall, ConfigError, DegenerateLabels, EmptyInput, LengthMismatch
from .features import FeatureConfig, channel_scores, extract, select_channels
from .kmeans import ClusterConfig, ClusterModel, assign_many, kmeans_fit
from .learners import WEAK_KINDS, LearnerKind, LearnerParams, TrainedLearner
from .linalg import SPD_FLOOR
from .tangent import project

log = logging.getLogger(__name__)

SCALE_FLOOR = 1e-12


@dataclass(frozen=True)
class PipelineConfig:
    n_channels: Optional[int] = None  # None keeps every channel
    sigma: float = 0.1
    w_cov: float = 0.5
    w_rbf: float = 0.5
    pd_floor: float = SPD_FLOOR
    k: int = 3
    w1: float = 0.7
    w2: float = 0.3
    cluster_max_iter: int = 50
    cluster_n_init: int = 10
    min_cluster_size: Optional[int] = None  # None: twice the class count
    n_folds: int = 5
    learners: LearnerParams = field(default_factory=LearnerParams)

    def __post_init__(self):
        if self.n_channels is not None and self.n_channels < 1:
            raise ConfigError("n_channels must be positive or null")
        if self.n_folds < 2:
            raise ConfigError("n_folds must be at least 2")
        if self.min_cluster_size is not None and self.min_cluster_size < 1:
            raise ConfigError("min_cluster_size must be positive or null")
        # fail early on bad fusion/cluster weights
        FeatureConfig((0,), self.sigma, self.w_cov, self.w_rbf, self.pd_floor)
        ClusterConfig(max(self.k, 1), self.w1, self.w2, self.cluster_max_iter, 0, 1, self.cluster_n_init)
        if self.k < 1:
            raise ConfigError("k must be positive")


@dataclass
class ClusterExperts:
    """Standardizer and the four weak learners of one cluster."""

    mean: np.ndarray
    scale: np.ndarray
    learners: tuple

    def scores(self, X):
        Z = (X - self.mean) / self.scale
        return np.hstack([learners.predict_scores(m, Z) for m in self.learners])


@dataclass
class MpecModel:
    feature_config: FeatureConfig
    cluster_model: ClusterModel
    experts: list
    meta_model: TrainedLearner
    class_count: int
    dim: int
    seed: int
    timings: dict = field(default_factory=dict, compare=False)

    @property
    def cluster_sizes(self):
        return np.bincount(self.cluster_model.assignments, minlength=self.cluster_model.k).tolist()


@dataclass
class EvalReport:
    precision: float
    recall: float
    f1: float
    accuracy: float
    confusion: np.ndarray
    per_class: list

    def to_dict(self):
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "per_class": self.per_class,
        }


def derive_seed(seed, *keys):
    return int(np.random.SeedSequence([int(seed), *keys]).generate_state(1)[0])


def _fit_experts(X, y, class_count, params, seed):
    present = np.unique(y)
    if present.size < 2:
        return tuple(learners.constant_learner(k, class_count, present[0], X.shape[1]) for k in WEAK_KINDS)
    return tuple(
        learners.fit(kind, X, y, params, derive_seed(seed, i), class_count=class_count)
        for i, kind in enumerate(WEAK_KINDS)
    )


def _standardizer(X):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    return mean, np.where(std > SCALE_FLOOR, std, 1.0)


def mpec_fit(trials, config=None, seed=0):
    """Fit the full pipeline on labelled trials.

    Phases: channel scoring and selection, fused SPD features, manifold
    K-means, per-cluster tangent projection with four weak learners, and a
    global ridge meta-model trained on out-of-fold stacked scores (stratified
    ``n_folds`` within each cluster).
    """
    config = config or PipelineConfig()
    if not trials:
        raise EmptyInput("mpec_fit needs at least one trial")
    labels = np.array([t.label for t in trials], dtype=np.int64)
    if np.unique(labels).size < 2:
        raise DegenerateLabels("mpec_fit needs at least two classes")
    class_count = int(labels.max()) + 1
    timings = {}

    t0 = time.perf_counter()
    n_total = trials[0].channels
    n_keep = n_total if config.n_channels is None else config.n_channels
    selected = select_channels(channel_scores(trials, labels), n_keep)
    fcfg = FeatureConfig(tuple(selected), config.sigma, config.w_cov, config.w_rbf, config.pd_floor)
    F = extract(trials, fcfg)
    timings["features"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    min_size = config.min_cluster_size or 2 * class_count
    ccfg = ClusterConfig(
        config.k, config.w1, config.w2, config.cluster_max_iter, derive_seed(seed, 0), min_size, config.cluster_n_init
    )
    cm = kmeans_fit(F, ccfg)
    timings["clustering"] = time.perf_counter() - t0
    log.info("clustering: %d clusters of sizes %s in %d passes", cm.k,
             np.bincount(cm.assignments, minlength=cm.k).tolist(), cm.iterations_run)

    t0 = time.perf_counter()
    meta_X = np.zeros((len(trials), len(WEAK_KINDS) * class_count))
    experts = []
    for j in range(cm.k):
        idx = np.flatnonzero(cm.assignments == j)
        if idx.size < 2:
            raise ClusterTooSmall(f"cluster {j} holds {idx.size} trial(s)")
        Xj = project(F[idx], cm.centroids[j])
        mean, scale = _standardizer(Xj)
        Z = (Xj - mean) / scale
        y = labels[idx]
        folds = stratified_folds(y, config.n_folds, derive_seed(seed, 1, j))
        for f in np.unique(folds):
            held = folds == f
            fold_experts = ClusterExperts(
                np.zeros(Z.shape[1]),
                np.ones(Z.shape[1]),
                _fit_experts(Z[~held], y[~held], class_count, config.learners, derive_seed(seed, 2, j, int(f))),
            )
            meta_X[idx[held]] = fold_experts.scores(Z[held])
        experts.append(
            ClusterExperts(mean, scale, _fit_experts(Z, y, class_count, config.learners, derive_seed(seed, 3, j)))
        )
    timings["experts"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    meta = learners.fit(LearnerKind.RIDGE, meta_X, labels, config.learners, derive_seed(seed, 4), class_count)
    timings["meta"] = time.perf_counter() - t0
    return MpecModel(fcfg, cm, experts, meta, class_count, len(selected), int(seed), timings)


def _route(model, trials):
    F = extract(trials, model.feature_config)
    clusters, _ = assign_many(model.cluster_model, F)
    return F, clusters


def expert_scores(model, trials):
    """Stacked weak-learner score rows (width 4L) and the routed cluster ids."""
    F, clusters = _route(model, trials)
    rows = np.zeros((len(trials), len(WEAK_KINDS) * model.class_count))
    for j, expert in enumerate(model.experts):
        idx = np.flatnonzero(clusters == j)
        if idx.size:
            rows[idx] = expert.scores(project(F[idx], model.cluster_model.centroids[j]))
    return rows, clusters


def mpec_predict(model, trials):
    """Class id per trial through the routed experts and the meta-model."""
    rows, _ = expert_scores(model, trials)
    return learners.predict(model.meta_model, rows)


def weak_predictions(model, trials):
    """Predictions of each weak learner kind alone (no stacking)."""
    rows, _ = expert_scores(model, trials)
    L = model.class_count
    return {kind.value: np.argmax(rows[:, i * L:(i + 1) * L], axis=1) for i, kind in enumerate(WEAK_KINDS)}


def evaluate(predicted, truth, n_classes=None):
    """Macro precision/recall/F1 over classes present in ``truth`` plus accuracy."""
    predicted = np.asarray(predicted, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if predicted.shape != truth.shape:
        raise LengthMismatch(f"{predicted.size} predictions for {truth.size} labels")
    if truth.size == 0:
        raise EmptyInput("evaluate needs at least one prediction")
    L = n_classes or int(max(predicted.max(), truth.max())) + 1
    confusion = np.zeros((L, L), dtype=np.int64)
    np.add.at(confusion, (truth, predicted), 1)
    per_class = []
    for c in range(L):
        tp = confusion[c, c]
        support = int(confusion[c].sum())
        claimed = confusion[:, c].sum()
        precision = tp / claimed if claimed else 0.0
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class.append(
            {"class": c, "precision": float(precision), "recall": float(recall), "f1": float(f1), "support": support}
        )
    present = [row for row in per_class if row["support"] > 0]
    return EvalReport(
        precision=float(np.mean([r["precision"] for r in present])),
        recall=float(np.mean([r["recall"] for r in present])),
        f1=float(np.mean([r["f1"] for r in present])),
        accuracy=float(np.trace(confusion) / truth.size),
        confusion=confusion,
        per_class=per_class,
    )


def cross_val_accuracy(trials, config=None, seed=0, n_folds=5):
    """Mean held-out accuracy of :func:`mpec_fit` over stratified folds.

    Returns ``(mean, per-fold accuracies)``.
    """
    labels = np.array([t.label for t in trials], dtype=np.int64)
    folds = stratified_folds(labels, n_folds, derive_seed(seed, 5))
    scores = []
    for f in np.unique(folds):
        held = np.flatnonzero(folds == f)
        kept = np.flatnonzero(folds != f)
        model = mpec_fit([trials[i] for i in kept], config, derive_seed(seed, 6, int(f)))
        pred = mpec_predict(model, [trials[i] for i in held])
        scores.append(float(np.mean(pred == labels[held])))
    return float(np.mean(scores)), scores
