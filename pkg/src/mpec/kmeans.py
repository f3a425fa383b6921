"""K-means on the SPD manifold with a curvature-weighted distance.

Each (point, centroid) pair is scored by ``w1 * d_R + w2 * theta`` where
``d_R`` is the affine-invariant geodesic distance and ``theta`` the
chord-tangent angle; both are min-max normalized over all pairs of the
current pass before mixing.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import BadK, ConfigError, EmptyInput, ShapeError
from .linalg import symmetrize
from .manifold import distance_and_angle, frechet_mean

log = logging.getLogger(__name__)

CHANGE_THRESHOLD = 0.005


@dataclass(frozen=True)
class ClusterConfig:
    k: int = 3
    w1: float = 0.7
    w2: float = 0.3
    max_iter: int = 50
    seed: int = 0
    min_cluster_size: int = 1
    n_init: int = 10

    def __post_init__(self):
        if self.k < 1:
            raise BadK(f"k must be at least 1, got {self.k}")
        if not (0 <= self.w1 <= 1 and 0 <= self.w2 <= 1) or abs(self.w1 + self.w2 - 1) > 1e-12:
            raise ConfigError(f"cluster weights must be in [0, 1] and sum to 1: {self.w1}, {self.w2}")
        if self.max_iter < 1 or self.min_cluster_size < 1 or self.n_init < 1 or self.seed < 0:
            raise ConfigError("max_iter, min_cluster_size and n_init must be positive, seed non-negative")


@dataclass
class ClusterModel:
    centroids: np.ndarray
    norm_dR: tuple
    norm_theta: tuple
    config: ClusterConfig
    assignments: np.ndarray
    iterations_run: int
    inertia_history: list = field(default_factory=list)

    @property
    def k(self):
        return len(self.centroids)


def _pair_metrics(points, centroids):
    dR = np.empty((len(points), len(centroids)))
    theta = np.empty_like(dR)
    for j, c in enumerate(centroids):
        dR[:, j], theta[:, j] = distance_and_angle(points, c)
    return dR, theta


def _normalize(values, lo, hi):
    if hi > lo:
        return np.clip((values - lo) / (hi - lo), 0.0, 1.0)
    return np.zeros_like(values)


def _combined(dR, theta, cfg, ranges=None):
    if ranges is None:
        ranges = ((float(dR.min()), float(dR.max())), (float(theta.min()), float(theta.max())))
    (dlo, dhi), (tlo, thi) = ranges
    D = cfg.w1 * _normalize(dR, dlo, dhi) + cfg.w2 * _normalize(theta, tlo, thi)
    return D, ranges


def _seed_centroids(points, k, rng):
    """Greedy k-means++ seeding under the geodesic distance.

    Each step draws ``2 + floor(ln k)`` candidates with probability
    proportional to the squared distance to the nearest chosen seed and
    keeps the one that lowers the total squared distance most.
    """
    m = len(points)
    n_local = 2 + int(np.log(k))
    chosen = [int(rng.integers(m))]
    d2 = distance_and_angle(points, points[chosen[0]])[0] ** 2
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            candidates = rng.choice(m, size=n_local, p=d2 / total)
        else:
            candidates = rng.integers(m, size=n_local)
        best = None
        for c in candidates:
            trial = np.minimum(d2, distance_and_angle(points, points[c])[0] ** 2)
            if best is None or trial.sum() < best[1].sum():
                best = (int(c), trial)
        chosen.append(best[0])
        d2 = best[1]
    return points[chosen].copy()


def _assign_pass(points, centroids, cfg):
    """Assign with per-pass normalization, dissolving undersized clusters."""
    while True:
        dR, theta = _pair_metrics(points, centroids)
        D, ranges = _combined(dR, theta, cfg)
        labels = np.argmin(D, axis=1)
        sizes = np.bincount(labels, minlength=len(centroids))
        small = sizes < cfg.min_cluster_size
        if not small.any():
            return labels, dR, theta, ranges, centroids
        if small.all():
            keep = np.zeros_like(small)
            keep[np.argmax(sizes)] = True
        else:
            keep = ~small
        log.debug("dissolving clusters %s (sizes %s)", np.flatnonzero(~keep).tolist(), sizes.tolist())
        centroids = centroids[keep]


def _lloyd(points, cfg, rng):
    """One seeded run; returns (objective, ClusterModel)."""
    m = len(points)
    centroids = _seed_centroids(points, cfg.k, rng)
    prev, prev_k = None, None
    history = []
    it = 0
    while True:
        it += 1
        labels, dR, theta, ranges, centroids = _assign_pass(points, centroids, cfg)
        history.append(_inertia(dR, labels))
        log.debug("pass %d: inertia %.6g, sizes %s", it, history[-1], np.bincount(labels).tolist())
        changed = np.count_nonzero(prev != labels) if prev_k == len(centroids) else m
        if changed == 0 or it >= cfg.max_iter:
            break
        centroids = _update(points, labels, len(centroids))
        if changed < CHANGE_THRESHOLD * m:
            # refresh centroids and ranges once so the model is self-consistent
            it += 1
            labels, dR, theta, ranges, centroids = _assign_pass(points, centroids, cfg)
            history.append(_inertia(dR, labels))
            break
        prev, prev_k = labels, len(centroids)

    rows = np.arange(m)
    objective = float(np.sum((cfg.w1 * dR[rows, labels] + cfg.w2 * theta[rows, labels]) ** 2))
    model = ClusterModel(
        centroids=centroids,
        norm_dR=ranges[0],
        norm_theta=ranges[1],
        config=cfg,
        assignments=labels.astype(np.int64),
        iterations_run=it,
        inertia_history=history,
    )
    return objective, model


def kmeans_fit(points, cfg):
    """Cluster SPD matrices with the combined metric.

    Runs ``cfg.n_init`` independently seeded Lloyd passes and keeps the one
    with the smallest sum of squared raw combined distances
    ``(w1 * d_R + w2 * theta)**2`` to its own centroids.

    Parameters
    ----------
    points : ndarray, shape (m, n, n)
    cfg : ClusterConfig

    Returns
    -------
    ClusterModel
        Centroids of the surviving clusters, final-pass normalization ranges
        and the assignment of every training point.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 3 or points.shape[0] == 0:
        raise EmptyInput("kmeans_fit needs a non-empty stack of matrices")
    points = symmetrize(points)
    if cfg.k > points.shape[0]:
        raise BadK(f"k={cfg.k} exceeds the number of points ({points.shape[0]})")

    best = None
    for child in np.random.SeedSequence(cfg.seed).spawn(cfg.n_init):
        objective, model = _lloyd(points, cfg, np.random.default_rng(child))
        # strict improvement keeps the earliest run on ties
        if best is None or objective < best[0] * (1 - 1e-12):
            best = (objective, model)
    return best[1]


def _inertia(dR, labels):
    return float(np.sum(dR[np.arange(len(labels)), labels] ** 2))


def _update(points, labels, k):
    return np.stack([frechet_mean(points[labels == j]) for j in range(k)])


def assign_many(model, points):
    """Route points to clusters using the frozen training ranges.

    Returns ``(cluster ids, combined distances)``.
    """
    points = symmetrize(np.asarray(points, dtype=np.float64))
    if points.ndim == 2:
        points = points[None]
    if points.shape[-2:] != model.centroids.shape[-2:]:
        raise ShapeError(f"point dim {points.shape[-2:]} != model dim {model.centroids.shape[-2:]}")
    dR, theta = _pair_metrics(points, model.centroids)
    D, _ = _combined(dR, theta, model.config, (model.norm_dR, model.norm_theta))
    labels = np.argmin(D, axis=1)
    return labels, D[np.arange(len(points)), labels]


def assign(model, point):
    """Cluster id and combined distance for a single SPD matrix."""
    point = np.asarray(point, dtype=np.float64)
    if point.ndim != 2:
        raise ShapeError("assign takes a single matrix; use assign_many for stacks")
    labels, dist = assign_many(model, point)
    return int(labels[0]), float(dist[0])
