"""Channel selection, covariance and RBF channel kernels, SPD fusion."""

from dataclasses import dataclass

import numpy as np

from .errors import BadK, ConfigError, DegenerateLabels, InsufficientSamples, ShapeError
from .linalg import SPD_FLOOR, nearest_spd, symmetrize

ZSCORE_VAR_FLOOR = 1e-12


@dataclass
class Trial:
    """One labelled multichannel segment, ``data`` of shape (channels, samples)."""

    data: np.ndarray
    label: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 2:
            raise ShapeError(f"trial data must be 2-D (channels, samples), got {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ShapeError("trial data has non-finite values")
        self.label = int(self.label)

    @property
    def channels(self):
        return self.data.shape[0]

    @property
    def samples(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class FeatureConfig:
    selected_channels: tuple
    sigma: float = 0.1
    w_cov: float = 0.5
    w_rbf: float = 0.5
    pd_floor: float = SPD_FLOOR

    def __post_init__(self):
        chans = tuple(int(c) for c in self.selected_channels)
        object.__setattr__(self, "selected_channels", chans)
        if not chans or len(set(chans)) != len(chans) or min(chans) < 0:
            raise ConfigError(f"selected_channels must be unique non-negative indices: {chans}")
        if not self.sigma > 0:
            raise ConfigError("sigma must be positive")
        if not (0 <= self.w_cov <= 1 and 0 <= self.w_rbf <= 1):
            raise ConfigError("fusion weights must lie in [0, 1]")
        if abs(self.w_cov + self.w_rbf - 1.0) > 1e-12:
            raise ConfigError(f"fusion weights must sum to 1, got {self.w_cov} + {self.w_rbf}")
        if not self.pd_floor > 0:
            raise ConfigError("pd_floor must be positive")


def _data(trial):
    return trial.data if isinstance(trial, Trial) else np.asarray(trial, dtype=np.float64)


def covariance(trial):
    """Sample covariance across channels, each time sample an observation.

    ``C = 1/(T-1) sum_k (x_k - mu)(x_k - mu)^T`` for the ``T`` column vectors
    of the trial.
    """
    X = _data(trial)
    if X.shape[-1] < 2:
        raise InsufficientSamples(f"covariance needs at least 2 samples, got {X.shape[-1]}")
    Xc = X - X.mean(axis=-1, keepdims=True)
    C = Xc @ np.swapaxes(Xc, -1, -2) / (X.shape[-1] - 1)
    return symmetrize(C)


def _pearson(a, b):
    a = a - a.mean()
    b = b - b.mean()
    denom = np.sqrt(np.dot(a, a) * np.dot(b, b))
    if denom <= 0 or not np.isfinite(denom):
        return 0.0
    return float(np.dot(a, b) / denom)


def channel_scores(trials, labels=None):
    """Relevance of each channel to the class labels.

    For every channel the per-trial log-variance is correlated with each
    one-vs-rest class indicator (point-biserial correlation); the score is
    the largest absolute correlation over classes. Channels with constant
    log-variance score 0.
    """
    if labels is None:
        labels = [t.label for t in trials]
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size < 2:
        raise DegenerateLabels("channel scoring needs at least two distinct labels")
    data = np.stack([_data(t) for t in trials])
    logvar = np.log(np.maximum(data.var(axis=-1, ddof=1), np.finfo(float).tiny))
    # exactly constant columns would otherwise give rounding-noise correlations
    constant = np.all(logvar == logvar[:1], axis=0)
    scores = np.zeros(data.shape[1])
    for ch in range(data.shape[1]):
        if constant[ch]:
            continue
        scores[ch] = max(abs(_pearson(logvar[:, ch], (labels == c).astype(float))) for c in classes)
    return np.clip(scores, 0.0, 1.0)


def select_channels(scores, k):
    """Indices of the ``k`` best scores; ties go to the lower index."""
    scores = np.asarray(scores, dtype=np.float64)
    if not 1 <= k <= scores.size:
        raise BadK(f"k={k} outside 1..{scores.size}")
    order = sorted(range(scores.size), key=lambda i: (-scores[i], i))
    return order[:k]


def rbf_from_sqdist(d2, sigma):
    """``exp(-d2 / (2 sigma^2))``."""
    if not sigma > 0:
        raise ConfigError("sigma must be positive")
    return np.exp(-np.asarray(d2, dtype=np.float64) / (2.0 * sigma**2))


def rbf_channel_kernel(trial, sigma):
    """RBF similarity between the channels of a trial.

    Channels are z-scored, then ``D2(a, b)`` is the mean squared per-sample
    difference of channel series ``a`` and ``b``.
    """
    X = _data(trial)
    var = np.maximum(X.var(axis=-1, keepdims=True), ZSCORE_VAR_FLOOR)
    Z = (X - X.mean(axis=-1, keepdims=True)) / np.sqrt(var)
    sq = np.sum(Z**2, axis=-1)
    d2 = (sq[..., :, None] + sq[..., None, :] - 2.0 * Z @ np.swapaxes(Z, -1, -2)) / X.shape[-1]
    d2 = np.maximum(d2, 0.0)
    idx = np.arange(X.shape[-2])
    d2[..., idx, idx] = 0.0
    return symmetrize(rbf_from_sqdist(d2, sigma))


def fuse(C, K, cfg):
    """Weighted sum of the scale-normalized covariance and the RBF kernel,
    floored onto the SPD cone."""
    C = symmetrize(C)
    K = symmetrize(K)
    if C.shape != K.shape:
        raise ShapeError(f"covariance {C.shape} and kernel {K.shape} differ")
    scale = np.max(np.abs(C), axis=(-2, -1), keepdims=True)
    C_hat = C / np.where(scale > 0, scale, 1.0)
    return nearest_spd(cfg.w_cov * C_hat + cfg.w_rbf * K, cfg.pd_floor)


def extract(trials, cfg):
    """Fused SPD feature for every trial, restricted to ``cfg.selected_channels``.

    Returns an array of shape (m, k, k).
    """
    data = np.stack([_data(t) for t in trials])
    if max(cfg.selected_channels) >= data.shape[1]:
        raise ShapeError(
            f"trials have {data.shape[1]} channels, model needs index {max(cfg.selected_channels)}"
        )
    data = data[:, list(cfg.selected_channels), :]
    return fuse(covariance(data), rbf_channel_kernel(data, cfg.sigma), cfg)
