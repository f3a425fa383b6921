"""Uniform fit / predict_scores contract shared by every learner kind."""

import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np

from ..errors import ConfigError, EmptyInput, LengthMismatch, ShapeError, SingleClass


class LearnerKind(str, Enum):
    SVM = "svm"
    LOGREG = "logreg"
    MLP = "mlp"
    FOREST = "forest"
    RIDGE = "ridge"


WEAK_KINDS = (LearnerKind.SVM, LearnerKind.LOGREG, LearnerKind.MLP, LearnerKind.FOREST)


@dataclass(frozen=True)
class SvmParams:
    C: float = 1.0
    kernel_sigma: Optional[float] = None  # None: sqrt(d * var(X) / 2)
    tol: float = 1e-3
    max_passes: int = 10_000


@dataclass(frozen=True)
class LogRegParams:
    max_iter: int = 1000
    l1_strength: float = 0.01
    tol: float = 1e-6


@dataclass(frozen=True)
class MlpParams:
    hidden: int = 100
    activation: str = "tanh"
    l2_alpha: float = 1e-4
    learning_rate: float = 1e-3
    epochs: int = 100
    batch_size: int = 32


@dataclass(frozen=True)
class ForestParams:
    trees: int = 100
    max_depth: Optional[int] = None
    features_per_split: Union[str, int] = "sqrt"
    bootstrap: bool = True


@dataclass(frozen=True)
class RidgeParams:
    alpha: float = 10.0
    tol: float = 1e-4


@dataclass(frozen=True)
class LearnerParams:
    svm: SvmParams = field(default_factory=SvmParams)
    logreg: LogRegParams = field(default_factory=LogRegParams)
    mlp: MlpParams = field(default_factory=MlpParams)
    forest: ForestParams = field(default_factory=ForestParams)
    ridge: RidgeParams = field(default_factory=RidgeParams)

    def __post_init__(self):
        positive = [
            ("svm.C", self.svm.C),
            ("svm.tol", self.svm.tol),
            ("svm.max_passes", self.svm.max_passes),
            ("logreg.max_iter", self.logreg.max_iter),
            ("mlp.hidden", self.mlp.hidden),
            ("mlp.learning_rate", self.mlp.learning_rate),
            ("mlp.epochs", self.mlp.epochs),
            ("mlp.batch_size", self.mlp.batch_size),
            ("forest.trees", self.forest.trees),
            ("ridge.alpha", self.ridge.alpha),
            ("ridge.tol", self.ridge.tol),
        ]
        for name, value in positive:
            if not value > 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.svm.kernel_sigma is not None and not self.svm.kernel_sigma > 0:
            raise ConfigError("svm.kernel_sigma must be positive")
        if self.logreg.l1_strength < 0 or self.mlp.l2_alpha < 0:
            raise ConfigError("regularization strengths must be non-negative")
        if self.mlp.activation != "tanh":
            raise ConfigError(f"unsupported activation {self.mlp.activation!r}; only 'tanh'")
        if self.forest.max_depth is not None and self.forest.max_depth < 1:
            raise ConfigError("forest.max_depth must be positive or null")
        fps = self.forest.features_per_split
        if not (fps in ("sqrt", "all") or (isinstance(fps, int) and fps > 0)):
            raise ConfigError(f"forest.features_per_split must be 'sqrt', 'all' or a positive int: {fps!r}")


@dataclass(frozen=True)
class TrainedLearner:
    kind: LearnerKind
    class_count: int
    state: dict
    training_seed: int


def gradient_checks_enabled():
    """MLP gradient checks run before training when MPEC_CHECK_GRADIENTS=1."""
    return os.environ.get("MPEC_CHECK_GRADIENTS", "") not in ("", "0")


def validate_xy(X, y, class_count=None):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyInput(f"expected a non-empty 2-D feature matrix, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise LengthMismatch(f"{X.shape[0]} feature rows but labels of shape {y.shape}")
    if not np.all(np.isfinite(X)):
        raise ShapeError("features contain non-finite values")
    y = y.astype(np.int64)
    if class_count is None:
        class_count = int(y.max()) + 1
    if y.min() < 0 or y.max() >= class_count:
        raise ShapeError(f"labels must lie in 0..{class_count - 1}")
    if np.unique(y).size < 2:
        raise SingleClass("a classifier needs at least two classes in its training data")
    return X, y, class_count
