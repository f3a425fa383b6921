"""Manifold-preserving EEG classification: SPD covariance/kernel features,
curvature-weighted K-means on the SPD manifold, tangent-space projection and
a stacked ensemble of weak learners."""

from .data import SynthConfig, read_archive, split, synth_dataset, write_archive
from .ensemble import EvalReport, MpecModel, PipelineConfig, evaluate, mpec_fit, mpec_predict
from .features import FeatureConfig, Trial
from .kmeans import ClusterConfig, ClusterModel, assign, kmeans_fit
from .serialize import load_model, save_model

__version__ = "0.1.0"

__all__ = [
    "ClusterConfig",
    "ClusterModel",
    "EvalReport",
    "FeatureConfig",
    "MpecModel",
    "PipelineConfig",
    "SynthConfig",
    "Trial",
    "assign",
    "evaluate",
    "kmeans_fit",
    "load_model",
    "mpec_fit",
    "mpec_predict",
    "read_archive",
    "save_model",
    "split",
    "synth_dataset",
    "write_archive",
]
