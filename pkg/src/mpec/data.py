"""Trial archives, synthetic datasets and stratified splitting.

Archive layout (little-endian)::

    magic   4 bytes  b"EEGT"
    version u32      1
    n_trials, n_channels, n_samples  u32 each
    labels  u16 * n_trials
    data    f64 * n_trials * n_channels * n_samples   (trial, channel, sample)
"""

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ArchiveError,
    BadMagic,
    ConfigError,
    LabelOutOfRange,
    StratifyError,
    TruncatedFile,
    VersionUnsupported,
)
from .features import Trial
from .linalg import apply_spectral

MAGIC = b"EEGT"
VERSION = 1
_HEADER = struct.Struct("<4sIIII")
MAX_LABEL = 0xFFFF


@dataclass(frozen=True)
class SynthConfig:
    classes: int
    trials_per_class: int
    channels: int
    samples: int
    separation: float
    noise: float
    seed: int

    def __post_init__(self):
        if self.classes < 2:
            raise ConfigError("classes must be at least 2")
        for name in ("trials_per_class", "channels", "samples"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        if self.separation < 0 or self.noise < 0 or self.seed < 0:
            raise ConfigError("separation, noise and seed must be non-negative")


def _streams(seed):
    cov_seq, sample_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(cov_seq), np.random.default_rng(sample_seq)


def class_covariances(cfg):
    """Ground-truth covariance ``exp(separation * S_c)`` for every class,
    where ``S_c`` is a random symmetric matrix of unit Frobenius norm."""
    rng, _ = _streams(cfg.seed)
    out = []
    for _ in range(cfg.classes):
        G = rng.normal(size=(cfg.channels, cfg.channels))
        S = 0.5 * (G + G.T)
        S /= np.linalg.norm(S)
        out.append(apply_spectral(cfg.separation * S, "exp"))
    return np.stack(out)


def synth_dataset(cfg):
    """Zero-mean Gaussian trials with class-specific spatial covariance plus
    additive white noise of standard deviation ``cfg.noise``.

    Trials are emitted class by class; the result is deterministic in
    ``cfg.seed``.
    """
    covs = class_covariances(cfg)
    _, rng = _streams(cfg.seed)
    trials = []
    for label, cov in enumerate(covs):
        root = apply_spectral(cov, "sqrt")
        for _ in range(cfg.trials_per_class):
            z = rng.normal(size=(cfg.channels, cfg.samples))
            noise = rng.normal(size=(cfg.channels, cfg.samples))
            trials.append(Trial(root @ z + cfg.noise * noise, label))
    return trials


def write_archive(trials, path):
    """Write trials sharing one (channels, samples) shape to ``path``."""
    trials = list(trials)
    if not trials:
        raise ArchiveError("cannot write an empty archive")
    shape = trials[0].data.shape
    if any(t.data.shape != shape for t in trials):
        raise ArchiveError("all trials in an archive must share one shape")
    labels = np.array([t.label for t in trials])
    if labels.min() < 0 or labels.max() > MAX_LABEL:
        raise LabelOutOfRange(f"labels must fit in u16, got range {labels.min()}..{labels.max()}")
    header = _HEADER.pack(MAGIC, VERSION, len(trials), shape[0], shape[1])
    data = np.stack([t.data for t in trials]).astype("<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(labels.astype("<u2").tobytes())
        fh.write(data.tobytes())


def parse_archive(raw, n_classes=None):
    if len(raw) < _HEADER.size:
        raise TruncatedFile(f"archive header needs {_HEADER.size} bytes, got {len(raw)}")
    magic, version, n_trials, n_channels, n_samples = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise BadMagic(f"expected magic {MAGIC!r}, found {magic!r}")
    if version != VERSION:
        raise VersionUnsupported(f"archive version {version} (supported: {VERSION})")
    n_values = n_trials * n_channels * n_samples
    expected = _HEADER.size + 2 * n_trials + 8 * n_values
    if len(raw) < expected:
        raise TruncatedFile(f"archive declares {expected} bytes but holds {len(raw)}")
    if len(raw) > expected:
        raise ArchiveError(f"{len(raw) - expected} trailing bytes after archive payload")
    labels = np.frombuffer(raw, dtype="<u2", count=n_trials, offset=_HEADER.size)
    if n_classes is not None and labels.size and labels.max() >= n_classes:
        raise LabelOutOfRange(f"label {labels.max()} outside 0..{n_classes - 1}")
    data = np.frombuffer(raw, dtype="<f8", count=n_values, offset=_HEADER.size + 2 * n_trials)
    data = data.reshape(n_trials, n_channels, n_samples).astype(np.float64)
    return [Trial(data[i], int(labels[i])) for i in range(n_trials)]


def read_archive(path, n_classes=None):
    """Read an archive written by :func:`write_archive`.

    ``n_classes``, when given, bounds the accepted labels.
    """
    return parse_archive(Path(path).read_bytes(), n_classes)


def read_csv_manifest(manifest_path):
    """Load trials from CSV files listed in a JSON manifest.

    The manifest is a list of ``{"file": ..., "label": ...}`` objects; file
    paths are resolved relative to the manifest. Each CSV holds one row per
    channel and one column per sample.
    """
    manifest_path = Path(manifest_path)
    entries = json.loads(manifest_path.read_text())
    trials = []
    for entry in entries:
        if set(entry) != {"file", "label"}:
            raise ArchiveError(f"manifest entries need exactly 'file' and 'label': {entry}")
        data = np.loadtxt(manifest_path.parent / entry["file"], delimiter=",", ndmin=2)
        trials.append(Trial(data, int(entry["label"])))
    return trials


def stratified_split_indices(labels, ratio, seed):
    """Per-class shuffled split; each class contributes ``round(ratio * n_c)``
    training trials, clamped so both sides keep at least one."""
    labels = np.asarray(labels)
    if not 0 < ratio < 1:
        raise ConfigError(f"split ratio must lie in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        if idx.size < 2:
            raise StratifyError(f"class {c} has {idx.size} trial(s); stratified split needs 2")
        idx = rng.permutation(idx)
        n_train = int(np.clip(np.floor(ratio * idx.size + 0.5), 1, idx.size - 1))
        train.extend(idx[:n_train])
        test.extend(idx[n_train:])
    return np.sort(np.array(train, dtype=np.int64)), np.sort(np.array(test, dtype=np.int64))


def split(trials, ratio, seed):
    """Stratified train/test partition of a trial list."""
    train, test = stratified_split_indices([t.label for t in trials], ratio, seed)
    return [trials[i] for i in train], [trials[i] for i in test]


def stratified_folds(labels, n_folds, seed):
    """Fold id per sample: each class is shuffled then dealt round-robin.

    When there are fewer samples than folds every sample gets its own fold
    (leave-one-out).
    """
    labels = np.asarray(labels)
    if labels.size < n_folds:
        return np.arange(labels.size)
    rng = np.random.default_rng(seed)
    folds = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        folds[idx] = (offset + np.arange(idx.size)) % n_folds
        offset += idx.size
    return folds
