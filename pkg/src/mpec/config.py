"""JSON run and synthesis configs with strict key checking."""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .data import SynthConfig
from .ensemble import PipelineConfig
from .errors import ConfigError
from .learners import ForestParams, LearnerParams, LogRegParams, MlpParams, RidgeParams, SvmParams

_LEARNER_SECTIONS = {
    "svm": SvmParams,
    "logreg": LogRegParams,
    "mlp": MlpParams,
    "forest": ForestParams,
    "ridge": RidgeParams,
}

# section -> {json key: PipelineConfig field}
_PIPELINE_SECTIONS = {
    "features": {
        "n_channels": "n_channels",
        "sigma": "sigma",
        "w_cov": "w_cov",
        "w_rbf": "w_rbf",
        "pd_floor": "pd_floor",
    },
    "cluster": {
        "k": "k",
        "w1": "w1",
        "w2": "w2",
        "max_iter": "cluster_max_iter",
        "min_cluster_size": "min_cluster_size",
        "n_init": "cluster_n_init",
    },
    "ensemble": {"n_folds": "n_folds"},
}

# keys whose default is null but which take a number when set
_NULLABLE = {
    ("features", "n_channels"): int,
    ("cluster", "min_cluster_size"): int,
    ("svm", "kernel_sigma"): float,
    ("forest", "max_depth"): int,
}


def _check_type(section, key, value, default):
    where = f"{section}.{key}" if section else key
    if (section, key) in _NULLABLE:
        if value is None:
            return value
        default = _NULLABLE[(section, key)]()
    if section == "forest" and key == "features_per_split":
        if isinstance(value, str) or (isinstance(value, int) and not isinstance(value, bool)):
            return value
        raise ConfigError(f"{where} must be 'sqrt', 'all' or an integer")
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    else:
        ok = isinstance(value, type(default))
    if not ok:
        raise ConfigError(f"{where} has the wrong type: {value!r}")
    return value


def _section(doc, name):
    sub = doc.get(name, {})
    if not isinstance(sub, dict):
        raise ConfigError(f"section {name!r} must be a JSON object")
    return sub


def _reject_unknown(keys, allowed, where):
    unknown = sorted(set(keys) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")


@dataclass(frozen=True)
class RunConfig:
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    split_ratio: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.split_ratio < 1:
            raise ConfigError("split_ratio must lie in (0, 1)")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @classmethod
    def from_dict(cls, doc):
        if not isinstance(doc, dict):
            raise ConfigError("run config must be a JSON object")
        allowed = ["seed", "split_ratio", *_PIPELINE_SECTIONS, *_LEARNER_SECTIONS]
        _reject_unknown(doc, allowed, "run config")
        defaults = cls()
        top = {
            key: _check_type("", key, doc[key], getattr(defaults, key))
            for key in ("seed", "split_ratio")
            if key in doc
        }
        pipe = {}
        base = PipelineConfig()
        for name, mapping in _PIPELINE_SECTIONS.items():
            sub = _section(doc, name)
            _reject_unknown(sub, mapping, f"section {name!r}")
            for key, value in sub.items():
                pipe[mapping[key]] = _check_type(name, key, value, getattr(base, mapping[key]))
        learner_kwargs = {}
        for name, klass in _LEARNER_SECTIONS.items():
            sub = _section(doc, name)
            default = klass()
            _reject_unknown(sub, [f.name for f in fields(klass)], f"section {name!r}")
            checked = {k: _check_type(name, k, v, getattr(default, k)) for k, v in sub.items()}
            learner_kwargs[name] = klass(**checked)
        try:
            pipeline = PipelineConfig(learners=LearnerParams(**learner_kwargs), **pipe)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(pipeline=pipeline, **top)

    def to_dict(self):
        p = self.pipeline
        doc = {"seed": self.seed, "split_ratio": self.split_ratio}
        for name, mapping in _PIPELINE_SECTIONS.items():
            doc[name] = {key: getattr(p, attr) for key, attr in mapping.items()}
        for name in _LEARNER_SECTIONS:
            doc[name] = asdict(getattr(p.learners, name))
        return doc

    def digest(self):
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()


def synth_config_from_dict(doc):
    if not isinstance(doc, dict):
        raise ConfigError("synth config must be a JSON object")
    names = [f.name for f in fields(SynthConfig)]
    _reject_unknown(doc, names, "synth config")
    for name in names:
        if name not in doc:
            raise ConfigError(f"synth config is missing key {name!r}")
    kinds = {"separation": 0.0, "noise": 0.0}
    checked = {n: _check_type("", n, doc[n], kinds.get(n, 0)) for n in names}
    return SynthConfig(**checked)


def load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
