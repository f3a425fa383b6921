"""Self-describing binary model files.

Layout (little-endian)::

    magic    b"MPEC"
    version  u32
    count    u32                       number of sections
    section  name_len u16, name utf-8, payload_len u64, payload

Each payload is one tagged value: ``N`` none, ``T``/``F`` bools, ``i`` i64,
``f`` f64, ``s`` utf-8 string, ``a`` ndarray (dtype, shape, raw bytes),
``l`` list and ``d`` string-keyed dict. Encoding is deterministic, so equal
models produce byte-identical files.
"""

import io
import struct
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ArchiveError, BadMagic, TruncatedFile, VersionUnsupported
from .ensemble import ClusterExperts, MpecModel
from .features import FeatureConfig
from .kmeans import ClusterConfig, ClusterModel
from .learners import LearnerKind, TrainedLearner

MAGIC = b"MPEC"
VERSION = 1


def _encode(value, out):
    if value is None:
        out.write(b"N")
    elif isinstance(value, (bool, np.bool_)):
        out.write(b"T" if value else b"F")
    elif isinstance(value, Enum):
        _encode(value.value, out)
    elif isinstance(value, (int, np.integer)):
        out.write(b"i" + struct.pack("<q", int(value)))
    elif isinstance(value, (float, np.floating)):
        out.write(b"f" + struct.pack("<d", float(value)))
    elif isinstance(value, str):
        raw = value.encode("utf-8")
        out.write(b"s" + struct.pack("<I", len(raw)) + raw)
    elif isinstance(value, np.ndarray):
        if value.dtype.hasobject:
            raise TypeError("object arrays cannot be serialized")
        arr = np.ascontiguousarray(value.astype(value.dtype.newbyteorder("<"), copy=False))
        code = arr.dtype.str.encode("ascii")
        out.write(b"a" + struct.pack("<B", len(code)) + code + struct.pack("<B", arr.ndim))
        out.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        out.write(arr.tobytes())
    elif isinstance(value, (list, tuple)):
        out.write(b"l" + struct.pack("<I", len(value)))
        for item in value:
            _encode(item, out)
    elif isinstance(value, dict):
        out.write(b"d" + struct.pack("<I", len(value)))
        for key, item in value.items():
            _encode(str(key), out)
            _encode(item, out)
    else:
        raise TypeError(f"cannot serialize {type(value).__name__}")


class _Reader:
    def __init__(self, raw):
        self.raw = raw
        self.pos = 0

    def take(self, n):
        if self.pos + n > len(self.raw):
            raise TruncatedFile(f"model file ends at byte {len(self.raw)}, needed {self.pos + n}")
        chunk = self.raw[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def _decode(r):
    tag = r.take(1)
    if tag == b"N":
        return None
    if tag == b"T":
        return True
    if tag == b"F":
        return False
    if tag == b"i":
        return r.unpack("<q")[0]
    if tag == b"f":
        return r.unpack("<d")[0]
    if tag == b"s":
        (n,) = r.unpack("<I")
        return r.take(n).decode("utf-8")
    if tag == b"a":
        (n,) = r.unpack("<B")
        dtype = np.dtype(r.take(n).decode("ascii"))
        (ndim,) = r.unpack("<B")
        shape = r.unpack(f"<{ndim}Q")
        count = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(r.take(count * dtype.itemsize), dtype=dtype).reshape(shape)
        return arr.astype(dtype.newbyteorder("="))
    if tag == b"l":
        (n,) = r.unpack("<I")
        return [_decode(r) for _ in range(n)]
    if tag == b"d":
        (n,) = r.unpack("<I")
        out = {}
        for _ in range(n):
            key = _decode(r)
            out[key] = _decode(r)
        return out
    raise ArchiveError(f"unknown value tag {tag!r} at byte {r.pos - 1}")


def dumps_sections(sections):
    out = io.BytesIO()
    out.write(MAGIC + struct.pack("<II", VERSION, len(sections)))
    for name, value in sections.items():
        payload = io.BytesIO()
        _encode(value, payload)
        raw_name = name.encode("utf-8")
        out.write(struct.pack("<H", len(raw_name)) + raw_name)
        out.write(struct.pack("<Q", payload.tell()) + payload.getvalue())
    return out.getvalue()


def loads_sections(raw):
    r = _Reader(raw)
    if r.take(4) != MAGIC:
        raise BadMagic("not an MPEC model file")
    version, count = r.unpack("<II")
    if version != VERSION:
        raise VersionUnsupported(f"model format version {version} (supported: {VERSION})")
    sections = {}
    for _ in range(count):
        (n,) = r.unpack("<H")
        name = r.take(n).decode("utf-8")
        (size,) = r.unpack("<Q")
        sub = _Reader(r.take(size))
        sections[name] = _decode(sub)
        if sub.pos != size:
            raise ArchiveError(f"section {name!r} has {size - sub.pos} unread bytes")
    if r.pos != len(raw):
        raise ArchiveError("trailing bytes after the last section")
    return sections


def _learner_to_dict(m):
    return {"kind": m.kind.value, "class_count": m.class_count, "training_seed": m.training_seed, "state": m.state}


def _learner_from_dict(d):
    return TrainedLearner(LearnerKind(d["kind"]), d["class_count"], d["state"], d["training_seed"])


def model_sections(model, metadata=None):
    fc = model.feature_config
    cm = model.cluster_model
    return {
        "header": {"class_count": model.class_count, "dim": model.dim, "seed": model.seed},
        "features": {
            "selected_channels": list(fc.selected_channels),
            "sigma": fc.sigma,
            "w_cov": fc.w_cov,
            "w_rbf": fc.w_rbf,
            "pd_floor": fc.pd_floor,
        },
        "cluster": {
            "config": dict(vars(cm.config)),
            "centroids": cm.centroids,
            "norm_dR": list(cm.norm_dR),
            "norm_theta": list(cm.norm_theta),
            "assignments": cm.assignments,
            "iterations_run": cm.iterations_run,
            "inertia_history": list(cm.inertia_history),
        },
        "experts": [
            {"mean": e.mean, "scale": e.scale, "learners": [_learner_to_dict(m) for m in e.learners]}
            for e in model.experts
        ],
        "meta_model": _learner_to_dict(model.meta_model),
        "metadata": metadata or {},
    }


def model_from_sections(s):
    h = s["header"]
    c = s["cluster"]
    cm = ClusterModel(
        centroids=c["centroids"],
        norm_dR=tuple(c["norm_dR"]),
        norm_theta=tuple(c["norm_theta"]),
        config=ClusterConfig(**c["config"]),
        assignments=c["assignments"],
        iterations_run=c["iterations_run"],
        inertia_history=c["inertia_history"],
    )
    f = s["features"]
    fc = FeatureConfig(tuple(f["selected_channels"]), f["sigma"], f["w_cov"], f["w_rbf"], f["pd_floor"])
    experts = [
        ClusterExperts(e["mean"], e["scale"], tuple(_learner_from_dict(m) for m in e["learners"]))
        for e in s["experts"]
    ]
    model = MpecModel(fc, cm, experts, _learner_from_dict(s["meta_model"]), h["class_count"], h["dim"], h["seed"])
    return model, s.get("metadata", {})


def save_model(model, path, metadata=None):
    """Write ``model`` (and a JSON-like ``metadata`` dict) to ``path``."""
    Path(path).write_bytes(dumps_sections(model_sections(model, metadata)))


def load_model(path):
    """Return ``(model, metadata)`` from a file written by :func:`save_model`."""
    return model_from_sections(loads_sections(Path(path).read_bytes()))
