"""Command-line interface.

Commands write machine-readable JSON (or CSV) to stdout and logs to stderr.
Exit codes: 0 success, 2 configuration/usage, 3 data, 4 numerical.
"""

import argparse
import csv
import hashlib
import io
import itertools
import json
import logging
import sys
import time
import warnings
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig, load_json, synth_config_from_dict
from .data import read_archive, stratified_split_indices, synth_dataset, write_archive
from .ensemble import cross_val_accuracy, evaluate, mpec_fit, mpec_predict, weak_predictions
from .errors import BadK, ConfigError, DataError, MpecError
from .serialize import load_model, save_model

log = logging.getLogger("mpec")

TABLE_COLUMNS = ("model", "precision", "recall", "f1", "accuracy")
TABLE_NAMES = {
    "svm": "SVM",
    "logreg": "LR",
    "mlp": "MLP",
    "forest": "Random Forest",
    "mpec": "MPEC (ensemble)",
}
WEIGHT_SWEEP = [[round(w, 1), round(1 - w, 1)] for w in np.arange(0, 1.01, 0.1)]


def _emit(doc):
    sys.stdout.write(json.dumps(doc, indent=2, sort_keys=False) + "\n")


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _run_config(args):
    cfg = RunConfig.from_dict(load_json(args.config)) if args.config else RunConfig()
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def _split(trials, ratio, seed):
    train, test = stratified_split_indices([t.label for t in trials], ratio, seed)
    return [trials[i] for i in train], [trials[i] for i in test]


def cmd_synth(args):
    doc = load_json(args.config)
    if args.seed is not None:
        doc = dict(doc, seed=args.seed)
    cfg = synth_config_from_dict(doc)
    trials = synth_dataset(cfg)
    write_archive(trials, args.out)
    _emit({"command": "synth", "trials": len(trials), "archive_sha256": _sha256(args.out), "seed": cfg.seed})


def cmd_fit(args):
    cfg = _run_config(args)
    trials = read_archive(args.archive)
    train, test = _split(trials, cfg.split_ratio, cfg.seed)
    if cfg.pipeline.k > len(train):
        raise BadK(f"k={cfg.pipeline.k} exceeds the {len(train)} training trials")
    t0 = time.perf_counter()
    model = mpec_fit(train, cfg.pipeline, cfg.seed)
    fit_time = time.perf_counter() - t0
    truth = np.array([t.label for t in train])
    report = evaluate(mpec_predict(model, train), truth, model.class_count)
    metadata = {
        "config": cfg.to_dict(),
        "config_sha256": cfg.digest(),
        "split_seed": cfg.seed,
        "split_ratio": cfg.split_ratio,
        "archive_sha256": _sha256(args.archive),
    }
    save_model(model, args.out, metadata)
    doc = {
        "command": "fit",
        "seed": cfg.seed,
        "config_sha256": cfg.digest(),
        "archive_sha256": metadata["archive_sha256"],
        "n_train": len(train),
        "n_test": len(test),
        "selected_channels": list(model.feature_config.selected_channels),
        "cluster_sizes": model.cluster_sizes,
        "cluster_iterations": model.cluster_model.iterations_run,
        "accuracy": report.accuracy,
        "train": report.to_dict(),
        "weak_train_accuracy": {
            k: float(np.mean(v == truth)) for k, v in weak_predictions(model, train).items()
        },
    }
    if not args.no_cv:
        mean, per_fold = cross_val_accuracy(train, cfg.pipeline, cfg.seed)
        doc["cv_accuracy"] = mean
        doc["cv_fold_accuracies"] = per_fold
    timings = dict(model.timings, total_fit=fit_time)
    log.info("phase timings (s): %s", json.dumps({k: round(v, 4) for k, v in timings.items()}))
    if args.timings:
        doc["timings"] = timings
    _emit(doc)


def _predictions_csv(rows, header):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_predict(args):
    model, meta = load_model(args.model)
    trials = read_archive(args.archive)
    pred = mpec_predict(model, trials)
    if args.format == "csv":
        text = _predictions_csv([(i, int(p)) for i, p in enumerate(pred)], ("trial", "predicted"))
    else:
        text = json.dumps({"command": "predict", "predictions": pred.tolist()}) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _table_row(name, report):
    return [TABLE_NAMES[name]] + [round(100 * getattr(report, c), 2) for c in TABLE_COLUMNS[1:]]


def cmd_eval(args):
    model, meta = load_model(args.model)
    trials = read_archive(args.archive)
    split_seed = meta.get("split_seed", 0)
    if args.split_seed is not None and args.split_seed != split_seed:
        warnings.warn(
            f"--split-seed {args.split_seed} differs from the seed the model was fit with ({split_seed}); "
            "test trials may overlap its training set"
        )
        split_seed = args.split_seed
    if meta.get("archive_sha256") not in (None, _sha256(args.archive)):
        warnings.warn("archive differs from the one the model was fit on")
    _, test = _split(trials, meta.get("split_ratio", 0.8), split_seed)
    truth = np.array([t.label for t in test])
    L = model.class_count
    report = evaluate(mpec_predict(model, test), truth, L)
    weak = {k: evaluate(v, truth, L) for k, v in weak_predictions(model, test).items()}
    table = [_table_row(k, r) for k, r in weak.items()] + [_table_row("mpec", report)]
    if args.out:
        rows = [
            (r["class"], r["precision"], r["recall"], r["f1"], r["support"]) for r in report.per_class
        ]
        Path(args.out).write_text(_predictions_csv(rows, ("class", "precision", "recall", "f1", "support")))
    if args.format == "csv":
        sys.stdout.write(_predictions_csv(table, TABLE_COLUMNS))
        return
    _emit(
        {
            "command": "eval",
            "split_seed": split_seed,
            "config_sha256": meta.get("config_sha256"),
            "n_test": len(test),
            "accuracy": report.accuracy,
            "report": report.to_dict(),
            "table_columns": list(TABLE_COLUMNS),
            "table": table,
        }
    )


def _weight_pairs(grid, key, default):
    if key not in grid:
        return [default]
    value = grid[key]
    if value == "sweep":
        return WEIGHT_SWEEP
    if not isinstance(value, list) or not value:
        raise ConfigError(f"grid {key!r} must be 'sweep' or a non-empty list of [a, b] pairs")
    for pair in value:
        if (
            not isinstance(pair, list)
            or len(pair) != 2
            or not all(isinstance(w, (int, float)) and 0 <= w <= 1 for w in pair)
            or abs(pair[0] + pair[1] - 1) > 1e-9
        ):
            raise ConfigError(f"grid {key!r} entry {pair!r} is not a weight pair summing to 1")
    return [[float(a), float(b)] for a, b in value]


def parse_grid(grid, cfg):
    if not isinstance(grid, dict):
        raise ConfigError("grid spec must be a JSON object")
    allowed = {"fusion_weights", "cluster_weights", "k"}
    unknown = sorted(set(grid) - allowed)
    if unknown:
        raise ConfigError(f"unknown grid key(s): {', '.join(unknown)}")
    p = cfg.pipeline
    fusion = _weight_pairs(grid, "fusion_weights", [p.w_cov, p.w_rbf])
    cluster = _weight_pairs(grid, "cluster_weights", [p.w1, p.w2])
    ks = grid.get("k", [p.k])
    if not isinstance(ks, list) or not ks or not all(isinstance(k, int) and k >= 1 for k in ks):
        raise ConfigError("grid 'k' must be a non-empty list of positive integers")
    return list(itertools.product(fusion, cluster, ks))


def cmd_gridsearch(args):
    cfg = _run_config(args)
    cells = parse_grid(load_json(args.grid), cfg)
    trials = read_archive(args.archive)
    train, _ = _split(trials, cfg.split_ratio, cfg.seed)
    results = []
    for i, ((w_cov, w_rbf), (w1, w2), k) in enumerate(cells):
        pipeline = replace(cfg.pipeline, w_cov=w_cov, w_rbf=w_rbf, w1=w1, w2=w2, k=k)
        row = {"cell": i, "w_cov": w_cov, "w_rbf": w_rbf, "w1": w1, "w2": w2, "k": k}
        try:
            mean, per_fold = cross_val_accuracy(train, pipeline, cfg.seed)
            row.update(cv_accuracy=mean, fold_accuracies=per_fold)
        except DataError as exc:
            row.update(cv_accuracy=None, error=f"{type(exc).__name__}: {exc}")
        log.info("cell %d/%d: %s", i + 1, len(cells), row.get("cv_accuracy"))
        results.append(row)
    results.sort(key=lambda r: (r["cv_accuracy"] is None, -(r["cv_accuracy"] or 0.0), r["cell"]))
    for rank, row in enumerate(results, 1):
        row["rank"] = rank
    doc = {"command": "gridsearch", "seed": cfg.seed, "config_sha256": cfg.digest(), "cells": results}
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    _emit(doc)


def build_parser():
    parser = argparse.ArgumentParser(prog="mpec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic trial archive")
    p.add_argument("--config", required=True, help="synthesis config JSON")
    p.add_argument("--out", required=True, help="archive to write")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("fit", help="split an archive and fit the pipeline on its training side")
    p.add_argument("archive")
    p.add_argument("--config", help="run config JSON (defaults when omitted)")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--seed", type=int)
    p.add_argument("--no-cv", action="store_true", help="skip the inner cross-validation estimate")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict every trial of an archive")
    p.add_argument("archive")
    p.add_argument("--model", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="evaluate a model on the test side of its split")
    p.add_argument("archive")
    p.add_argument("--model", required=True)
    p.add_argument("--split-seed", type=int)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="per-class CSV to write")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("gridsearch", help="cross-validated sweep over fusion/cluster weights and K")
    p.add_argument("archive")
    p.add_argument("--config")
    p.add_argument("--grid", required=True, help="grid spec JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_gridsearch)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)
    try:
        args.func(args)
    except MpecError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except FileNotFoundError as exc:
        log.error("file not found: %s", exc.filename)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
