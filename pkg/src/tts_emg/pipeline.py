"""Benchmark orchestration behind the command-line subcommands.

Output directory layout::

    cache/<subject>.win               window set (binary, versioned)
    cache/<subject>.summary.json      window counts per class and repetition
    models/<classifier>/<subject>_split<k>.ckpt
    manifest.json                     per-(classifier, subject, split) training status
    results/<classifier>/<subject>.json
    report.json, report.txt
    features/<subject>_split<k>_{train,test}.csv
    comparison.json, comparison.txt
"""

from __future__ import annotations

import json
import logging
import os
import re
import time
import warnings
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .data import (
    DATABASE_CLASSES,
    WindowingConfig,
    apply_signal_normalizer,
    class_weights,
    fit_signal_normalizer,
    load_recording,
    load_window_cache,
    prepare_windows,
    save_window_cache,
    split_windows,
    standard_splits,
)
from .data.normalize import SignalNormalizer
from .data.recording import parse_header
from .errors import DataFormatError, NumericError
from .evaluation import (
    BenchmarkReport,
    FoldResult,
    SubjectResult,
    compare,
    is_finite_report,
    merge_reports,
    per_repetition_confusions,
    report,
    trial_confusion,
)
from .features import (
    apply_normalizer,
    extract_feature_matrix,
    fit_normalizer,
    write_feature_matrix,
)
from .models import (
    DEFAULT_EPOCHS,
    TrainConfig,
    adapt_temporal_conv,
    build_baseline_spec,
    build_network,
    build_tts_spec,
    load_checkpoint,
    predict_batch,
    save_checkpoint,
    train,
)

log = logging.getLogger(__name__)

CONFIG_SCHEMA_VERSION = 1
PRECISION_DTYPES = {"high": np.float64, "fast": np.float32}


@dataclass
class RunConfig:
    database_id: int = 1
    subjects: list = field(default_factory=list)
    architecture: str = "tts"
    splits: list | None = None  # 1-based split numbers; None = all standard splits
    epochs: int | None = None  # None = per-architecture default
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 128
    seed: int = 0
    out: str = "run"
    exclude_rep1: bool = False
    precision: str = "fast"
    jobs: int = 1
    width_divisor: int = 1
    n_classes: int | None = None
    classifier: str | None = None
    max_rest_seconds: float = 10.0
    window_ms: float = 150.0
    increment_ms: float = 10.0
    results: list = field(default_factory=list)
    control: str | None = None
    alpha: float = 0.02

    def __post_init__(self):
        if self.database_id not in (1, 2):
            raise ValueError(f"database must be 1 or 2, got {self.database_id}")
        if self.architecture not in ("tts", "baseline"):
            raise ValueError(f"architecture must be 'tts' or 'baseline', got {self.architecture!r}")
        if self.precision not in PRECISION_DTYPES:
            raise ValueError(f"precision must be 'high' or 'fast', got {self.precision!r}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    @property
    def num_classes(self):
        return self.n_classes or DATABASE_CLASSES[self.database_id]

    @property
    def classifier_id(self):
        return self.classifier or self.architecture

    @property
    def train_epochs(self):
        return self.epochs or DEFAULT_EPOCHS[(self.architecture, self.database_id)]

    def split_list(self):
        table = standard_splits(self.database_id)
        chosen = self.splits or list(range(1, len(table) + 1))
        for k in chosen:
            if not 1 <= k <= len(table):
                raise ValueError(f"split {k} out of range 1..{len(table)}")
        return [(k, table[k - 1]) for k in chosen]

    def training_key(self):
        """Fields that determine trained parameters."""
        keys = ("database_id", "architecture", "lr", "beta1", "beta2", "eps", "batch_size", "seed",
                "precision", "width_divisor", "max_rest_seconds", "window_ms", "increment_ms")
        d = {k: getattr(self, k) for k in keys}
        d["epochs"] = self.train_epochs
        d["n_classes"] = self.num_classes
        return d

    def to_dict(self):
        d = asdict(self)
        d["schema_version"] = CONFIG_SCHEMA_VERSION
        return d

    @classmethod
    def from_file(cls, path, **overrides):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        version = data.pop("schema_version", CONFIG_SCHEMA_VERSION)
        if version != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema version {version}")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)


def _safe(name):
    return re.sub(r"[^A-Za-z0-9_.-]", "_", str(name))


def _path(cfg, *parts):
    return os.path.join(cfg.out, *parts)


def _write_json(path, obj):
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def group_subject_files(paths):
    """Group exercise files by the subject id in their headers, keeping file order."""
    groups = {}
    for p in paths:
        if not os.path.exists(p):
            raise DataFormatError("file not found", p)
        with open(p, encoding="utf-8") as fh:
            _, _, subject, _ = parse_header(fh.readline(), p)
        groups.setdefault(subject, []).append(p)
    return groups


def job_seeds(master_seed, subject, fold):
    """Independent (init, training) seeds for one (subject, fold) cell."""
    ss = np.random.SeedSequence([int(master_seed), zlib.crc32(str(subject).encode()), int(fold)])
    init, trn = ss.spawn(2)
    return int(init.generate_state(1)[0]), np.random.default_rng(trn)


def cmd_prepare(cfg: RunConfig):
    """Load, relabel rest, enforce gaps and segment every subject; write caches and summaries."""
    if not cfg.subjects:
        raise ValueError("no subject files given")
    os.makedirs(_path(cfg, "cache"), exist_ok=True)
    wcfg = WindowingConfig(cfg.window_ms, cfg.increment_ms)
    summaries = {}
    for subject, files in group_subject_files(cfg.subjects).items():
        rec = load_recording(files)
        if rec.database_id != cfg.database_id:
            raise DataFormatError(f"recording is from database {rec.database_id}, run is for {cfg.database_id}",
                                  files[0])
        ws = prepare_windows(rec, wcfg, cfg.max_rest_seconds)
        save_window_cache(_path(cfg, "cache", f"{_safe(subject)}.win"), ws)
        summary = ws.summary()
        counts = summary["classes"]
        summary["classes"] = {str(c): counts.get(str(c), 0) for c in range(cfg.num_classes)}
        summary["n_classes"] = cfg.num_classes
        summary["files"] = list(files)
        empty = [c for c, n in summary["classes"].items() if n == 0]
        if empty:
            warnings.warn(f"subject {subject}: no windows for classes {empty}")
        _write_json(_path(cfg, "cache", f"{_safe(subject)}.summary.json"), summary)
        summaries[subject] = summary
    _write_json(_path(cfg, "cache", "subjects.json"), sorted(summaries))
    return summaries


def _subjects(cfg):
    path = _path(cfg, "cache", "subjects.json")
    if not os.path.exists(path):
        raise DataFormatError("no prepared caches; run 'prepare' first", path)
    return _read_json(path)


def _load_cache(cfg, subject):
    path = _path(cfg, "cache", f"{_safe(subject)}.win")
    if not os.path.exists(path):
        raise DataFormatError("missing window cache", path)
    return load_window_cache(path)


def architecture_spec(cfg: RunConfig, n_samples, n_channels):
    """Architecture for the run's database, adapted to the cached window geometry."""
    names = {1: "db1", 2: "db2"}
    name = f"{cfg.architecture}_{names[cfg.database_id]}"
    if cfg.width_divisor != 1:
        name += f"_w{cfg.width_divisor}"
    kw = dict(width_divisor=cfg.width_divisor, name=name)
    if cfg.architecture == "tts":
        size, stride = (3, 1) if cfg.database_id == 1 else (50, 25)
        return build_tts_spec(n_samples, n_channels, cfg.num_classes, size, stride, **kw)
    size, stride = (3, 1) if cfg.database_id == 1 else adapt_temporal_conv(3, 1, 20)
    return build_baseline_spec(n_samples, n_channels, cfg.num_classes, size, stride, **kw)


def _checkpoint_path(cfg, subject, k):
    return _path(cfg, "models", _safe(cfg.classifier_id), f"{_safe(subject)}_split{k}.ckpt")


def train_cell(cfg: RunConfig, subject, k, split):
    """Train one (subject, split) cell and write its checkpoint; returns elapsed seconds."""
    t0 = time.perf_counter()
    ws = _load_cache(cfg, subject)
    train_ws, _ = split_windows(ws, split)
    if len(train_ws) == 0:
        raise DataFormatError(f"subject {subject} split {k}: no training windows")
    norm = fit_signal_normalizer(train_ws)
    train_ws = apply_signal_normalizer(norm, train_ws)
    gamma = class_weights(train_ws.y, cfg.num_classes)
    init_seed, rng = job_seeds(cfg.seed, subject, k)
    spec = architecture_spec(cfg, ws.window_samples, ws.n_channels)
    net = build_network(spec, seed=init_seed, dtype=PRECISION_DTYPES[cfg.precision])
    tcfg = TrainConfig(cfg.train_epochs, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.batch_size,
                       list(gamma), init_seed)
    rep = train(net, train_ws, tcfg, rng)
    extra = {"subject": subject, "split": k, "train_reps": sorted(split.train_reps),
             "test_reps": sorted(split.test_reps), "normalizer_mean": norm.mean.tolist(),
             "normalizer_std": norm.std.tolist(), "epoch_losses": rep.epoch_losses}
    path = _checkpoint_path(cfg, subject, k)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    save_checkpoint(path, net, tcfg.to_dict(), extra)
    return time.perf_counter() - t0


def _train_job(args):
    cfg, subject, k, split = args
    return subject, k, train_cell(cfg, subject, k, split)


def cmd_train(cfg: RunConfig):
    """Train every (subject, split) cell not already completed in the manifest."""
    subjects = _subjects(cfg)
    manifest_path = _path(cfg, "manifest.json")
    manifest = _read_json(manifest_path) if os.path.exists(manifest_path) else {"classifiers": {}}
    key = cfg.training_key()
    entry = manifest["classifiers"].get(cfg.classifier_id)
    if entry is None or entry["config"] != key:
        entry = {"config": key, "cells": {}}
        manifest["classifiers"][cfg.classifier_id] = entry
    cells = entry["cells"]
    todo = []
    for subject in subjects:
        for k, split in cfg.split_list():
            name = f"{subject}/{k}"
            cell = cells.get(name)
            if cell and cell["status"] == "done" and os.path.exists(cell["checkpoint"]):
                continue
            todo.append((cfg, subject, k, split))
    _write_json(manifest_path, manifest)

    def record(subject, k, seconds):
        cells[f"{subject}/{k}"] = {"status": "done", "checkpoint": _checkpoint_path(cfg, subject, k),
                                   "seconds": round(seconds, 3)}
        _write_json(manifest_path, manifest)
        log.info("trained subject %s split %d in %.1fs", subject, k, seconds)

    if cfg.jobs == 1 or len(todo) <= 1:
        for job in todo:
            record(*_train_job(job))
    else:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for result in pool.map(_train_job, todo):
                record(*result)
    return manifest


def evaluate_subject(cfg: RunConfig, subject):
    ws = _load_cache(cfg, subject)
    folds = []
    for k, split in cfg.split_list():
        path = _checkpoint_path(cfg, subject, k)
        if not os.path.exists(path):
            raise DataFormatError("missing checkpoint; run 'train' first", path)
        net, header = load_checkpoint(path)
        extra = header["extra"]
        if net.input_shape != (ws.window_samples, ws.n_channels, 1):
            raise DataFormatError(f"checkpoint input {net.input_shape} does not match cached windows "
                                  f"{(ws.window_samples, ws.n_channels)}", path)
        if net.n_classes != cfg.num_classes or sorted(split.test_reps) != extra["test_reps"]:
            raise DataFormatError("checkpoint was trained for a different class count or split", path)
        norm = SignalNormalizer(np.asarray(extra["normalizer_mean"]), np.asarray(extra["normalizer_std"]))
        _, test_ws = split_windows(ws, split)
        test_ws = apply_signal_normalizer(norm, test_ws)
        pred = predict_batch(net, test_ws.X)
        rep_cms = per_repetition_confusions(pred, test_ws.y, test_ws.repetition, cfg.num_classes)
        tcm = trial_confusion(pred, test_ws.y, test_ws.repetition, cfg.num_classes, test_ws.starts)
        folds.append(FoldResult(k, rep_cms, tcm))
    return SubjectResult(subject, cfg.classifier_id, folds)


def cmd_evaluate(cfg: RunConfig):
    """Score every checkpoint on its test repetitions and write results plus the report."""
    results = []
    os.makedirs(_path(cfg, "results", _safe(cfg.classifier_id)), exist_ok=True)
    for subject in _subjects(cfg):
        res = evaluate_subject(cfg, subject)
        res.save(_path(cfg, "results", _safe(cfg.classifier_id), f"{_safe(subject)}.json"))
        results.append(res)
    bench = report({cfg.classifier_id: results}, exclude_rep1=cfg.exclude_rep1)
    if not is_finite_report(bench):
        raise NumericError("non-finite accuracy in the benchmark report")
    with open(_path(cfg, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(bench.to_json())
    with open(_path(cfg, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(bench.to_text() + repetition_table(bench))
    return bench


def repetition_table(bench: BenchmarkReport):
    lines = []
    for name, per_subject in sorted(bench.per_repetition.items()):
        reps = sorted({int(r) for v in per_subject.values() for r in v})
        lines.append(f"\nMacro accuracy by repetition ({name}, mean over subjects)")
        cells = []
        for r in reps:
            vals = [v[str(r)] for v in per_subject.values() if str(r) in v]
            cells.append(f"rep {r}: {100 * np.mean(vals):.1f}")
        lines.append("  " + "  ".join(cells))
    for name, per_subject in sorted(bench.trial_macro.items()):
        vals = [v for v in per_subject.values() if v is not None]
        if vals:
            lines.append(f"Trial-level (majority vote) macro accuracy ({name}): {100 * np.mean(vals):.1f}")
    return "\n".join(lines) + ("\n" if lines else "")


def cmd_features(cfg: RunConfig):
    """Write per-(subject, split) normalised mDWT/MAV/WL feature matrices."""
    os.makedirs(_path(cfg, "features"), exist_ok=True)
    written = []
    for subject in _subjects(cfg):
        ws = _load_cache(cfg, subject)
        feats = extract_feature_matrix(ws)
        for k, split in cfg.split_list():
            train_idx = np.flatnonzero(np.isin(ws.repetition, sorted(split.train_reps)))
            test_idx = np.flatnonzero(np.isin(ws.repetition, sorted(split.test_reps)))
            norm = fit_normalizer(feats[train_idx])
            for part, idx in (("train", train_idx), ("test", test_idx)):
                path = _path(cfg, "features", f"{_safe(subject)}_split{k}_{part}.csv")
                write_feature_matrix(path, apply_normalizer(norm, feats[idx]), ws.n_channels,
                                     labels=ws.y[idx], repetitions=ws.repetition[idx])
                written.append(path)
    return written


def load_report(path):
    with open(path, encoding="utf-8") as fh:
        return BenchmarkReport.from_dict(json.load(fh))


def cmd_compare(cfg: RunConfig):
    """Friedman, Iman-Davenport and Holm tests over classifier reports."""
    if len(cfg.results) < 1:
        raise ValueError("no result files given")
    reports = [load_report(p) for p in cfg.results]
    for rep in reports:
        rep.rows = [r for r in rep.rows if not r.classifier.endswith("*")]
    bench = merge_reports(reports)
    if len(bench.rows) < 2:
        raise ValueError("need results for at least two classifiers")
    control = cfg.control or bench.rows[-1].classifier
    compare(bench, control, cfg.alpha)
    os.makedirs(cfg.out, exist_ok=True)
    with open(_path(cfg, "comparison.json"), "w", encoding="utf-8") as fh:
        fh.write(bench.to_json())
    with open(_path(cfg, "comparison.txt"), "w", encoding="utf-8") as fh:
        fh.write(bench.to_text())
    return bench
