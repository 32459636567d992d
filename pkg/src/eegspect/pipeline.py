"""Config-driven experiment: catalog, segment, featurise, split, train, evaluate, test.

Stages run in sequence. Inside a stage, independent work items (recordings,
window chunks, folds) fan out to a thread pool whose results are collected
in submission order, so every output file is identical for any worker count.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .baseline import predict_proba, train
from .config import PipelineConfig
from .edf import EdfError, load_catalog, load_recording, select_channels
from .evaluation import confusion, metrics, rank_models, roc, write_metrics_csv, write_ranking_csv, write_roc_csv
from .representation import (
    FeatureTensor,
    RepresentationKind,
    apply_minmax,
    build_features,
    expected_dims,
    fit_minmax,
    read_dataset,
    write_dataset,
)
from .spectral import Spectrum, band_power
from .splits import holdout_split, kfold
from .stats import run_battery, write_pairwise_csv
from .windowing import WindowSpec, extract_windows, plan_segments, write_plans_csv

__all__ = ["PipelineError", "RunResult", "resolve_jobs", "run_pipeline", "CATALOG_NAME"]

logger = logging.getLogger(__name__)

CATALOG_NAME = "catalog.json"
THRESHOLD = 0.5


class PipelineError(RuntimeError):
    """A stage failed; ``stage`` names it."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"stage '{stage}' failed: {message}")
        self.stage = stage


@dataclass
class RunResult:
    output_dir: Path
    files: dict[str, str]  # relative path -> sha256
    skipped: list[str] = field(default_factory=list)  # recordings left out
    warnings: list[str] = field(default_factory=list)
    accuracy: dict[tuple, list[float]] = field(default_factory=dict)

    @property
    def partial(self) -> bool:
        return bool(self.skipped)


def resolve_jobs(jobs: int | None = None) -> int:
    """Explicit value, else ``EEGSPECT_JOBS``, else 1."""
    if jobs is None:
        env = os.environ.get("EEGSPECT_JOBS", "").strip()
        jobs = int(env) if env else 1
    if jobs < 1:
        raise ValueError("jobs must be >= 1")
    return jobs


class _Pool:
    def __init__(self, jobs: int):
        self.jobs = jobs
        self._executor = ThreadPoolExecutor(jobs) if jobs > 1 else None

    def map(self, fn, items) -> list:
        if self._executor is None:
            return [fn(item) for item in items]
        return list(self._executor.map(fn, items))

    def close(self):
        if self._executor is not None:
            self._executor.shutdown()


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _stage(name: str):
    """Re-raise anything escaping a stage as a PipelineError naming it."""

    class _Guard:
        def __enter__(self):
            logger.info("stage %s", name)

        def __exit__(self, kind, exc, tb):
            if exc is not None and not isinstance(exc, PipelineError):
                raise PipelineError(name, f"{kind.__name__}: {exc}") from exc
            return False

    return _Guard()


# ------------------------------------------------------------------ stages

def _load_recordings(config: PipelineConfig, pool: _Pool, skipped: list[str]):
    path = config.dataset_dir / CATALOG_NAME
    with _stage("catalog"):
        if not path.is_file():
            raise PipelineError("catalog", f"no catalog at {path}; run `eegspect catalog` first")
        catalog = load_catalog(path)
        entries = catalog.with_seizures()
        if not entries:
            raise PipelineError("catalog", "catalog lists no recordings with seizures")

    def load(entry):
        try:
            recording = select_channels(load_recording(catalog, entry))
        except (OSError, EdfError, KeyError) as exc:
            return entry, None, str(exc)
        return entry, recording, _sha256_file(Path(catalog.root) / entry.path)

    with _stage("load"):
        loaded = []
        for entry, recording, info in pool.map(load, entries):
            if recording is None:
                logger.warning("skipped %s: %s", entry.source_id, info)
                skipped.append(entry.source_id)
            else:
                loaded.append((recording, info))
        if not loaded:
            raise PipelineError("load", "no usable recordings")
    return loaded


def _segment(config, loaded, window_s: int, out: Path, pool: _Pool, warnings: list[str]):
    spec = WindowSpec(window_s, config.step_s, config.nonseizure_ratio)

    def plan(item):
        recording, _ = item
        return plan_segments(recording.annotations, recording.duration, spec, recording.source_id)

    plans = pool.map(plan, loaded)
    for p in plans:
        if p.shortfall:
            message = f"{p.source_id} at {window_s} s: not enough nonseizure room"
            logger.warning(message)
            warnings.append(message)
    write_plans_csv(plans, out / f"plans_{window_s}s.csv")
    windows = []
    for (recording, _), p in zip(loaded, plans):
        windows.extend(extract_windows(recording, p, spec))
    return plans, windows


def _split(config, windows, window_s: int, out: Path):
    labels = np.array([w.label for w in windows])
    groups = [w.source_id for w in windows] if config.split.group_by_source else None
    folds = kfold(len(windows), labels, config.split.k, config.split.seed, groups)
    (out / f"folds_{window_s}s.json").write_text(folds.to_json(), encoding="utf-8")
    if len(windows) >= 10:
        holdout = holdout_split(len(windows), labels, config.split.seed)
        (out / f"holdout_{window_s}s.json").write_text(holdout.to_json(), encoding="utf-8")
    return labels, folds


def _features(config, kind, windows, plans, digests, window_s: int, cache_dir: Path, pool: _Pool):
    dtype = np.dtype(config.feature_dtype)
    key = hashlib.sha256(json.dumps({
        "kind": kind.value, "window_s": window_s, "step_s": config.step_s,
        "ratio": config.nonseizure_ratio, "dtype": dtype.name, "spectral": asdict(config.spectral),
        "plans": [(p.source_id, p.windows) for p in plans], "recordings": digests,
    }, sort_keys=True).encode()).hexdigest()[:32]
    cached = cache_dir / f"{kind.value}_{window_s}s_{key}.eegt"
    if config.cache and cached.is_file():
        logger.info("cache hit %s", cached.name)
        return np.stack([t.array for t in read_dataset(cached)]).astype(dtype, copy=False)

    chunks = [windows[i:i + 32] for i in range(0, len(windows), 32)]
    parts = pool.map(lambda c: build_features(c, kind, config.spectral, dtype=dtype), chunks)
    X = np.concatenate(parts)
    if config.cache:
        cache_dir.mkdir(parents=True, exist_ok=True)
        tmp = cached.with_suffix(".tmp")
        write_dataset(tmp, (FeatureTensor(kind, X.shape[1:], x.astype(np.float64).reshape(-1), w.label,
                                          {"source_id": w.source_id, "start_s": w.start_s,
                                           "window_s": w.window_s})
                            for x, w in zip(X, windows)))
        tmp.replace(cached)
    return X


def _fold_result(X, labels, folds, train_config, i: int):
    tr, te = folds.train_test(i)
    stats = fit_minmax(X[tr])
    model = train(apply_minmax(X[tr], stats), labels[tr], train_config)
    scores = np.atleast_1d(predict_proba(model, apply_minmax(X[te], stats)))
    y = labels[te]
    report = metrics(confusion(y, (scores >= THRESHOLD).astype(np.int64)))
    auc = roc(scores, y).auc if 0 < y.sum() < y.size else math.nan
    return te, scores, report, auc


def _band_rows(config, X, windows, window_s: int, fs: float):
    # X is the raw multitaper PSD (n, channels, bins); average over channels
    n_bins = X.shape[-1]
    n = 2 * n_bins
    freqs = np.arange(n_bins) * fs / n
    rows = []
    usable = [b for b in config.bands if b.lo < freqs[-1]]
    for x, w in zip(X, windows):
        spectrum = Spectrum(freqs, np.asarray(x, dtype=np.float64).mean(axis=0), fs / n)
        rows.append([window_s, w.source_id, w.start_s, w.label,
                     *(repr(float(band_power(spectrum, b))) for b in usable)])
    return [b.name for b in usable], rows


# -------------------------------------------------------------------- main

def run_pipeline(config: PipelineConfig, jobs: int | None = None) -> RunResult:
    """Run the full experiment described by ``config``; returns output digests."""
    pool = _Pool(resolve_jobs(jobs))
    out = config.output_dir
    try:
        out.mkdir(parents=True, exist_ok=True)
        for sub in ("roc", "stats", "splits"):
            (out / sub).mkdir(exist_ok=True)
            for old in (out / sub).iterdir():
                if old.is_file():
                    old.unlink()
        (out / "band_power.csv").unlink(missing_ok=True)
        warnings: list[str] = []
        skipped: list[str] = []
        loaded = _load_recordings(config, pool, skipped)
        digests = {r.source_id: d for r, d in loaded}
        fs = loaded[0][0].fs
        if any(r.fs != fs for r, _ in loaded):
            raise PipelineError("load", "recordings differ in sampling rate")

        train_configs = config.train_configs()
        metric_rows, rank_entries, rank_keys = [], {}, {}
        accuracy: dict[tuple, list[float]] = {}
        band_tables = []
        for window_s in config.windows:
            with _stage("segment"):
                plans, windows = _segment(config, loaded, window_s, out / "splits", pool, warnings)
            with _stage("split"):
                labels, folds = _split(config, windows, window_s, out / "splits")
            for kind in config.representations:
                with _stage("featurize"):
                    X = _features(config, kind, windows, plans, digests, window_s,
                                  out / "cache", pool)
                    dims = expected_dims(kind, window_s, fs, config.spectral, X.shape[1])
                    if X.shape[1:] != dims:
                        raise PipelineError("featurize", f"{kind.value} shape {X.shape[1:]} != {dims}")
                    if kind is RepresentationKind.MULTITAPER_PSD and config.bands:
                        band_tables.append(_band_rows(config, X, windows, window_s, fs))
                for arch, train_config in train_configs.items():
                    with _stage("train"):
                        results = pool.map(lambda i: _fold_result(X, labels, folds, train_config, i),
                                           range(folds.k))
                    with _stage("evaluate"):
                        pooled = np.empty(len(windows))
                        for i, (te, scores, report, auc) in enumerate(results):
                            pooled[te] = scores
                            metric_rows.append((arch, kind.value, window_s, i, report))
                        # zero padding makes AUC ties fall back to numeric window order
                        key = f"{arch}/{kind.value}/{window_s:06d}"
                        rank_entries[key] = [r[3] for r in results]
                        rank_keys[key] = (arch, kind.value, window_s)
                        accuracy[(arch, kind.value, window_s)] = [r[2].accuracy for r in results]
                        write_roc_csv(out / "roc" / f"{arch}_{kind.value}_{window_s}s.csv",
                                      roc(pooled, labels))
                del X

        with _stage("evaluate"):
            write_metrics_csv(out / "metrics.csv", metric_rows)
            ranking = rank_models(rank_entries, "auc")
            write_ranking_csv(out / "ranking.csv",
                              [(r.rank, *rank_keys[r.name], r.mean) for r in ranking])
            if band_tables:
                _write_band_csv(out / "band_power.csv", band_tables)

        with _stage("stats"):
            report = run_battery(accuracy)
            (out / "stats.json").write_text(report.to_json(), encoding="utf-8")
            for i, entry in enumerate(report.entries):
                label = "_".join(str(v) for k, v in entry.grouping.items() if k != "factor")
                write_pairwise_csv(out / "stats" / f"{i:03d}_{entry.test}_{entry.grouping['factor']}_{label}.csv",
                                   entry.pairwise)

        with _stage("report"):
            files = _write_manifest(config, out)
        return RunResult(out, files, skipped, warnings, accuracy)
    finally:
        pool.close()


def _write_band_csv(path: Path, tables) -> None:
    names = tables[0][0]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["window_s", "source_id", "start_s", "label", *names])
        for table_names, rows in tables:
            if table_names != names:
                raise ValueError("band set changed between window sizes")
            writer.writerows(rows)


def _write_manifest(config: PipelineConfig, out: Path) -> dict[str, str]:
    files = {}
    for path in sorted(out.rglob("*")):
        rel = path.relative_to(out).as_posix()
        if path.is_file() and not rel.startswith("cache/") and rel != "manifest.json":
            files[rel] = _sha256_file(path)
    manifest = {
        "config_sha256": config.digest(),
        "versions": {"eegspect": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "outputs": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    return files
