"""Confusion-matrix metrics, ROC/AUC and model ranking tables.

Metrics whose denominator is zero are reported as ``nan`` (undefined), never
as 0, so fold averages are not silently dragged down.
"""
from __future__ import annotations

import csv
import math
from dataclasses import astuple, dataclass, fields
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "ConfusionMatrix",
    "MetricsReport",
    "RocCurve",
    "RankRow",
    "METRIC_NAMES",
    "confusion",
    "metrics",
    "roc",
    "mean_std",
    "rank_models",
    "write_metrics_csv",
    "write_roc_csv",
    "write_ranking_csv",
]

METRIC_NAMES = ("accuracy", "precision", "sensitivity", "specificity", "f1", "auc")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    sensitivity: float
    specificity: float
    f1: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True, eq=False)
class RocCurve:
    fpr: np.ndarray
    tpr: np.ndarray
    thresholds: np.ndarray  # first entry is +inf
    auc: float

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.fpr.tolist(), self.tpr.tolist()))


def _binary(a, name: str) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all((a == 0) | (a == 1)):
        raise ValueError(f"{name} must be binary (0/1)")
    return a.astype(bool)


def confusion(labels, predictions) -> ConfusionMatrix:
    """Counts with seizure (1) as the positive class."""
    y = _binary(labels, "labels")
    p = _binary(predictions, "predictions")
    if y.shape != p.shape:
        raise ValueError("labels and predictions differ in length")
    if y.size == 0:
        raise ValueError("need at least one sample")
    return ConfusionMatrix(int(np.sum(y & p)), int(np.sum(~y & ~p)),
                           int(np.sum(~y & p)), int(np.sum(y & ~p)))


def _ratio(num, den) -> float:
    return num / den if den else math.nan


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    if cm.total < 1:
        raise ValueError("empty confusion matrix")
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    sensitivity = _ratio(cm.tp, cm.tp + cm.fn)
    if math.isnan(precision) or math.isnan(sensitivity):
        f1 = math.nan
    else:
        f1 = _ratio(2 * precision * sensitivity, precision + sensitivity)
    return MetricsReport(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=precision,
        sensitivity=sensitivity,
        specificity=_ratio(cm.tn, cm.tn + cm.fp),
        f1=f1,
    )


def roc(scores, labels) -> RocCurve:
    """ROC over the distinct score thresholds, highest first.

    Tied scores form one threshold step, so the trapezoidal area equals the
    Mann-Whitney probability ``P(s+ > s-) + P(s+ = s-) / 2``. The area is
    accumulated in integers and divided once.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = _binary(labels, "labels")
    if s.shape != y.shape:
        raise ValueError("scores and labels differ in length")
    pos, neg = int(y.sum()), int((~y).sum())
    if pos == 0 or neg == 0:
        raise ValueError("ROC needs both positive and negative labels")

    order = np.argsort(-s, kind="mergesort")
    s_sorted, y_sorted = s[order], y[order]
    last_of_run = np.r_[np.diff(s_sorted) != 0, True]
    tp = np.r_[0, np.cumsum(y_sorted)[last_of_run]].astype(np.int64)
    fp = np.r_[0, np.cumsum(~y_sorted)[last_of_run]].astype(np.int64)
    doubled_area = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    auc = doubled_area / (2 * pos * neg)
    thresholds = np.r_[np.inf, s_sorted[last_of_run]]
    return RocCurve(fp / neg, tp / pos, thresholds, auc)


def mean_std(values) -> tuple[float, float]:
    """Mean and sample standard deviation of the defined (non-nan) values."""
    v = np.asarray([x for x in values if not math.isnan(x)], dtype=np.float64)
    if v.size == 0:
        return math.nan, math.nan
    return float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0


@dataclass(frozen=True)
class RankRow:
    rank: int
    name: str
    mean: float
    std: float


def _metric_value(item, metric: str) -> float:
    if isinstance(item, MetricsReport):
        if metric == "auc":
            raise ValueError("MetricsReport carries no AUC; pass AUC values directly")
        return getattr(item, metric)
    if isinstance(item, Mapping):
        return float(item[metric])
    return float(item)


def rank_models(entries: Mapping[str, object], metric: str) -> list[RankRow]:
    """Order models by the mean of ``metric`` across their folds, best first.

    ``entries`` maps a model name to a MetricsReport, a mapping of metric
    values, a float, or a sequence of any of those (one per fold). Ties break
    by name; models whose metric is undefined everywhere go last.
    """
    if metric not in METRIC_NAMES:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRIC_NAMES}")
    if not entries:
        raise ValueError("nothing to rank")
    rows = []
    for name, item in entries.items():
        items = item if isinstance(item, (list, tuple)) else [item]
        mean, std = mean_std([_metric_value(i, metric) for i in items])
        rows.append((name, mean, std))
    rows.sort(key=lambda r: (math.isnan(r[1]), -r[1] if not math.isnan(r[1]) else 0.0, r[0]))
    return [RankRow(i + 1, name, mean, std) for i, (name, mean, std) in enumerate(rows)]


# ---------------------------------------------------------------- CSV files

METRICS_HEADER = ["model", "representation", "window_s", "fold",
                  "accuracy", "precision", "sensitivity", "specificity", "f1"]


def _fmt(x) -> str:
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def write_metrics_csv(path, rows: Iterable[tuple]) -> None:
    """Rows are ``(model, representation, window_s, fold, MetricsReport)``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(METRICS_HEADER)
        for model, rep, window_s, fold, report in rows:
            writer.writerow([model, rep, window_s, fold, *(_fmt(v) for v in astuple(report))])


def write_roc_csv(path, curve: RocCurve) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fpr", "tpr", "threshold"])
        for f, t, th in zip(curve.fpr, curve.tpr, curve.thresholds):
            writer.writerow([_fmt(float(f)), _fmt(float(t)), "inf" if np.isinf(th) else _fmt(float(th))])


def write_ranking_csv(path, rows: Iterable[tuple]) -> None:
    """Rows are ``(rank, model, signal_type, window_s, auc)``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["rank", "model", "signal_type", "window_size", "auc"])
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
