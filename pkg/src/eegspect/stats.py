"""Rank-based hypothesis tests and the window/representation/architecture battery.

Unpaired groups: Kruskal-Wallis with Dunn's pairwise z-tests.
Paired blocks (folds): Friedman with Nemenyi's studentized-range comparisons.
Ties always get midranks and the usual tie corrections.
"""
from __future__ import annotations

import csv
import itertools
import json
import math
import re
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.stats import rankdata

from .distributions import chi2_sf, norm_sf, studentized_range_sf

__all__ = [
    "ALPHA",
    "TestResult",
    "PairwiseMatrix",
    "kruskal_wallis",
    "dunn",
    "friedman",
    "nemenyi",
    "adjust_pvalues",
    "BatteryEntry",
    "BatteryReport",
    "run_battery",
    "write_pairwise_csv",
]

ALPHA = 0.05


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    name: str
    statistic: float
    p_value: float
    df: int
    n: int
    k: int
    degenerate: bool = False

    def significant(self, alpha: float = ALPHA) -> bool:
        return self.p_value < alpha


@dataclass(frozen=True, eq=False)
class PairwiseMatrix:
    """Symmetric matrix of (adjusted) p-values; the diagonal holds 1."""

    groups: tuple[str, ...]
    p_adjusted: np.ndarray
    p_raw: np.ndarray
    statistic: np.ndarray  # |z| for Dunn, q for Nemenyi
    method: str

    def pairs(self, alpha: float = ALPHA) -> list[dict]:
        out = []
        for i, j in itertools.combinations(range(len(self.groups)), 2):
            p = float(self.p_adjusted[i, j])
            out.append({"a": self.groups[i], "b": self.groups[j], "p_adj": p,
                        "significant": p < alpha})
        return out

    def p(self, a: str, b: str) -> float:
        return float(self.p_adjusted[self.groups.index(a), self.groups.index(b)])


def _as_groups(groups) -> list[np.ndarray]:
    groups = [np.asarray(g, dtype=np.float64).ravel() for g in groups]
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    if any(g.size == 0 for g in groups):
        raise ValueError("every group must be non-empty")
    if sum(g.size for g in groups) < 3:
        raise ValueError("need at least three observations in total")
    if any(not np.all(np.isfinite(g)) for g in groups):
        raise ValueError("observations must be finite")
    return groups


def _tie_sum(values: np.ndarray) -> float:
    _, counts = np.unique(values, return_counts=True)
    counts = counts.astype(np.float64)
    return float(np.sum(counts**3 - counts))


def _group_names(groups, names) -> tuple[str, ...]:
    if names is None:
        return tuple(str(i) for i in range(len(groups)))
    if len(names) != len(groups):
        raise ValueError("one name per group required")
    return tuple(str(n) for n in names)


def kruskal_wallis(groups) -> TestResult:
    """Kruskal-Wallis H with tie correction; p from chi-square(k-1).

    When every observation is tied the statistic is undefined; ``H = 0`` and
    ``p = 1`` are returned with ``degenerate=True``.
    """
    groups = _as_groups(groups)
    pooled = np.concatenate(groups)
    n, k = pooled.size, len(groups)
    ranks = rankdata(pooled)
    bounds = np.cumsum([0] + [g.size for g in groups])
    rank_sums = np.array([ranks[lo:hi].sum() for lo, hi in zip(bounds[:-1], bounds[1:])])
    sizes = np.diff(bounds)
    correction = 1.0 - _tie_sum(pooled) / (n**3 - n)
    if correction <= 0:
        return TestResult("kruskal_wallis", 0.0, 1.0, k - 1, n, k, degenerate=True)
    h = (12.0 / (n * (n + 1)) * np.sum(rank_sums**2 / sizes) - 3.0 * (n + 1)) / correction
    h = max(float(h), 0.0)
    return TestResult("kruskal_wallis", h, chi2_sf(h, k - 1), k - 1, n, k)


def adjust_pvalues(p: np.ndarray, method: str = "bonferroni") -> np.ndarray:
    """Family-wise adjustment of a flat array of p-values, capped at 1."""
    p = np.asarray(p, dtype=np.float64)
    m = p.size
    if method == "none" or m == 0:
        return p.copy()
    if method == "bonferroni":
        return np.minimum(1.0, p * m)
    if method == "holm":
        order = np.argsort(p, kind="mergesort")
        stepped = np.maximum.accumulate(p[order] * (m - np.arange(m)))
        out = np.empty(m)
        out[order] = np.minimum(1.0, stepped)
        return out
    raise ValueError(f"unknown adjustment {method!r}")


def _pairwise(stat: np.ndarray, raw: np.ndarray, names, method: str, adjustment: str) -> PairwiseMatrix:
    k = len(names)
    iu = np.triu_indices(k, 1)
    adjusted = np.ones((k, k))
    adjusted[iu] = adjust_pvalues(raw[iu], adjustment)
    adjusted = np.triu(adjusted, 1) + np.triu(adjusted, 1).T + np.eye(k)
    raw = np.triu(raw, 1) + np.triu(raw, 1).T + np.eye(k)
    return PairwiseMatrix(tuple(names), adjusted, raw, stat, method)


def dunn(groups, adjustment: str = "bonferroni", names=None) -> PairwiseMatrix:
    """Dunn's post-hoc z-tests on pooled midranks, two-sided.

    ``z = (mean_rank_i - mean_rank_j) / sqrt(s2 * (1/n_i + 1/n_j))`` with
    ``s2 = n(n+1)/12 - sum(t^3 - t) / (12 (n - 1))``.
    """
    groups = _as_groups(groups)
    names = _group_names(groups, names)
    pooled = np.concatenate(groups)
    n, k = pooled.size, len(groups)
    ranks = rankdata(pooled)
    bounds = np.cumsum([0] + [g.size for g in groups])
    mean_ranks = np.array([ranks[lo:hi].mean() for lo, hi in zip(bounds[:-1], bounds[1:])])
    sizes = np.diff(bounds).astype(np.float64)
    s2 = n * (n + 1) / 12.0 - _tie_sum(pooled) / (12.0 * (n - 1))

    z = np.zeros((k, k))
    raw = np.ones((k, k))
    for i, j in itertools.combinations(range(k), 2):
        se2 = s2 * (1.0 / sizes[i] + 1.0 / sizes[j])
        if se2 > 0:
            z[i, j] = z[j, i] = abs(mean_ranks[i] - mean_ranks[j]) / math.sqrt(se2)
            raw[i, j] = raw[j, i] = min(1.0, 2.0 * norm_sf(z[i, j]))
    return _pairwise(z, raw, names, f"dunn-{adjustment}", adjustment)


def _blocks(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("expected a blocks x treatments matrix")
    b, k = m.shape
    if k < 2:
        raise ValueError("need at least two treatments")
    if b < 2:
        raise ValueError("need at least two blocks")
    if not np.all(np.isfinite(m)):
        raise ValueError("missing or non-finite cells")
    return m


def friedman(matrix) -> TestResult:
    """Friedman chi-square over within-block midranks, tie corrected."""
    m = _blocks(matrix)
    b, k = m.shape
    ranks = np.apply_along_axis(rankdata, 1, m)
    mean_ranks = ranks.mean(axis=0)
    stat = 12.0 * b / (k * (k + 1)) * np.sum((mean_ranks - (k + 1) / 2.0) ** 2)
    correction = 1.0 - sum(_tie_sum(row) for row in m) / (b * k * (k * k - 1))
    if correction <= 0:
        return TestResult("friedman", 0.0, 1.0, k - 1, b, k, degenerate=True)
    stat = max(float(stat / correction), 0.0)
    return TestResult("friedman", stat, chi2_sf(stat, k - 1), k - 1, b, k)


def nemenyi(matrix, names=None) -> PairwiseMatrix:
    """Nemenyi comparisons of mean within-block ranks.

    ``q = |R_i - R_j| / sqrt(k (k + 1) / (6 b))`` and ``p`` is the
    infinite-df studentized-range tail at ``q * sqrt(2)``.
    """
    m = _blocks(matrix)
    b, k = m.shape
    names = _group_names(range(k), names)
    mean_ranks = np.apply_along_axis(rankdata, 1, m).mean(axis=0)
    scale = math.sqrt(k * (k + 1) / (6.0 * b))
    q = np.abs(mean_ranks[:, None] - mean_ranks[None, :]) / scale
    raw = np.ones((k, k))
    for i, j in itertools.combinations(range(k), 2):
        raw[i, j] = raw[j, i] = studentized_range_sf(q[i, j] * math.sqrt(2.0), k)
    return _pairwise(q, raw, names, "nemenyi", "none")


# ----------------------------------------------------------------- battery

@dataclass
class BatteryEntry:
    test: str
    grouping: dict
    result: TestResult
    pairwise: PairwiseMatrix | None
    alpha: float = ALPHA

    def to_dict(self) -> dict:
        return {
            "test": self.test,
            "grouping": self.grouping,
            "statistic": self.result.statistic,
            "p": self.result.p_value,
            "significant": self.result.significant(self.alpha),
            "degenerate": self.result.degenerate,
            "posthoc": self.pairwise.method if self.pairwise else None,
            "pairwise": self.pairwise.pairs(self.alpha) if self.pairwise else [],
        }


@dataclass
class BatteryReport:
    entries: list[BatteryEntry] = field(default_factory=list)
    alpha: float = ALPHA

    def by_test(self, test: str) -> list[BatteryEntry]:
        return [e for e in self.entries if e.test == test]

    def to_json(self) -> str:
        return json.dumps({"alpha": self.alpha, "tests": [e.to_dict() for e in self.entries]},
                          indent=2) + "\n"


def _natural(value):
    parts = re.split(r"(\d+(?:\.\d+)?)", str(value))
    return [float(p) if i % 2 else p for i, p in enumerate(parts)]


def run_battery(table: Mapping[tuple, Sequence[float]], alpha: float = ALPHA,
                adjustment: str = "bonferroni") -> BatteryReport:
    """Run every grouping of a per-fold accuracy table.

    ``table`` maps ``(architecture, representation, window)`` to the list of
    per-fold accuracies. For each architecture and representation the window
    sizes are compared (Kruskal-Wallis + Dunn); for each architecture and
    window the representations are compared (Kruskal-Wallis + Dunn); for each
    representation and window the architectures are compared fold by fold
    (Friedman + Nemenyi). Groupings with a single level are skipped.
    """
    if not table:
        raise ValueError("empty accuracy table")
    archs = sorted({k[0] for k in table}, key=_natural)
    reps = sorted({k[1] for k in table}, key=_natural)
    windows = sorted({k[2] for k in table}, key=_natural)
    missing = [(a, r, w) for a in archs for r in reps for w in windows if (a, r, w) not in table]
    if missing:
        raise ValueError(f"incomplete accuracy table, missing {missing[:5]}"
                         f"{' ...' if len(missing) > 5 else ''}")

    report = BatteryReport(alpha=alpha)
    if len(windows) > 1:
        for a in archs:
            for r in reps:
                groups = [table[(a, r, w)] for w in windows]
                report.entries.append(BatteryEntry(
                    "kruskal_wallis", {"factor": "window", "architecture": a, "representation": r},
                    kruskal_wallis(groups), dunn(groups, adjustment, [str(w) for w in windows]), alpha))
    if len(reps) > 1:
        for a in archs:
            for w in windows:
                groups = [table[(a, r, w)] for r in reps]
                report.entries.append(BatteryEntry(
                    "kruskal_wallis", {"factor": "representation", "architecture": a, "window": w},
                    kruskal_wallis(groups), dunn(groups, adjustment, reps), alpha))
    if len(archs) > 1:
        for r in reps:
            for w in windows:
                columns = [np.asarray(table[(a, r, w)], dtype=np.float64) for a in archs]
                if len({c.size for c in columns}) != 1:
                    raise ValueError(f"unequal fold counts for {r}/{w}; Friedman needs paired blocks")
                block = np.column_stack(columns)
                report.entries.append(BatteryEntry(
                    "friedman", {"factor": "architecture", "representation": r, "window": w},
                    friedman(block), nemenyi(block, archs), alpha))
    return report


def write_pairwise_csv(path, matrix: PairwiseMatrix, digits: int = 6) -> None:
    """Square table with the group names as header row and first column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([""] + list(matrix.groups))
        for i, name in enumerate(matrix.groups):
            row = ["X" if i == j else f"{matrix.p_adjusted[i, j]:.{digits}f}"
                   for j in range(len(matrix.groups))]
            writer.writerow([name] + row)
