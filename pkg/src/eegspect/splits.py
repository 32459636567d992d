"""Deterministic, label-stratified dataset partitioning."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = ["SplitPlan", "FoldPlan", "holdout_split", "kfold", "allocate"]


@dataclass(frozen=True)
class SplitPlan:
    seed: int
    tuning_fit: tuple[int, ...]
    tuning_val: tuple[int, ...]
    train: tuple[int, ...]
    val: tuple[int, ...]
    test: tuple[int, ...]

    def parts(self) -> dict[str, tuple[int, ...]]:
        return {"tuning_fit": self.tuning_fit, "tuning_val": self.tuning_val,
                "train": self.train, "val": self.val, "test": self.test}

    def to_json(self) -> str:
        doc = {"seed": self.seed,
               "tuning": {"fit": list(self.tuning_fit), "val": list(self.tuning_val)},
               "train": list(self.train), "val": list(self.val), "test": list(self.test)}
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "SplitPlan":
        d = json.loads(text)
        return cls(d["seed"], tuple(d["tuning"]["fit"]), tuple(d["tuning"]["val"]),
                   tuple(d["train"]), tuple(d["val"]), tuple(d["test"]))


@dataclass(frozen=True)
class FoldPlan:
    seed: int
    folds: tuple[tuple[int, ...], ...]

    @property
    def k(self) -> int:
        return len(self.folds)

    def train_test(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.array(self.folds[i], dtype=np.int64)
        train = np.array(sorted(j for f, fold in enumerate(self.folds) if f != i for j in fold),
                         dtype=np.int64)
        return train, test

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "folds": [list(f) for f in self.folds]})

    @classmethod
    def from_json(cls, text: str) -> "FoldPlan":
        d = json.loads(text)
        return cls(d["seed"], tuple(tuple(f) for f in d["folds"]))


def _largest_remainder(targets: np.ndarray, total: int, caps: np.ndarray) -> np.ndarray:
    base = np.minimum(np.floor(targets).astype(np.int64), caps)
    short = total - base.sum()
    # stable: ties resolve to the earlier partition
    order = sorted(range(len(targets)), key=lambda j: (-(targets[j] - base[j]), j))
    while short > 0:
        progressed = False
        for j in order:
            if short == 0:
                break
            if base[j] < caps[j]:
                base[j] += 1
                short -= 1
                progressed = True
        if not progressed:
            raise ValueError("partition capacities cannot absorb the class")
    return base


def allocate(sizes, class_counts) -> np.ndarray:
    """Per-partition, per-class counts matching both margins.

    Each class is spread over the partitions in proportion to partition size
    (largest-remainder rounding under the capacity left by earlier classes),
    so partition ``j`` holds within one sample of ``size_j * p_c`` for the
    first class and the last class takes up exactly what remains.
    """
    sizes = np.asarray(sizes, dtype=np.int64)
    n = int(sizes.sum())
    counts = np.zeros((len(sizes), len(class_counts)), dtype=np.int64)
    remaining = sizes.copy()
    for c, nc in enumerate(class_counts):
        if c == len(class_counts) - 1:
            counts[:, c] = remaining
        else:
            counts[:, c] = _largest_remainder(sizes * nc / n, int(nc), remaining)
        remaining -= counts[:, c]
    return counts


def _stratified_parts(labels: np.ndarray, sizes, rng: np.random.Generator) -> list[list[int]]:
    classes, inverse = np.unique(labels, return_inverse=True)
    pools = [rng.permutation(np.flatnonzero(inverse == c)) for c in range(len(classes))]
    counts = allocate(sizes, [len(p) for p in pools])
    parts: list[list[int]] = [[] for _ in sizes]
    for c, pool in enumerate(pools):
        pos = 0
        for j in range(len(sizes)):
            parts[j].extend(int(i) for i in pool[pos:pos + counts[j, c]])
            pos += counts[j, c]
    return [sorted(p) for p in parts]


def _labels(n: int, labels) -> np.ndarray:
    if labels is None:
        return np.zeros(n, dtype=np.int64)
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise ValueError(f"expected {n} labels, got shape {labels.shape}")
    return labels


def holdout_split(n: int, labels=None, seed: int = 0) -> SplitPlan:
    """Tuning holdout plus train/val/test split.

    20 % of the indices go to hyperparameter tuning (split 80/20 into fit and
    validation); the other 80 % are split 64/16/20 into train, validation and
    test. Every part gets at least one index and all parts are stratified by
    label.
    """
    if n < 10:
        raise ValueError("holdout_split needs n >= 10")
    labels = _labels(n, labels)
    _, class_counts = np.unique(labels, return_counts=True)
    if class_counts.min() < 2:
        raise ValueError("each label class needs at least 2 samples (tuning and main strata)")

    tuning = min(max(int(round(0.2 * n)), 2), n - 3)
    fit = min(max(int(round(0.8 * tuning)), 1), tuning - 1)
    main = n - tuning
    test = min(max(int(round(0.2 * main)), 1), main - 2)
    train = min(max(int(round(0.64 * main)), 1), main - test - 1)
    sizes = [fit, tuning - fit, train, main - train - test, test]

    rng = np.random.default_rng(seed)
    parts = _stratified_parts(labels, sizes, rng)
    return SplitPlan(seed, *(tuple(p) for p in parts))


def _grouped_folds(groups: np.ndarray, k: int, rng: np.random.Generator) -> list[list[int]]:
    names, inverse = np.unique(groups, return_inverse=True)
    if len(names) < k:
        raise ValueError(f"{len(names)} groups cannot fill {k} folds")
    members = [np.flatnonzero(inverse == g) for g in range(len(names))]
    order = rng.permutation(len(names))
    order = sorted(order, key=lambda g: -len(members[g]))  # stable: keeps shuffled ties
    folds: list[list[int]] = [[] for _ in range(k)]
    for g in order:
        target = min(range(k), key=lambda f: (len(folds[f]), f))
        folds[target].extend(int(i) for i in members[g])
    return [sorted(f) for f in folds]


def kfold(n: int, labels=None, k: int = 10, seed: int = 0, groups=None) -> FoldPlan:
    """Stratified k-fold partition of ``range(n)``.

    Fold sizes differ by at most one. With ``groups`` every group (e.g. a
    source recording) lands in a single fold instead, and sizes are only
    balanced greedily.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    rng = np.random.default_rng(seed)
    if groups is not None:
        groups = np.asarray(groups)
        if groups.shape != (n,):
            raise ValueError("one group id per sample required")
        return FoldPlan(seed, tuple(tuple(f) for f in _grouped_folds(groups, k, rng)))
    labels = _labels(n, labels)
    sizes = [n // k + (1 if i < n % k else 0) for i in range(k)]
    folds = _stratified_parts(labels, sizes, rng)
    return FoldPlan(seed, tuple(tuple(f) for f in folds))
