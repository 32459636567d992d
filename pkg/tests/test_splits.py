import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eegspect.splits import FoldPlan, SplitPlan, allocate, holdout_split, kfold


def _check_partition(parts, n):
    flat = [i for p in parts for i in p]
    assert sorted(flat) == list(range(n))


def test_holdout_sizes_for_1000():
    labels = np.arange(1000) % 2
    plan = holdout_split(1000, labels, seed=1)
    sizes = {k: len(v) for k, v in plan.parts().items()}
    assert sizes == {"tuning_fit": 160, "tuning_val": 40, "train": 512, "val": 128, "test": 160}
    _check_partition(plan.parts().values(), 1000)
    for part in plan.parts().values():
        assert abs(np.mean(labels[list(part)]) - 0.5) <= 1 / len(part)


def test_holdout_ten_samples():
    plan = holdout_split(10, np.arange(10) % 2)
    assert all(len(p) > 0 for p in plan.parts().values())
    _check_partition(plan.parts().values(), 10)


def test_holdout_determinism_and_json():
    labels = np.arange(50) % 2
    a, b = holdout_split(50, labels, 7), holdout_split(50, labels, 7)
    assert a == b
    assert SplitPlan.from_json(a.to_json()) == a
    assert a != holdout_split(50, labels, 8)


def test_holdout_errors():
    with pytest.raises(ValueError):
        holdout_split(9)
    with pytest.raises(ValueError):
        holdout_split(20, [1] + [0] * 19)


def test_kfold_even_and_remainder():
    assert [len(f) for f in kfold(100, k=10).folds] == [10] * 10
    assert sorted(len(f) for f in kfold(105, k=10).folds) == [10] * 5 + [11] * 5


def test_kfold_partition_and_train_test():
    plan = kfold(37, np.arange(37) % 3, k=5, seed=3)
    _check_partition(plan.folds, 37)
    train, test = plan.train_test(2)
    assert sorted(np.r_[train, test].tolist()) == list(range(37))
    assert FoldPlan.from_json(plan.to_json()) == plan


def test_kfold_errors():
    with pytest.raises(ValueError):
        kfold(5, k=6)
    with pytest.raises(ValueError):
        kfold(5, k=1)


def test_grouped_folds_keep_sources_together():
    groups = np.repeat(["a", "b", "c", "d", "e", "f"], [5, 9, 3, 7, 7, 4])
    plan = kfold(len(groups), k=3, seed=0, groups=groups)
    _check_partition(plan.folds, len(groups))
    for fold in plan.folds:
        for g in set(groups[list(fold)]):
            assert set(np.flatnonzero(groups == g)) <= set(fold)


def test_three_classes_stay_within_two_samples():
    labels = np.random.default_rng(1).integers(0, 3, 73)
    for fold in kfold(73, labels, 3, seed=1).folds:
        for c in range(3):
            assert abs(np.sum(labels[list(fold)] == c) - len(fold) * np.mean(labels == c)) < 2


def test_allocate_margins():
    counts = allocate([10, 10, 5], [13, 12])
    assert counts.sum(axis=1).tolist() == [10, 10, 5]
    assert counts.sum(axis=0).tolist() == [13, 12]


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 300), st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_kfold_properties(n, k, seed):
    classes = 2
    k = min(k, n)
    labels = np.random.default_rng(seed).integers(0, classes, n)
    plan = kfold(n, labels, k, seed)
    _check_partition(plan.folds, n)
    sizes = [len(f) for f in plan.folds]
    assert max(sizes) - min(sizes) <= 1
    for fold in plan.folds:
        for c in range(classes):
            assert abs(np.mean(labels[list(fold)] == c) - np.mean(labels == c)) <= 1 / len(fold) + 1e-12
    assert kfold(n, labels, k, seed) == plan


@settings(max_examples=60, deadline=None)
@given(st.integers(10, 400), st.integers(0, 2**32 - 1))
def test_holdout_properties(n, seed):
    labels = np.arange(n) % 2
    plan = holdout_split(n, labels, seed)
    _check_partition(plan.parts().values(), n)
    tuning = len(plan.tuning_fit) + len(plan.tuning_val)
    assert abs(tuning - 0.2 * n) <= 1 or n < 15
    for part in plan.parts().values():
        assert len(part) >= 1
        assert abs(np.mean(labels[list(part)]) - 0.5) <= 1 / len(part) + 1e-12
