"""Seizure-centred sliding-window segmentation."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .edf import Recording, SeizureAnnotation

__all__ = [
    "SEIZURE",
    "NONSEIZURE",
    "WindowSpec",
    "LabeledWindow",
    "SegmentationPlan",
    "plan_segments",
    "tile_region",
    "extract_windows",
    "write_plans_csv",
    "read_plans_csv",
]

SEIZURE = 1
NONSEIZURE = 0
MAX_RECOMMENDED_WINDOW_S = 10


@dataclass(frozen=True)
class WindowSpec:
    window_s: int
    step_s: int = 1
    nonseizure_ratio: float = 0.5

    def __post_init__(self):
        if int(self.window_s) != self.window_s or self.window_s < 1:
            raise ValueError(f"window_s must be a positive integer, got {self.window_s}")
        if int(self.step_s) != self.step_s or self.step_s < 1:
            raise ValueError(f"step_s must be a positive integer, got {self.step_s}")
        if self.step_s > self.window_s:
            raise ValueError("step_s may not exceed window_s")
        if self.nonseizure_ratio < 0:
            raise ValueError("nonseizure_ratio must be nonnegative")
        if self.window_s > MAX_RECOMMENDED_WINDOW_S:
            warnings.warn(f"window_s={self.window_s} exceeds {MAX_RECOMMENDED_WINDOW_S} s; "
                          "windows will swallow whole seizures", stacklevel=2)

    @property
    def overlap_s(self) -> int:
        return self.window_s - self.step_s


@dataclass(frozen=True, eq=False)
class LabeledWindow:
    data: np.ndarray  # (channels, window_s * fs), read-only view
    label: int
    source_id: str
    start_s: int
    window_s: int


@dataclass
class SegmentationPlan:
    source_id: str
    window_s: int
    windows: list[tuple[int, int]] = field(default_factory=list)  # (start_s, label)
    shortfall: bool = False

    def __len__(self):
        return len(self.windows)

    @property
    def starts(self) -> np.ndarray:
        return np.array([s for s, _ in self.windows], dtype=np.int64)

    @property
    def labels(self) -> np.ndarray:
        return np.array([lab for _, lab in self.windows], dtype=np.int64)

    def count(self, label: int) -> int:
        return sum(1 for _, lab in self.windows if lab == label)


def _intersects(t: int, w: int, annotations) -> bool:
    return any(t < a.end and a.start < t + w for a in annotations)


def _check_annotations(annotations, duration_s: float):
    for prev, cur in zip(annotations, annotations[1:]):
        if cur.start < prev.end:
            raise ValueError("annotations must be sorted and non-overlapping")
    for a in annotations:
        if a.end > duration_s:
            raise ValueError(f"seizure [{a.start}, {a.end}) exceeds duration {duration_s} s")


def _flank(first: int, direction: int, step: int, w: int, last_start: int,
           annotations, used: set, limit: int) -> list[int]:
    out, t = [], first
    while 0 <= t <= last_start and len(out) < limit:
        if _intersects(t, w, annotations):
            break  # walked into a neighbouring seizure
        if t not in used:
            out.append(t)
        t += direction * step
    return out


def plan_segments(annotations, duration_s: float, spec: WindowSpec,
                  source_id: str = "") -> SegmentationPlan:
    """Plan seizure windows plus balancing nonseizure windows for one recording.

    Seizure windows start at each onset and advance by ``step_s`` while the
    window still overlaps the seizure, so the trailing edge window (partly
    seizure, partly not) is labelled seizure. For a seizure with ``K`` such
    windows, ``round(2 * nonseizure_ratio * K)`` nonseizure windows are taken
    from the two flanks, ``ceil`` of half before onset and the rest after
    offset, never touching any annotated seizure. When a flank runs out of
    room the other flank makes up the difference; if both run out the plan
    is flagged with ``shortfall``.
    """
    annotations = sorted(annotations, key=lambda a: a.start)
    w, step = int(spec.window_s), int(spec.step_s)
    if duration_s < w:
        raise ValueError(f"recording of {duration_s} s is shorter than one {w} s window")
    _check_annotations(annotations, duration_s)
    last_start = int(math.floor(duration_s - w))

    seizure_windows: list[int] = []
    per_seizure: list[tuple[SeizureAnnotation, int]] = []
    for a in annotations:
        starts = [t for t in range(a.start, a.end, step) if t <= last_start]
        if not starts and last_start + w > a.start:
            starts = [last_start]
        # closely spaced seizures can share a start; keep it once
        taken = set(seizure_windows)
        starts = [t for t in starts if t not in taken]
        seizure_windows.extend(starts)
        per_seizure.append((a, len(starts)))

    used = set(seizure_windows)
    nonseizure: list[int] = []
    shortfall = False
    for a, k in per_seizure:
        target = int(round(2 * spec.nonseizure_ratio * k))
        if target == 0:
            continue
        before = _flank(a.start - w, -1, step, w, last_start, annotations, used, target)
        after = _flank(a.end, +1, step, w, last_start, annotations, used, target)
        n_before = min(len(before), -(-target // 2))
        n_after = min(len(after), target - n_before)
        n_before = min(len(before), target - n_after)
        shortfall |= n_before + n_after < target
        chosen = before[:n_before] + after[:n_after]
        used.update(chosen)
        nonseizure.extend(chosen)

    windows = sorted([(t, SEIZURE) for t in seizure_windows] +
                     [(t, NONSEIZURE) for t in nonseizure])
    return SegmentationPlan(source_id, w, windows, shortfall)


def tile_region(start_s: int, end_s: int, spec: WindowSpec, annotations=(),
                source_id: str = "") -> SegmentationPlan:
    """Cover ``[start_s, end_s)`` with consecutive windows every ``step_s``.

    Windows overlapping any annotation are labelled seizure.
    """
    w, step = int(spec.window_s), int(spec.step_s)
    if end_s - start_s < w:
        raise ValueError("region shorter than one window")
    windows = [(t, SEIZURE if _intersects(t, w, annotations) else NONSEIZURE)
               for t in range(int(start_s), int(end_s) - w + 1, step)]
    return SegmentationPlan(source_id, w, windows)


def extract_windows(recording: Recording, plan: SegmentationPlan,
                    spec: WindowSpec | None = None) -> list[LabeledWindow]:
    """Slice each planned window out of ``recording`` (read-only views)."""
    w = int(spec.window_s if spec is not None else plan.window_s)
    fs = recording.fs
    width = int(round(w * fs))
    total = recording.samples.shape[1]
    out = []
    for start_s, label in plan.windows:
        lo = int(round(start_s * fs))
        if lo < 0 or lo + width > total:
            raise IndexError(f"window at {start_s} s falls outside {recording.source_id!r}")
        view = recording.samples[:, lo:lo + width]
        view.setflags(write=False)
        out.append(LabeledWindow(view, label, recording.source_id, start_s, w))
    return out


_PLAN_FIELDS = ["source_id", "start_s", "window_s", "label"]


def write_plans_csv(plans, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_PLAN_FIELDS)
        for plan in plans:
            for start_s, label in plan.windows:
                writer.writerow([plan.source_id, start_s, plan.window_s,
                                 "seizure" if label == SEIZURE else "nonseizure"])


def read_plans_csv(path) -> list[SegmentationPlan]:
    plans: dict[tuple[str, int], SegmentationPlan] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            key = (row["source_id"], int(row["window_s"]))
            plan = plans.setdefault(key, SegmentationPlan(key[0], key[1]))
            plan.windows.append((int(row["start_s"]),
                                 SEIZURE if row["label"] == "seizure" else NONSEIZURE))
    return list(plans.values())
