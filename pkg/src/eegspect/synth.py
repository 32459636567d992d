"""Synthetic CHB-MIT-like corpus for desk-scale runs.

Background activity is independent pink (1/f) noise per channel. During a
seizure every channel gains a random-phase oscillation band-limited to the
theta range (3.5-7.5 Hz), which lifts theta power several-fold while leaving
the raw waveform without any fixed, phase-locked template.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import butter, lfilter, sosfiltfilt

from .edf import write_edf

__all__ = ["SYNTH_CHANNELS", "SynthSpec", "SynthRecording", "generate_corpus", "write_corpus"]

# CHB-MIT montage as stored in its EDF files (T8-P8 appears twice)
SYNTH_CHANNELS = (
    "FP1-F7", "F7-T7", "T7-P7", "P7-O1", "FP1-F3", "F3-C3", "C3-P3", "P3-O1",
    "FP2-F4", "F4-C4", "C4-P4", "P4-O2", "FP2-F8", "F8-T8", "T8-P8", "P8-O2",
    "FZ-CZ", "CZ-PZ", "P7-T7", "T7-FT9", "FT9-FT10", "FT10-T8", "T8-P8",
)

# Paul Kellet's economy pinking filter
_PINK_B = np.array([0.049922035, -0.095993537, 0.050612699, -0.004408786])
_PINK_A = np.array([1.0, -2.494956002, 2.017265875, -0.522189400])

_SEIZURE_DURATIONS = (45, 50, 55, 60, 60, 60, 60, 65, 70, 75)
_SEIZURES_PER_RECORDING = (2, 2, 2, 2, 1, 1)


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 0
    fs: int = 256
    duration_s: int = 420
    background_uv: float = 20.0
    theta_gain: float = 1.5  # theta std relative to background std
    ramp_s: float = 2.0


@dataclass(frozen=True, eq=False)
class SynthRecording:
    name: str
    samples: np.ndarray  # (channels, n) microvolts
    seizures: tuple[tuple[int, int], ...]


def _pink(rng: np.random.Generator, shape) -> np.ndarray:
    x = lfilter(_PINK_B, _PINK_A, rng.standard_normal(shape), axis=-1)
    return x / x.std(axis=-1, keepdims=True)


def _place(rng: np.random.Generator, durations, total: int) -> list[tuple[int, int]]:
    # keep >= 60 s clear on each outer side and >= 100 s between seizures
    if len(durations) == 1:
        start = int(rng.integers(120, total - durations[0] - 120))
        return [(start, start + durations[0])]
    d1, d2 = durations
    start1 = int(rng.integers(60, 90))
    gap = int(rng.integers(100, total - 60 - start1 - d1 - d2 + 1))
    start2 = start1 + d1 + gap
    return [(start1, start1 + d1), (start2, start2 + d2)]


def generate_corpus(spec: SynthSpec = SynthSpec()) -> list[SynthRecording]:
    """Six recordings holding ten seizures that total 600 s."""
    root = np.random.SeedSequence(spec.seed)
    order = np.random.default_rng(root.spawn(1)[0]).permutation(_SEIZURE_DURATIONS)
    theta_sos = butter(4, [3.5, 7.5], btype="bandpass", fs=spec.fs, output="sos")
    n = spec.duration_s * spec.fs
    recordings, used = [], 0
    for i, (count, child) in enumerate(zip(_SEIZURES_PER_RECORDING,
                                           root.spawn(len(_SEIZURES_PER_RECORDING) + 1)[1:])):
        rng = np.random.default_rng(child)
        durations = [int(d) for d in order[used:used + count]]
        used += count
        seizures = _place(rng, durations, spec.duration_s)

        samples = spec.background_uv * _pink(rng, (len(SYNTH_CHANNELS), n))
        theta = sosfiltfilt(theta_sos, rng.standard_normal((len(SYNTH_CHANNELS), n)), axis=-1)
        theta *= spec.theta_gain * spec.background_uv / theta.std(axis=-1, keepdims=True)
        envelope = np.zeros(n)
        t = np.arange(n) / spec.fs
        for start, end in seizures:
            rise = np.clip((t - start) / spec.ramp_s, 0, 1)
            fall = np.clip((end - t) / spec.ramp_s, 0, 1)
            envelope = np.maximum(envelope, np.minimum(rise, fall))
        samples += theta * envelope
        recordings.append(SynthRecording(f"syn{i + 1:02d}_01", samples, tuple(seizures)))
    return recordings


def _summary(recordings: list[SynthRecording], spec: SynthSpec) -> str:
    lines = [f"Data Sampling Rate: {spec.fs} Hz", "*" * 25, "",
             "Channels in EDF Files:", "*" * 22]
    lines += [f"Channel {i + 1}: {c}" for i, c in enumerate(SYNTH_CHANNELS)]
    lines.append("")
    end = spec.duration_s
    for rec in recordings:
        lines += [f"File Name: {rec.name}.edf", "File Start Time: 00:00:00",
                  f"File End Time: {end // 3600:02d}:{end // 60 % 60:02d}:{end % 60:02d}",
                  f"Number of Seizures in File: {len(rec.seizures)}"]
        for j, (start, stop) in enumerate(rec.seizures, 1):
            prefix = "Seizure" if len(rec.seizures) == 1 else f"Seizure {j}"
            lines += [f"{prefix} Start Time: {start} seconds", f"{prefix} End Time: {stop} seconds"]
        lines.append("")
    return "\n".join(lines)


def write_corpus(out_dir, spec: SynthSpec = SynthSpec()) -> list[Path]:
    """Write the corpus as EDF files plus ``synth-summary.txt``; returns paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    phys_min, phys_max = -3276.8, 3276.7
    recordings = generate_corpus(spec)
    paths = []
    for rec in recordings:
        digital = np.clip(np.round(rec.samples * 10.0), -32768, 32767).astype(np.int16)
        path = out_dir / f"{rec.name}.edf"
        write_edf(path, SYNTH_CHANNELS, digital, spec.fs, phys_min, phys_max,
                  patient="synthetic", recording=f"seed {spec.seed}")
        paths.append(path)
    summary = out_dir / "synth-summary.txt"
    summary.write_text(_summary(recordings, spec), encoding="utf-8")
    return paths + [summary]
