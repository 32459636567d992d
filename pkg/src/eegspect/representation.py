"""Feature representations of labelled windows and min-max normalisation."""
from __future__ import annotations

import csv
import enum
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Iterable

import numpy as np

from .spectral import MULTITAPER_MODES, dpss, multitaper_psd, multitaper_spectrogram, welch_psd
from .windowing import LabeledWindow

__all__ = [
    "RepresentationKind",
    "SpectralConfig",
    "FeatureTensor",
    "NormalizationStats",
    "expected_dims",
    "build_representation",
    "build_features",
    "fit_minmax",
    "apply_minmax",
    "write_tensor",
    "read_tensor",
    "write_dataset",
    "read_dataset",
    "write_manifest_csv",
]


class RepresentationKind(enum.Enum):
    TIME = "time"
    WELCH_PSD = "welch_psd"
    MULTITAPER_PSD = "multitaper_psd"
    MULTITAPER_SPECTROGRAM = "multitaper_spectrogram"

    @property
    def code(self) -> int:
        return list(RepresentationKind).index(self)

    @classmethod
    def from_code(cls, code: int) -> "RepresentationKind":
        return list(cls)[code]

    @classmethod
    def parse(cls, value) -> "RepresentationKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"psd_welch": "welch_psd", "psd_multitaper": "multitaper_psd",
                   "spectrogram": "multitaper_spectrogram"}
        return cls(aliases.get(key, key))


@dataclass(frozen=True)
class SpectralConfig:
    """Spectral parameters for the frequency and time-frequency representations.

    ``spectrogram_w_s`` is the sliding taper length in seconds (0.25 s gives
    64 samples and 4 Hz bins at 256 Hz).
    """

    nw: float = 4.0
    q: int = 7
    multitaper_mode: str = "paper-coherent"
    welch_seg_frac: float = 0.5
    welch_overlap: float = 0.5
    welch_window: str = "hamming"
    spectrogram_w_s: float = 0.25
    spectrogram_hop: int = 1
    spectrogram_f_hi: float = 60.0

    def __post_init__(self):
        if self.multitaper_mode not in MULTITAPER_MODES:
            raise ValueError(f"multitaper_mode must be one of {MULTITAPER_MODES}")
        if not 0 < self.welch_seg_frac <= 1:
            raise ValueError("welch_seg_frac must lie in (0, 1]")
        if self.spectrogram_hop < 1:
            raise ValueError("spectrogram_hop must be >= 1")

    def spectrogram_len(self, fs: float) -> int:
        return max(int(round(self.spectrogram_w_s * fs)), 1)


@dataclass(frozen=True, eq=False)
class FeatureTensor:
    kind: RepresentationKind
    dims: tuple[int, ...]
    data: np.ndarray  # flat, row-major
    label: int
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(np.prod(self.dims)) != self.data.size:
            raise ValueError(f"dims {self.dims} do not match {self.data.size} values")

    @property
    def array(self) -> np.ndarray:
        return self.data.reshape(self.dims)


@dataclass(frozen=True, eq=False)
class NormalizationStats:
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        if self.min.shape != self.max.shape:
            raise ValueError("min and max shapes differ")
        if np.any(self.max < self.min):
            raise ValueError("max must be >= min elementwise")


def expected_dims(kind, window_s: int, fs: float, config: SpectralConfig = SpectralConfig(),
                  channels: int = 18) -> tuple[int, ...]:
    """Shape contract of a representation for one window."""
    kind = RepresentationKind.parse(kind)
    n = int(round(window_s * fs))
    if kind is RepresentationKind.TIME:
        return (channels, n)
    if kind in (RepresentationKind.WELCH_PSD, RepresentationKind.MULTITAPER_PSD):
        return (channels, n // 2)
    w = config.spectrogram_len(fs)
    bins = min(int(np.floor(config.spectrogram_f_hi * w / fs + 1e-9)), w // 2) + 1
    return (channels, bins, -(-n // config.spectrogram_hop))


def _features(batch: np.ndarray, kind: RepresentationKind, fs: float,
              config: SpectralConfig) -> np.ndarray:
    n = batch.shape[-1]
    if kind is RepresentationKind.TIME:
        return batch.astype(np.float64, copy=True)
    if kind is RepresentationKind.WELCH_PSD:
        seg = max(int(round(config.welch_seg_frac * n)), 1)
        return welch_psd(batch, fs, seg_len=seg, overlap_frac=config.welch_overlap,
                         window_kind=config.welch_window, fft_len=n).values
    if kind is RepresentationKind.MULTITAPER_PSD:
        return multitaper_psd(batch, dpss(n, config.nw, config.q), config.multitaper_mode, fs).values
    w = config.spectrogram_len(fs)
    bank = dpss(w, config.nw, config.q)
    return multitaper_spectrogram(batch, fs, bank, hop=config.spectrogram_hop,
                                  f_hi=config.spectrogram_f_hi, mode=config.multitaper_mode).values


def _window_fs(window: LabeledWindow) -> float:
    return window.data.shape[1] / window.window_s


def build_representation(window: LabeledWindow, kind, config: SpectralConfig = SpectralConfig(),
                         channels: int = 18) -> FeatureTensor:
    """Turn one labelled window into a feature tensor of the requested kind."""
    kind = RepresentationKind.parse(kind)
    if window.data.shape[0] != channels:
        raise ValueError(f"expected {channels} channels, got {window.data.shape[0]}")
    fs = _window_fs(window)
    if fs != int(fs):
        raise ValueError("window sample count is not window_s * integer fs")
    values = _features(window.data, kind, fs, config)
    dims = expected_dims(kind, window.window_s, fs, config, channels)
    if values.shape != dims:
        raise AssertionError(f"{kind.value} produced {values.shape}, contract says {dims}")
    return FeatureTensor(kind, dims, values.reshape(-1), window.label,
                         {"source_id": window.source_id, "start_s": window.start_s,
                          "window_s": window.window_s})


def build_features(windows: list[LabeledWindow], kind, config: SpectralConfig = SpectralConfig(),
                   chunk: int = 32, dtype=np.float64) -> np.ndarray:
    """Batched :func:`build_representation`; returns ``(n_windows, *dims)``."""
    kind = RepresentationKind.parse(kind)
    if not windows:
        return np.empty((0,))
    fs = _window_fs(windows[0])
    dims = expected_dims(kind, windows[0].window_s, fs, config, windows[0].data.shape[0])
    out = np.empty((len(windows),) + dims, dtype=dtype)
    for lo in range(0, len(windows), chunk):
        batch = np.stack([w.data for w in windows[lo:lo + chunk]])
        out[lo:lo + len(batch)] = _features(batch, kind, fs, config)
    return out


def _as_array(tensors) -> np.ndarray:
    if isinstance(tensors, np.ndarray):
        return tensors
    tensors = list(tensors)
    if not tensors:
        raise ValueError("cannot fit normalisation on an empty set")
    kinds = {t.kind for t in tensors}
    shapes = {t.dims for t in tensors}
    if len(kinds) > 1 or len(shapes) > 1:
        raise ValueError("all tensors must share kind and dims")
    return np.stack([t.array for t in tensors])


def fit_minmax(tensors) -> NormalizationStats:
    """Elementwise min/max over a training set (tensors or a stacked array)."""
    arr = _as_array(tensors)
    if arr.shape[0] == 0:
        raise ValueError("cannot fit normalisation on an empty set")
    return NormalizationStats(arr.min(axis=0), arr.max(axis=0))


def apply_minmax(x, stats: NormalizationStats):
    """Scale into [0, 1] with fitted stats; constant features map to 0.

    Accepts a :class:`FeatureTensor`, a single array or a stacked batch.
    """
    if isinstance(x, FeatureTensor):
        scaled = apply_minmax(x.array, stats)
        return FeatureTensor(x.kind, x.dims, scaled.reshape(-1), x.label, dict(x.provenance))
    x = np.asarray(x, dtype=np.float64)
    if x.ndim < stats.min.ndim or x.shape[x.ndim - stats.min.ndim:] != stats.min.shape:
        raise ValueError(f"shape {x.shape} does not match stats {stats.min.shape}")
    span = stats.max - stats.min
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (x - stats.min) / safe, 0.0)
    return np.clip(out, 0.0, 1.0)


# ------------------------------------------------------------ tensor files

MAGIC = b"EEGT"
FORMAT_VERSION = 1


def write_tensor(fh: BinaryIO, tensor: FeatureTensor) -> None:
    prov = json.dumps(tensor.provenance, sort_keys=True, separators=(",", ":")).encode("utf-8")
    fh.write(MAGIC)
    fh.write(struct.pack("<HBB", FORMAT_VERSION, tensor.kind.code, len(tensor.dims)))
    fh.write(struct.pack(f"<{len(tensor.dims)}I", *tensor.dims))
    fh.write(struct.pack("<BI", tensor.label, len(prov)))
    fh.write(prov)
    fh.write(np.ascontiguousarray(tensor.data, dtype="<f8").tobytes())


def _read_exact(fh: BinaryIO, n: int) -> bytes:
    raw = fh.read(n)
    if len(raw) != n:
        raise ValueError("truncated tensor file")
    return raw


def read_tensor(fh: BinaryIO) -> FeatureTensor:
    if _read_exact(fh, 4) != MAGIC:
        raise ValueError("not an EEGT tensor record")
    version, code, rank = struct.unpack("<HBB", _read_exact(fh, 4))
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported tensor format version {version}")
    dims = struct.unpack(f"<{rank}I", _read_exact(fh, 4 * rank))
    label, plen = struct.unpack("<BI", _read_exact(fh, 5))
    prov = json.loads(_read_exact(fh, plen).decode("utf-8"))
    count = int(np.prod(dims))
    data = np.frombuffer(_read_exact(fh, 8 * count), dtype="<f8").astype(np.float64)
    return FeatureTensor(RepresentationKind.from_code(code), tuple(dims), data, label, prov)


def write_dataset(path, tensors: Iterable[FeatureTensor]) -> None:
    tensors = list(tensors)
    with open(path, "wb") as fh:
        fh.write(struct.pack("<Q", len(tensors)))
        for t in tensors:
            write_tensor(fh, t)


def read_dataset(path) -> list[FeatureTensor]:
    with open(path, "rb") as fh:
        (count,) = struct.unpack("<Q", _read_exact(fh, 8))
        return [read_tensor(fh) for _ in range(count)]


def write_manifest_csv(path, tensors: Iterable[FeatureTensor]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "source_id", "start_s", "window_s", "label", "kind", "dims"])
        for i, t in enumerate(tensors):
            p = t.provenance
            writer.writerow([i, p.get("source_id", ""), p.get("start_s", ""), p.get("window_s", ""),
                             "seizure" if t.label == 1 else "nonseizure", t.kind.value,
                             "x".join(str(d) for d in t.dims)])
