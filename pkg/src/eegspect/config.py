"""Experiment configuration: TOML in, validated dataclasses out.

Every key has a default, so an empty file is a valid configuration. Unknown
keys are rejected at every level to catch typos early. Relative paths are
resolved against the directory holding the config file.
"""
from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .baseline import TrainConfig
from .representation import RepresentationKind, SpectralConfig
from .spectral import DEFAULT_BANDS, MULTITAPER_MODES, FrequencyBand

__all__ = [
    "ConfigError",
    "MultitaperSection",
    "WelchSection",
    "SpectrogramSection",
    "SplitSection",
    "BaselineSection",
    "Architecture",
    "PipelineConfig",
    "load_config",
    "parse_config",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MultitaperSection:
    nw: float = 4.0
    q: int = 7
    mode: str = "paper-coherent"


@dataclass(frozen=True)
class WelchSection:
    seg_frac: float = 0.5
    overlap: float = 0.5
    window_kind: str = "hamming"


@dataclass(frozen=True)
class SpectrogramSection:
    w_s: float = 0.25
    hop: int = 1
    f_hi: float = 60.0


@dataclass(frozen=True)
class SplitSection:
    seed: int = 0
    k: int = 10
    group_by_source: bool = False


@dataclass(frozen=True)
class BaselineSection:
    lr: float = 0.01
    epochs: int = 50
    batch: int = 16


@dataclass(frozen=True)
class Architecture:
    """A named classifier variant; unset fields fall back to ``[baseline]``."""

    name: str
    lr: float | None = None
    epochs: int | None = None
    batch: int | None = None


@dataclass(frozen=True)
class PipelineConfig:
    dataset_dir: Path = Path("data")
    output_dir: Path = Path("out")
    windows: tuple[int, ...] = (1, 2, 5, 10)
    step_s: int = 1
    nonseizure_ratio: float = 0.5
    representations: tuple[RepresentationKind, ...] = tuple(RepresentationKind)
    cache: bool = True
    feature_dtype: str = "float64"
    multitaper: MultitaperSection = MultitaperSection()
    welch: WelchSection = WelchSection()
    spectrogram: SpectrogramSection = SpectrogramSection()
    split: SplitSection = SplitSection()
    baseline: BaselineSection = BaselineSection()
    architectures: tuple[Architecture, ...] = ()
    bands: tuple[FrequencyBand, ...] = DEFAULT_BANDS

    def __post_init__(self):
        _check(len(self.windows) > 0, "windows must not be empty")
        _check(len(set(self.windows)) == len(self.windows), "windows must be distinct")
        for w in self.windows:
            _check(w >= 1, f"window {w} must be a positive integer")
            _check(self.step_s <= w, f"step_s {self.step_s} exceeds window {w}")
        _check(self.step_s >= 1, "step_s must be a positive integer")
        _check(self.nonseizure_ratio > 0, "nonseizure_ratio must be positive")
        _check(len(self.representations) > 0, "representations must not be empty")
        _check(len(set(self.representations)) == len(self.representations),
               "representations must be distinct")
        _check(self.feature_dtype in ("float64", "float32"), "feature_dtype must be float64 or float32")
        mt = self.multitaper
        _check(mt.nw > 0, "multitaper.nw must be positive")
        _check(mt.q >= 1, "multitaper.q must be >= 1")
        _check(mt.mode in MULTITAPER_MODES, f"multitaper.mode must be one of {MULTITAPER_MODES}")
        _check(0 < self.welch.seg_frac <= 1, "welch.seg_frac must lie in (0, 1]")
        _check(0 <= self.welch.overlap < 1, "welch.overlap must lie in [0, 1)")
        _check(self.spectrogram.w_s > 0, "spectrogram.w_s must be positive")
        _check(self.spectrogram.hop >= 1, "spectrogram.hop must be >= 1")
        _check(self.spectrogram.f_hi > 0, "spectrogram.f_hi must be positive")
        _check(self.split.k >= 2, "split.k must be >= 2")
        _check(self.baseline.lr > 0, "baseline.lr must be positive")
        _check(self.baseline.epochs >= 1, "baseline.epochs must be >= 1")
        _check(self.baseline.batch >= 1, "baseline.batch must be >= 1")
        names = [a.name for a in self.architectures]
        _check(len(set(names)) == len(names), "architecture names must be distinct")
        for a in self.architectures:
            _check(bool(a.name) and "/" not in a.name, f"bad architecture name {a.name!r}")
        _check(len({b.name for b in self.bands}) == len(self.bands), "band names must be distinct")

    # ---------------------------------------------------------------- views

    @property
    def spectral(self) -> SpectralConfig:
        return SpectralConfig(
            nw=self.multitaper.nw, q=self.multitaper.q, multitaper_mode=self.multitaper.mode,
            welch_seg_frac=self.welch.seg_frac, welch_overlap=self.welch.overlap,
            welch_window=self.welch.window_kind, spectrogram_w_s=self.spectrogram.w_s,
            spectrogram_hop=self.spectrogram.hop, spectrogram_f_hi=self.spectrogram.f_hi)

    def train_configs(self) -> dict[str, TrainConfig]:
        """Training settings per architecture name, in declaration order."""
        base = self.baseline
        archs = self.architectures or (Architecture("logreg"),)
        return {a.name: TrainConfig(lr=a.lr if a.lr is not None else base.lr,
                                    epochs=a.epochs if a.epochs is not None else base.epochs,
                                    batch_size=a.batch if a.batch is not None else base.batch,
                                    seed=self.split.seed)
                for a in archs}

    def digest(self) -> str:
        """sha256 of the canonical TOML rendering (paths excluded)."""
        text = replace(self, dataset_dir=Path("."), output_dir=Path(".")).to_toml()
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    # -------------------------------------------------------------- writing

    def to_toml(self) -> str:
        lines = [
            f"dataset_dir = {_toml(str(self.dataset_dir))}",
            f"output_dir = {_toml(str(self.output_dir))}",
            f"windows = {_toml(list(self.windows))}",
            f"step_s = {self.step_s}",
            f"nonseizure_ratio = {_toml(self.nonseizure_ratio)}",
            f"representations = {_toml([r.value for r in self.representations])}",
            f"cache = {_toml(self.cache)}",
            f"feature_dtype = {_toml(self.feature_dtype)}",
        ]
        for name in ("multitaper", "welch", "spectrogram", "split", "baseline"):
            lines += ["", f"[{name}]"]
            lines += [f"{k} = {_toml(v)}" for k, v in asdict(getattr(self, name)).items()]
        for arch in self.architectures:
            lines += ["", "[[architectures]]"]
            lines += [f"{k} = {_toml(v)}" for k, v in asdict(arch).items() if v is not None]
        for band in self.bands:
            lines += ["", "[[bands]]", f"name = {_toml(band.name)}", f"lo = {_toml(band.lo)}"]
            if math.isfinite(band.hi):
                lines.append(f"hi = {_toml(band.hi)}")
        return "\n".join(lines) + "\n"


def _check(ok: bool, message: str) -> None:
    if not ok:
        raise ConfigError(message)


def _toml(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_toml(v) for v in value) + "]"
    return str(value)


def _section(cls, raw, where: str):
    if not isinstance(raw, dict):
        raise ConfigError(f"[{where}] must be a table")
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")
    values = {}
    for key, value in raw.items():
        kind = known[key].type
        values[key] = _coerce(value, kind, f"{where}.{key}")
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(f"[{where}]: {exc}") from None


def _coerce(value, kind: str, where: str):
    # annotations are strings under postponed evaluation
    kind = kind.replace(" | None", "")
    if kind == "bool":
        ok = isinstance(value, bool)
    elif kind == "int":
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif kind == "float":
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    else:
        ok = isinstance(value, str)
    if not ok:
        raise ConfigError(f"{where} must be of type {kind}, got {value!r}")
    return value


_TOP_LEVEL = {"dataset_dir", "output_dir", "windows", "step_s", "nonseizure_ratio",
              "representations", "cache", "feature_dtype", "multitaper", "welch",
              "spectrogram", "split", "baseline", "architectures", "bands"}


def parse_config(text: str, base_dir=".") -> PipelineConfig:
    """Validate TOML text; relative paths resolve against ``base_dir``."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML: {exc}") from None
    unknown = sorted(set(raw) - _TOP_LEVEL)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")

    base_dir = Path(base_dir)
    kw = {}
    for key in ("dataset_dir", "output_dir"):
        if key in raw:
            kw[key] = base_dir / _coerce(raw[key], "str", key)
        else:
            kw[key] = base_dir / getattr(PipelineConfig, key)
    if "windows" in raw:
        if not isinstance(raw["windows"], list):
            raise ConfigError("windows must be a list of integers")
        kw["windows"] = tuple(_coerce(w, "int", "windows") for w in raw["windows"])
    for key, kind in (("step_s", "int"), ("nonseizure_ratio", "float"),
                      ("cache", "bool"), ("feature_dtype", "str")):
        if key in raw:
            kw[key] = _coerce(raw[key], kind, key)
    if "representations" in raw:
        if not isinstance(raw["representations"], list):
            raise ConfigError("representations must be a list of names")
        try:
            kw["representations"] = tuple(RepresentationKind.parse(r) for r in raw["representations"])
        except ValueError as exc:
            raise ConfigError(f"representations: {exc}") from None
    for key, cls in (("multitaper", MultitaperSection), ("welch", WelchSection),
                     ("spectrogram", SpectrogramSection), ("split", SplitSection),
                     ("baseline", BaselineSection)):
        if key in raw:
            kw[key] = _section(cls, raw[key], key)
    if "architectures" in raw:
        kw["architectures"] = tuple(_section(Architecture, a, "architectures")
                                    for a in _table_list(raw["architectures"], "architectures"))
    if "bands" in raw:
        bands = []
        for b in _table_list(raw["bands"], "bands"):
            unknown = sorted(set(b) - {"name", "lo", "hi"})
            if unknown or "name" not in b or "lo" not in b:
                raise ConfigError("each [[bands]] entry needs name and lo (hi optional)")
            try:
                bands.append(FrequencyBand(_coerce(b["name"], "str", "bands.name"),
                                           _coerce(b["lo"], "float", "bands.lo"),
                                           _coerce(b.get("hi", math.inf), "float", "bands.hi")))
            except ValueError as exc:
                raise ConfigError(f"bands: {exc}") from None
        kw["bands"] = tuple(bands)
    return PipelineConfig(**kw)


def _table_list(value, where: str) -> list:
    if not isinstance(value, list) or not all(isinstance(v, dict) for v in value):
        raise ConfigError(f"{where} must be an array of tables")
    return value


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.parent)
