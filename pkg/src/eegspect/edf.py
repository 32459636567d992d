"""Plain EDF reading/writing, CHB-MIT summary parsing and the record catalog."""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

__all__ = [
    "CANONICAL_CHANNELS",
    "EdfError",
    "SummaryError",
    "SignalHeader",
    "EdfHeader",
    "SeizureAnnotation",
    "Recording",
    "CatalogEntry",
    "RecordCatalog",
    "parse_edf_header",
    "parse_edf",
    "read_edf",
    "write_edf",
    "parse_summary",
    "select_channels",
    "build_catalog",
    "save_catalog",
    "load_catalog",
    "load_recording",
]

CANONICAL_CHANNELS = (
    "FP1-F7", "FP1-F3", "FP2-F8", "FP2-F4", "FZ-CZ", "F3-C3", "F4-C4", "F7-T7", "F8-T8",
    "C3-P3", "C4-P4", "CZ-PZ", "T8-P8", "T7-P7", "P7-O1", "P3-O1", "P8-O2", "P4-O2",
)

CATALOG_SCHEMA_VERSION = 1


class EdfError(ValueError):
    """Malformed or truncated EDF byte stream."""


class SummaryError(ValueError):
    """Malformed CHB-MIT summary text."""


@dataclass(frozen=True)
class SignalHeader:
    label: str
    physical_min: float
    physical_max: float
    digital_min: int
    digital_max: int
    samples_per_record: int
    transducer: str = ""
    physical_dimension: str = "uV"
    prefiltering: str = ""

    @property
    def gain(self) -> float:
        return (self.physical_max - self.physical_min) / (self.digital_max - self.digital_min)


@dataclass(frozen=True)
class EdfHeader:
    version: str
    record_count: int
    record_duration: float
    signals: tuple[SignalHeader, ...]
    patient: str = ""
    recording: str = ""
    start_date: str = "01.01.00"
    start_time: str = "00.00.00"

    @property
    def signal_count(self) -> int:
        return len(self.signals)

    @property
    def header_bytes(self) -> int:
        return 256 * (1 + self.signal_count)

    @property
    def record_bytes(self) -> int:
        return 2 * sum(s.samples_per_record for s in self.signals)

    @property
    def duration(self) -> float:
        return self.record_count * self.record_duration


@dataclass(frozen=True)
class SeizureAnnotation:
    start: int
    end: int

    def __post_init__(self):
        if not 0 <= self.start < self.end:
            raise ValueError(f"invalid seizure interval [{self.start}, {self.end})")

    @property
    def duration(self) -> int:
        return self.end - self.start


@dataclass
class Recording:
    channels: list[str]
    samples: np.ndarray  # (channels, total_samples), microvolts
    fs: float
    annotations: list[SeizureAnnotation] = field(default_factory=list)
    source_id: str = ""

    def __post_init__(self):
        self.samples = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if self.samples.shape[0] != len(self.channels):
            raise ValueError("one sample row per channel required")
        if len(set(self.channels)) != len(self.channels):
            raise ValueError("channel names must be unique")
        if self.fs <= 0:
            raise ValueError("fs must be positive")

    @property
    def duration(self) -> float:
        return self.samples.shape[1] / self.fs


# ---------------------------------------------------------------- EDF bytes

_FIXED = [("version", 8), ("patient", 80), ("recording", 80), ("start_date", 8),
          ("start_time", 8), ("header_bytes", 8), ("reserved", 44), ("record_count", 8),
          ("record_duration", 8), ("signal_count", 4)]
_PER_SIGNAL = [("label", 16), ("transducer", 80), ("physical_dimension", 8),
               ("physical_min", 8), ("physical_max", 8), ("digital_min", 8),
               ("digital_max", 8), ("prefiltering", 80), ("samples_per_record", 8),
               ("reserved", 32)]


def _ascii(raw: bytes) -> str:
    return raw.decode("ascii", errors="replace").strip()


def _number(text: str, name: str, kind=float):
    try:
        value = float(text)
    except ValueError:
        raise EdfError(f"header field {name!r} is not numeric: {text!r}") from None
    if kind is int:
        if value != int(value):
            raise EdfError(f"header field {name!r} is not an integer: {text!r}")
        return int(value)
    return value


def parse_edf_header(data: bytes) -> EdfHeader:
    """Decode the fixed header and per-signal headers of an EDF stream."""
    if len(data) < 256:
        raise EdfError(f"truncated EDF: {len(data)} bytes, fixed header needs 256")
    fields, pos = {}, 0
    for name, width in _FIXED:
        fields[name] = _ascii(data[pos:pos + width])
        pos += width
    ns = _number(fields["signal_count"], "signal_count", int)
    if ns < 1:
        raise EdfError("EDF declares no signals")
    if len(data) < 256 * (ns + 1):
        raise EdfError(f"truncated EDF: signal headers need {256 * (ns + 1)} bytes")

    columns = {}
    for name, width in _PER_SIGNAL:
        columns[name] = [_ascii(data[pos + i * width:pos + (i + 1) * width]) for i in range(ns)]
        pos += width * ns

    signals = []
    for i in range(ns):
        sig = SignalHeader(
            label=columns["label"][i],
            physical_min=_number(columns["physical_min"][i], "physical_min"),
            physical_max=_number(columns["physical_max"][i], "physical_max"),
            digital_min=_number(columns["digital_min"][i], "digital_min", int),
            digital_max=_number(columns["digital_max"][i], "digital_max", int),
            samples_per_record=_number(columns["samples_per_record"][i], "samples_per_record", int),
            transducer=columns["transducer"][i],
            physical_dimension=columns["physical_dimension"][i],
            prefiltering=columns["prefiltering"][i],
        )
        if sig.digital_max <= sig.digital_min:
            raise EdfError(f"signal {sig.label!r}: digital_max must exceed digital_min")
        if sig.samples_per_record < 1:
            raise EdfError(f"signal {sig.label!r}: samples_per_record must be >= 1")
        signals.append(sig)

    record_count = _number(fields["record_count"], "record_count", int)
    record_duration = _number(fields["record_duration"], "record_duration")
    if record_duration <= 0:
        raise EdfError("record_duration must be positive")
    header = EdfHeader(
        version=fields["version"],
        record_count=record_count,
        record_duration=record_duration,
        signals=tuple(signals),
        patient=fields["patient"],
        recording=fields["recording"],
        start_date=fields["start_date"],
        start_time=fields["start_time"],
    )
    if record_count == -1:
        # unknown count (recording interrupted); infer from payload size
        inferred = (len(data) - header.header_bytes) // header.record_bytes
        header = replace(header, record_count=inferred)
    if header.record_count < 1:
        raise EdfError("EDF must contain at least one data record")
    return header


def _unique_labels(labels: list[str]) -> list[str]:
    seen: dict[str, int] = {}
    out = []
    for label in labels:
        if label in seen:
            seen[label] += 1
            out.append(f"{label}-{seen[label]}")
        else:
            seen[label] = 0
            out.append(label)
    return out


def parse_edf(data: bytes) -> tuple[EdfHeader, Recording]:
    """Parse an EDF byte stream into its header and a physical-unit recording.

    Digital samples map linearly onto physical units so that ``digital_min``
    lands on ``physical_min`` and ``digital_max`` on ``physical_max``.
    All signals must share one sampling rate. Repeated labels get a ``-1``,
    ``-2`` ... suffix to keep channel names unique.
    """
    header = parse_edf_header(data)
    expected = header.header_bytes + header.record_count * header.record_bytes
    if len(data) < expected:
        raise EdfError(f"truncated EDF: {len(data)} bytes, expected {expected}")

    spr = np.array([s.samples_per_record for s in header.signals])
    if np.any(spr != spr[0]):
        raise EdfError("signals with differing sampling rates are not supported")
    ns, n = header.signal_count, int(spr[0])

    raw = np.frombuffer(data, dtype="<i2", count=header.record_count * ns * n,
                        offset=header.header_bytes)
    digital = raw.reshape(header.record_count, ns, n).transpose(1, 0, 2).reshape(ns, -1)

    dig_min = np.array([s.digital_min for s in header.signals], dtype=np.float64)[:, None]
    dig_max = np.array([s.digital_max for s in header.signals], dtype=np.float64)[:, None]
    phys_min = np.array([s.physical_min for s in header.signals])[:, None]
    phys_max = np.array([s.physical_max for s in header.signals])[:, None]
    # interpolation form hits both endpoints exactly
    t = (digital - dig_min) / (dig_max - dig_min)
    physical = (1.0 - t) * phys_min + t * phys_max

    recording = Recording(
        channels=_unique_labels([s.label for s in header.signals]),
        samples=physical,
        fs=n / header.record_duration,
    )
    return header, recording


def read_edf(path) -> tuple[EdfHeader, Recording]:
    path = Path(path)
    header, recording = parse_edf(path.read_bytes())
    recording.source_id = path.stem
    return header, recording


def _field(value, width: int) -> bytes:
    text = value if isinstance(value, str) else _format_number(value)
    raw = text.encode("ascii")
    if len(raw) > width:
        raise EdfError(f"value {text!r} does not fit in {width} header bytes")
    return raw.ljust(width, b" ")


def _format_number(value) -> str:
    if float(value) == int(value):
        return str(int(value))
    text = f"{value:.8g}"
    return text[:8]


def write_edf(path, channels, digital, fs: float, physical_min, physical_max,
              digital_min: int = -32768, digital_max: int = 32767,
              record_duration: float = 1.0, patient: str = "X", recording: str = "X") -> None:
    """Write int16 digital samples ``(channels, samples)`` as a plain EDF file.

    The sample count must be a whole number of records.
    """
    digital = np.asarray(digital)
    ns, total = digital.shape
    spr = fs * record_duration
    if spr != int(spr):
        raise EdfError("fs * record_duration must be an integer sample count")
    spr = int(spr)
    if total % spr:
        raise EdfError(f"{total} samples is not a whole number of {spr}-sample records")
    n_records = total // spr
    phys_min = np.broadcast_to(physical_min, (ns,))
    phys_max = np.broadcast_to(physical_max, (ns,))

    head = b"".join([
        _field("0", 8), _field(patient, 80), _field(recording, 80), _field("01.01.00", 8),
        _field("00.00.00", 8), _field(256 * (ns + 1), 8), _field("", 44),
        _field(n_records, 8), _field(record_duration, 8), _field(ns, 4),
    ])
    per_signal = [
        [_field(c, 16) for c in channels],
        [_field("", 80)] * ns,
        [_field("uV", 8)] * ns,
        [_field(v, 8) for v in phys_min],
        [_field(v, 8) for v in phys_max],
        [_field(digital_min, 8)] * ns,
        [_field(digital_max, 8)] * ns,
        [_field("", 80)] * ns,
        [_field(spr, 8)] * ns,
        [_field("", 32)] * ns,
    ]
    head += b"".join(b"".join(col) for col in per_signal)
    body = (digital.astype("<i2").reshape(ns, n_records, spr)
            .transpose(1, 0, 2).tobytes())
    Path(path).write_bytes(head + body)


# ------------------------------------------------------------ summary text

_FILE_RE = re.compile(r"^File Name:\s*(\S+)")
_COUNT_RE = re.compile(r"^Number of Seizures in File:\s*(\S+)")
_SEIZURE_RE = re.compile(r"^Seizure(?:\s+(\d+))?\s+(Start|End)\s+Time:\s*(\S+)\s*(?:seconds)?")


def _seconds(text: str, line: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise SummaryError(f"malformed seizure time in line {line!r}") from None


def parse_summary(text: str) -> dict[str, list[SeizureAnnotation]]:
    """Map each ``File Name:`` block of a CHB-MIT summary to its seizures.

    Accepts both ``Seizure Start Time:`` and ``Seizure N Start Time:`` forms.

    Raises
    ------
    SummaryError
        On a declared/actual count mismatch, ``end <= start`` or a malformed
        number.
    """
    blocks: list[tuple[str, int | None, list[int], list[int]]] = []
    for raw_line in text.splitlines():
        line = raw_line.strip()
        if m := _FILE_RE.match(line):
            blocks.append((m.group(1), None, [], []))
            continue
        if not blocks:
            continue
        name, declared, starts, ends = blocks[-1]
        if m := _COUNT_RE.match(line):
            try:
                declared = int(m.group(1))
            except ValueError:
                raise SummaryError(f"malformed seizure count in line {line!r}") from None
            blocks[-1] = (name, declared, starts, ends)
        elif m := _SEIZURE_RE.match(line):
            (starts if m.group(2) == "Start" else ends).append(_seconds(m.group(3), line))

    result: dict[str, list[SeizureAnnotation]] = {}
    for name, declared, starts, ends in blocks:
        if len(starts) != len(ends):
            raise SummaryError(f"{name}: {len(starts)} start times but {len(ends)} end times")
        if declared is not None and declared != len(starts):
            raise SummaryError(f"{name}: declares {declared} seizures, found {len(starts)}")
        annotations = []
        for s, e in zip(starts, ends):
            if e <= s:
                raise SummaryError(f"{name}: seizure end {e} s is not after start {s} s")
            annotations.append(SeizureAnnotation(s, e))
        result[name] = annotations
    return result


# -------------------------------------------------------- channel selection

def _norm(label: str) -> str:
    return label.strip().upper()


def select_channels(recording: Recording, canonical=CANONICAL_CHANNELS) -> Recording:
    """Keep only ``canonical`` channels, in canonical order.

    Matching ignores case and surrounding whitespace. The first occurrence
    wins when a label repeats.
    """
    index: dict[str, int] = {}
    for i, name in enumerate(recording.channels):
        index.setdefault(_norm(name), i)
    missing = [c for c in canonical if _norm(c) not in index]
    if missing:
        raise KeyError(f"{recording.source_id or 'recording'} lacks channels: {', '.join(missing)}")
    rows = [index[_norm(c)] for c in canonical]
    return Recording(
        channels=list(canonical),
        samples=recording.samples[rows],
        fs=recording.fs,
        annotations=list(recording.annotations),
        source_id=recording.source_id,
    )


# ------------------------------------------------------------------ catalog

@dataclass(frozen=True)
class CatalogEntry:
    source_id: str
    path: str
    duration_s: float
    seizures: tuple[SeizureAnnotation, ...] = ()

    @property
    def seizure_count(self) -> int:
        return len(self.seizures)

    def to_dict(self) -> dict:
        return {
            "source_id": self.source_id,
            "path": self.path,
            "duration_s": self.duration_s,
            "seizures": [{"start_s": a.start, "end_s": a.end} for a in self.seizures],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CatalogEntry":
        return cls(d["source_id"], d["path"], d["duration_s"],
                   tuple(SeizureAnnotation(s["start_s"], s["end_s"]) for s in d["seizures"]))


@dataclass
class RecordCatalog:
    entries: list[CatalogEntry] = field(default_factory=list)
    root: str = "."
    skipped: list[str] = field(default_factory=list)

    def __post_init__(self):
        ids = [e.source_id for e in self.entries]
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        if dupes:
            raise ValueError(f"duplicate source_id(s): {', '.join(dupes)}")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def with_seizures(self) -> list[CatalogEntry]:
        return [e for e in self.entries if e.seizures]

    def to_json(self) -> str:
        doc = {"schema_version": CATALOG_SCHEMA_VERSION,
               "entries": [e.to_dict() for e in self.entries]}
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str, root: str = ".") -> "RecordCatalog":
        doc = json.loads(text)
        if doc.get("schema_version") != CATALOG_SCHEMA_VERSION:
            raise ValueError(f"unsupported catalog schema {doc.get('schema_version')!r}")
        return cls([CatalogEntry.from_dict(d) for d in doc["entries"]], root=root)


def build_catalog(directory) -> RecordCatalog:
    """Index every ``*.edf`` below ``directory`` with its summary annotations.

    Files that fail to parse, or whose annotations fall outside the
    recording, are skipped with a warning and listed in ``catalog.skipped``.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise NotADirectoryError(f"cannot read directory {directory}")

    annotations: dict[str, list[SeizureAnnotation]] = {}
    for summary in sorted(directory.rglob("*summary*.txt")):
        annotations.update(parse_summary(summary.read_text(encoding="utf-8", errors="replace")))

    entries, skipped = [], []
    for path in sorted(directory.rglob("*.edf"), key=lambda p: p.as_posix()):
        rel = path.relative_to(directory).as_posix()
        try:
            data = path.read_bytes()
            header = parse_edf_header(data)
            expected = header.header_bytes + header.record_count * header.record_bytes
            if len(data) < expected:
                raise EdfError(f"truncated EDF: {len(data)} bytes, expected {expected}")
            seizures = annotations.get(path.name)
            if seizures is None:
                logger.warning("%s: no summary entry, assuming no seizures", rel)
                seizures = []
            for a in seizures:
                if a.end > header.duration:
                    raise EdfError(f"seizure [{a.start}, {a.end}) exceeds duration {header.duration}")
        except (OSError, EdfError) as exc:
            logger.warning("skipping %s: %s", rel, exc)
            skipped.append(rel)
            continue
        entries.append(CatalogEntry(path.stem, rel, header.duration, tuple(seizures)))

    entries.sort(key=lambda e: e.source_id)
    return RecordCatalog(entries, root=str(directory), skipped=skipped)


def save_catalog(catalog: RecordCatalog, path) -> None:
    Path(path).write_text(catalog.to_json(), encoding="utf-8")


def load_catalog(path, root=None) -> RecordCatalog:
    path = Path(path)
    return RecordCatalog.from_json(path.read_text(encoding="utf-8"),
                                   root=str(root if root is not None else path.parent))


def load_recording(catalog: RecordCatalog, entry: CatalogEntry) -> Recording:
    """Read an entry's EDF and attach its annotations."""
    _, recording = read_edf(Path(catalog.root) / entry.path)
    recording.source_id = entry.source_id
    recording.annotations = list(entry.seizures)
    return recording
