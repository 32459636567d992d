import json
import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eegspect.edf import (
    CANONICAL_CHANNELS,
    EdfError,
    RecordCatalog,
    Recording,
    SeizureAnnotation,
    SummaryError,
    build_catalog,
    load_catalog,
    load_recording,
    parse_edf,
    parse_summary,
    read_edf,
    save_catalog,
    select_channels,
    write_edf,
)
from eegspect.synth import SYNTH_CHANNELS
from oracles import edf_bytes


def _two_signal(rng, spr=256, records=1):
    digital = rng.integers(-32768, 32768, size=(2, spr * records))
    return digital, edf_bytes(["A", "B"], digital, spr, records)


# ------------------------------------------------------------- parse_edf

def test_sampling_rate_from_header(rng):
    _, data = _two_signal(rng)
    header, rec = parse_edf(data)
    assert rec.fs == 256
    assert header.signal_count == 2 and header.record_count == 1
    assert rec.samples.shape == (2, 256)
    assert rec.channels == ["A", "B"]


def test_digital_endpoints_map_exactly():
    digital = np.array([[-32768, 32767, 0, 5]])
    _, rec = parse_edf(edf_bytes(["X"], digital, 4, 1, phys_min=-3276.8, phys_max=3276.7))
    assert rec.samples[0, 0] == -3276.8
    assert rec.samples[0, 1] == 3276.7


def test_lossless_round_trip(rng):
    digital, data = _two_signal(rng, spr=128, records=3)
    header, rec = parse_edf(data)
    sig = header.signals[0]
    gain = (sig.physical_max - sig.physical_min) / (sig.digital_max - sig.digital_min)
    back = np.round(sig.digital_min + (rec.samples - sig.physical_min) / gain).astype(int)
    assert np.array_equal(back, digital)
    assert edf_bytes(["A", "B"], back, 128, 3) == data


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-32768, 32767), min_size=2, max_size=64, unique=True))
def test_physical_conversion_is_monotone(values):
    values = sorted(values)
    data = edf_bytes(["X"], np.array([values]), len(values), 1, phys_min=-500.0, phys_max=500.0)
    _, rec = parse_edf(data)
    assert np.all(np.diff(rec.samples[0]) > 0)


def test_multiple_records_are_interleaved_per_signal(rng):
    digital, data = _two_signal(rng, spr=4, records=3)
    _, rec = parse_edf(data)
    t = (digital - -32768) / 65535
    assert np.allclose(rec.samples, (1 - t) * -100 + t * 100)


def test_truncated_file(rng):
    _, data = _two_signal(rng)
    with pytest.raises(EdfError):
        parse_edf(data[:-1])
    with pytest.raises(EdfError):
        parse_edf(data[:100])


def test_non_numeric_field(rng):
    _, data = _two_signal(rng)
    bad = data[:236] + b"abcd    " + data[244:]
    with pytest.raises(EdfError, match="record_count"):
        parse_edf(bad)


def test_degenerate_digital_range():
    with pytest.raises(EdfError):
        parse_edf(edf_bytes(["X"], np.zeros((1, 4)), 4, 1, dig_min=0, dig_max=0))


def test_duplicate_labels_are_suffixed():
    _, rec = parse_edf(edf_bytes(["T8-P8", "T8-P8"], np.zeros((2, 4)), 4, 1))
    assert rec.channels == ["T8-P8", "T8-P8-1"]


def test_writer_matches_oracle_bytes(tmp_path, rng):
    digital = rng.integers(-32768, 32768, size=(2, 512)).astype(np.int16)
    write_edf(tmp_path / "a.edf", ["A", "B"], digital, 256, -100, 100, patient="test", recording="test")
    header, rec = read_edf(tmp_path / "a.edf")
    assert rec.source_id == "a"
    assert header.record_count == 2
    assert np.array_equal(parse_edf(edf_bytes(["A", "B"], digital, 256, 2))[1].samples, rec.samples)


# ---------------------------------------------------------- parse_summary

SUMMARY = """Data Sampling Rate: 256 Hz
*************************

File Name: chb01_03.edf
File Start Time: 13:43:04
File End Time: 14:43:04
Number of Seizures in File: 2
Seizure 1 Start Time: 1679 seconds
Seizure 1 End Time: 1781 seconds
Seizure 2 Start Time: 3782 seconds
Seizure 2 End Time: 3898 seconds

File Name: chb01_04.edf
File Start Time: 14:43:12
File End Time: 15:43:12
Number of Seizures in File: 0

File Name: chb01_05.edf
Number of Seizures in File: 1
Seizure Start Time: 10 seconds
Seizure End Time: 40 seconds
"""


def test_summary_two_seizures():
    parsed = parse_summary(SUMMARY)
    assert [a.duration for a in parsed["chb01_03.edf"]] == [102, 116]
    assert parsed["chb01_03.edf"][0] == SeizureAnnotation(1679, 1781)


def test_summary_zero_and_unnumbered():
    parsed = parse_summary(SUMMARY)
    assert parsed["chb01_04.edf"] == []
    assert parsed["chb01_05.edf"] == [SeizureAnnotation(10, 40)]


def test_summary_total_seconds():
    parsed = parse_summary(SUMMARY)
    total = sum(a.end - a.start for v in parsed.values() for a in v)
    assert total == 102 + 116 + 30


@pytest.mark.parametrize("text", [
    "File Name: a.edf\nNumber of Seizures in File: 1\n"
    "Seizure 1 Start Time: 1 seconds\nSeizure 1 End Time: 2 seconds\n"
    "Seizure 2 Start Time: 5 seconds\nSeizure 2 End Time: 6 seconds\n",
    "File Name: a.edf\nNumber of Seizures in File: 1\n"
    "Seizure 1 Start Time: 9 seconds\nSeizure 1 End Time: 9 seconds\n",
    "File Name: a.edf\nNumber of Seizures in File: 1\n"
    "Seizure 1 Start Time: x seconds\nSeizure 1 End Time: 9 seconds\n",
])
def test_summary_errors(text):
    with pytest.raises(SummaryError):
        parse_summary(text)


# -------------------------------------------------------- select_channels

def _recording(channels, n=8):
    samples = np.arange(len(channels))[:, None] * np.ones(n)
    return Recording(list(channels), samples, 256.0, source_id="r")


def test_select_from_23_channels():
    names = [c.lower() + " " for c in SYNTH_CHANNELS[:-1]] + ["T8-P8-1"]
    rec = _recording(names)
    out = select_channels(rec)
    assert out.channels == list(CANONICAL_CHANNELS)
    assert out.samples.shape == (18, 8)
    for i, name in enumerate(CANONICAL_CHANNELS):
        assert out.samples[i, 0] == SYNTH_CHANNELS.index(name)


def test_select_identity_and_idempotence():
    rec = _recording(CANONICAL_CHANNELS)
    out = select_channels(rec)
    assert out.channels == rec.channels and np.array_equal(out.samples, rec.samples)
    twice = select_channels(select_channels(_recording(SYNTH_CHANNELS[:-1])))
    once = select_channels(_recording(SYNTH_CHANNELS[:-1]))
    assert np.array_equal(twice.samples, once.samples)


def test_select_missing_channel():
    rec = _recording([c for c in CANONICAL_CHANNELS if c != "FZ-CZ"])
    with pytest.raises(KeyError, match="FZ-CZ"):
        select_channels(rec)


# --------------------------------------------------------------- catalog

def _fixture_dir(tmp_path, rng):
    for name in ("r1", "r2", "r3"):
        write_edf(tmp_path / f"{name}.edf", ["A"], rng.integers(-100, 100, size=(1, 256 * 30)),
                  256, -100, 100)
    (tmp_path / "x-summary.txt").write_text(
        "File Name: r2.edf\nNumber of Seizures in File: 1\n"
        "Seizure Start Time: 5 seconds\nSeizure End Time: 12 seconds\n"
        "File Name: r1.edf\nNumber of Seizures in File: 0\n"
        "File Name: r3.edf\nNumber of Seizures in File: 0\n")
    return tmp_path


def test_catalog_three_entries(tmp_path, rng):
    cat = build_catalog(_fixture_dir(tmp_path, rng))
    assert [e.source_id for e in cat] == ["r1", "r2", "r3"]
    assert [e.seizure_count for e in cat] == [0, 1, 0]
    assert cat.entries[1].duration_s == 30
    assert len(cat.with_seizures()) == 1


def test_catalog_empty_dir(tmp_path):
    assert len(build_catalog(tmp_path)) == 0


def test_catalog_round_trip(tmp_path, rng):
    cat = build_catalog(_fixture_dir(tmp_path, rng))
    save_catalog(cat, tmp_path / "catalog.json")
    again = load_catalog(tmp_path / "catalog.json")
    assert again.entries == cat.entries
    assert again.to_json() == cat.to_json()
    doc = json.loads((tmp_path / "catalog.json").read_text())
    assert list(doc["entries"][1]) == ["source_id", "path", "duration_s", "seizures"]
    assert doc["entries"][1]["seizures"] == [{"start_s": 5, "end_s": 12}]


def test_catalog_missing_summary_warns(tmp_path, rng, caplog):
    write_edf(tmp_path / "lone.edf", ["A"], np.zeros((1, 256)), 256, -1, 1)
    with caplog.at_level(logging.WARNING):
        cat = build_catalog(tmp_path)
    assert cat.entries[0].seizures == ()
    assert "no summary entry" in caplog.text


def test_catalog_skips_corrupt_file(tmp_path, rng):
    _fixture_dir(tmp_path, rng)
    (tmp_path / "bad.edf").write_bytes(b"garbage")
    cat = build_catalog(tmp_path)
    assert cat.skipped == ["bad.edf"] and len(cat) == 3


def test_catalog_errors(tmp_path):
    with pytest.raises(NotADirectoryError):
        build_catalog(tmp_path / "nope")
    with pytest.raises(ValueError, match="duplicate"):
        RecordCatalog([load_catalog_entry("a"), load_catalog_entry("a")])


def load_catalog_entry(source_id):
    from eegspect.edf import CatalogEntry

    return CatalogEntry(source_id, f"{source_id}.edf", 10.0)


def test_load_recording_attaches_annotations(tmp_path, rng):
    cat = build_catalog(_fixture_dir(tmp_path, rng))
    rec = load_recording(cat, cat.entries[1])
    assert rec.annotations == [SeizureAnnotation(5, 12)]
    assert rec.source_id == "r2"


def test_annotation_invariants():
    with pytest.raises(ValueError):
        SeizureAnnotation(5, 5)
    with pytest.raises(ValueError):
        Recording(["a", "a"], np.zeros((2, 3)), 256)
