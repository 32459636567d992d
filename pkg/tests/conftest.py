import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        verdict = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        previous = _CRITERIA.get(number, ("PASS", title))[0]
        # a criterion fails if any of its tests fails
        if previous == "FAIL" or (previous == "SKIP" and verdict == "PASS"):
            verdict = previous
        _CRITERIA[number] = (verdict, title)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        verdict, title = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:>2}: {verdict}  {title}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory):
    """Default-seed synthetic corpus with its catalog."""
    from eegspect.edf import build_catalog, save_catalog
    from eegspect.synth import write_corpus

    root = tmp_path_factory.mktemp("synth")
    write_corpus(root)
    save_catalog(build_catalog(root), root / "catalog.json")
    return root


def write_tiny_dataset(root, fs=64, duration_s=120, seed=7):
    """Two short recordings with one 30 s theta-burst seizure each, plus summary."""
    from eegspect.edf import write_edf
    from eegspect.synth import SYNTH_CHANNELS

    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    r = np.random.default_rng(seed)
    t = np.arange(duration_s * fs) / fs
    lines = []
    for i, start in enumerate((30, 60), 1):
        x = 20 * r.standard_normal((len(SYNTH_CHANNELS), t.size))
        on = (t >= start) & (t < start + 30)
        x[:, on] += 40 * np.sin(2 * np.pi * 5.5 * t[on] + r.uniform(0, 2 * np.pi, (len(SYNTH_CHANNELS), 1)))
        name = f"tiny{i:02d}_01.edf"
        write_edf(root / name, SYNTH_CHANNELS, np.round(x * 10).astype(np.int16), fs,
                  -3276.8, 3276.7)
        lines += [f"File Name: {name}", "Number of Seizures in File: 1",
                  f"Seizure Start Time: {start} seconds", f"Seizure End Time: {start + 30} seconds", ""]
    (root / "tiny-summary.txt").write_text("\n".join(lines))
    return root
