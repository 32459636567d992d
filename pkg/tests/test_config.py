import math
from pathlib import Path

import pytest

from eegspect.config import Architecture, ConfigError, PipelineConfig, load_config, parse_config
from eegspect.representation import RepresentationKind
from eegspect.spectral import DEFAULT_BANDS


def test_empty_file_gives_defaults(tmp_path):
    cfg = parse_config("", base_dir=tmp_path)
    assert cfg.windows == (1, 2, 5, 10) and cfg.step_s == 1
    assert cfg.representations == tuple(RepresentationKind)
    assert cfg.multitaper.nw == 4.0 and cfg.multitaper.q == 7
    assert cfg.split.k == 10 and cfg.baseline.lr == 0.01
    assert cfg.dataset_dir == tmp_path / "data"
    assert list(cfg.train_configs()) == ["logreg"]
    assert cfg.bands == DEFAULT_BANDS


def test_relative_paths_follow_config_file(tmp_path):
    path = tmp_path / "sub" / "exp.toml"
    path.parent.mkdir()
    path.write_text('dataset_dir = "../corpus"\noutput_dir = "/abs/out"\n')
    cfg = load_config(path)
    assert cfg.dataset_dir == path.parent / "../corpus"
    assert cfg.output_dir == Path("/abs/out")


@pytest.mark.parametrize("text", [
    "windoze = [1]",
    "[multitaper]\nnw = 4\nk = 7",
    "[[architectures]]\nname = 'a'\nmomentum = 0.9",
    "[[bands]]\nname = 'x'\nlo = 1\nwidth = 2",
    "[splits]\nk = 3",
])
def test_unknown_keys_rejected(text):
    with pytest.raises(ConfigError, match="unknown|bands"):
        parse_config(text)


@pytest.mark.parametrize("text", [
    "windows = 5",
    "windows = [1.5]",
    "step_s = '1'",
    "cache = 1",
    "[split]\nk = 2.0",
    "[baseline]\nlr = true",
    "representations = ['fourier']",
    "[multitaper]\nmode = 'fancy'",
    "windows = [2, 2]",
    "windows = [1]\nstep_s = 2",
    "[split]\nk = 1",
    "feature_dtype = 'float16'",
    "[[architectures]]\nname = 'a'\n[[architectures]]\nname = 'a'",
    "[[bands]]\nname = 'x'\nlo = 5\nhi = 2",
    "not toml [",
])
def test_invalid_values_rejected(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_integer_accepted_for_float():
    cfg = parse_config("nonseizure_ratio = 1\n[multitaper]\nnw = 3")
    assert cfg.nonseizure_ratio == 1.0 and isinstance(cfg.multitaper.nw, float)


def test_architectures_fall_back_to_baseline():
    cfg = parse_config("""
[baseline]
lr = 0.05
epochs = 7

[[architectures]]
name = "slow"
lr = 0.001

[[architectures]]
name = "long"
epochs = 20
batch = 4
""")
    tc = cfg.train_configs()
    assert list(tc) == ["slow", "long"]
    assert (tc["slow"].lr, tc["slow"].epochs) == (0.001, 7)
    assert (tc["long"].lr, tc["long"].epochs, tc["long"].batch_size) == (0.05, 20, 4)


def test_toml_round_trip(tmp_path):
    cfg = PipelineConfig(
        dataset_dir=tmp_path / "d", output_dir=tmp_path / "o", windows=(2, 5), step_s=2,
        representations=(RepresentationKind.TIME, RepresentationKind.WELCH_PSD),
        architectures=(Architecture("a", lr=0.1), Architecture("b", epochs=3)))
    again = parse_config(cfg.to_toml(), base_dir=tmp_path)
    assert again == cfg
    assert again.digest() == cfg.digest()
    assert math.isinf(again.bands[-1].hi)


def test_digest_ignores_paths_only(tmp_path):
    a = PipelineConfig(dataset_dir=tmp_path / "x")
    b = PipelineConfig(dataset_dir=tmp_path / "y")
    assert a.digest() == b.digest()
    assert a.digest() != PipelineConfig(step_s=1, windows=(1, 2)).digest()


def test_spectral_view():
    sc = parse_config("[multitaper]\nnw = 2.5\nq = 4\n[spectrogram]\nhop = 8").spectral
    assert (sc.nw, sc.q, sc.spectrogram_hop) == (2.5, 4, 8)
