import numpy as np
import pytest

from mwboson import formats
from mwboson.config import ExperimentConfig, load_config, parse_config, parse_squeezes
from mwboson.device import DeviceParams
from mwboson.errors import ValidationError
from mwboson.gaussian import TwoModeSqueeze
from mwboson.interferometer import haar_random, reck_decompose
from mwboson.pulses import compile_schedule
from mwboson.sampler import apply_loss, full_distribution

HEADER = formats.make_header("test", "0123456789ab", 7, note="x")


def test_header_contents():
    assert HEADER["artifact"].startswith("mwboson ")
    assert HEADER["seed"] == "7"


def test_config_hash_is_stable_and_sensitive():
    a = formats.config_hash({"b": 1, "a": [1, 2]})
    assert a == formats.config_hash({"a": [1, 2], "b": 1})
    assert a != formats.config_hash({"a": [1, 2], "b": 2})
    assert len(a) == 12


def roundtrip_bytes(tmp_path, write, read, obj):
    p1, p2 = tmp_path / "a.tsv", tmp_path / "b.tsv"
    write(p1, obj, HEADER)
    header, back = read(p1)
    write(p2, back, header)
    assert p1.read_bytes() == p2.read_bytes()
    return header, back


def test_unitary_roundtrip(tmp_path):
    U = haar_random(4, 1)
    header, back = roundtrip_bytes(tmp_path, formats.write_unitary, formats.read_unitary, U)
    assert np.array_equal(back, U)
    assert header["note"] == "x"


def test_elements_roundtrip(tmp_path):
    el = reck_decompose(haar_random(4, 2))
    _, back = roundtrip_bytes(tmp_path, formats.write_elements, formats.read_elements, el)
    assert list(back) == list(el) and back.mode_count == 4


def test_schedule_roundtrip(tmp_path):
    s = compile_schedule(reck_decompose(haar_random(4, 3)), DeviceParams())
    _, back = roundtrip_bytes(tmp_path, formats.write_schedule, formats.read_schedule, s)
    assert back.depth == s.depth
    assert back.total_duration == pytest.approx(s.total_duration, rel=1e-11)


def test_distribution_roundtrip(tmp_path):
    dist = apply_loss(full_distribution(haar_random(3, 4), (1, 1, 0)), 0.9)
    _, back = roundtrip_bytes(tmp_path, formats.write_distribution, formats.read_distribution, dist)
    assert back.max_deviation(dist) < 1e-12


def test_non_unitary_file_rejected(tmp_path):
    p = tmp_path / "u.tsv"
    formats.write_unitary(p, 1.01 * haar_random(3, 0), HEADER)
    with pytest.raises(ValidationError):
        formats.read_unitary(p)


@pytest.mark.parametrize("body", ["", "# columns: row\tcol\tre\tim\n0\t0\t1\n", "# columns: a\tb\n",
                                  "# columns: row\tcol\tre\tim\n0\t0\t1\t0\n0\t1\t0\t0\n"])
def test_malformed_unitary_files(tmp_path, body):
    p = tmp_path / "u.tsv"
    p.write_text(body)
    with pytest.raises(ValidationError):
        formats.read_unitary(p)


def test_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        formats.read_elements(tmp_path / "none.tsv")


def test_config_defaults():
    cfg = parse_config("")
    assert cfg == ExperimentConfig()
    assert cfg.input_state == (1, 1, 0, 0)
    assert cfg.readout_model is None


def test_config_full_example(tmp_path):
    text = """modes = 3
photons = 2
seed = 9
readout = qnd
loss = yes
convention_phi = angular

[device]
g_bs = 1e8

[readout]
eta = 0.8
repetitions = 3

[gaussian]
displacements = 0.5, 0.1j, 0
squeezes = 1-2:0.3:0.5

[verify]
modes = 2,3
photons =
"""
    p = tmp_path / "exp.ini"
    p.write_text(text)
    cfg = load_config(p)
    assert (cfg.modes, cfg.photons, cfg.seed, cfg.loss) == (3, 2, 9, True)
    assert cfg.device.phi_convention == "angular" and cfg.device.g_bs == 1e8
    assert cfg.readout_model.eta == 0.8 and cfg.readout_model.repetitions == 3
    assert cfg.gaussian.displacements == (0.5, 0.1j, 0)
    assert cfg.gaussian.squeezes == (TwoModeSqueeze((1, 2), 0.3, 0.5),)
    assert cfg.verify_modes == (2, 3) and cfg.verify_photons == ()


@pytest.mark.parametrize("text", ["bogus = 1", "[extra]\nx = 1", "modes = four", "loss = maybe", "readout = eye",
                                  "[device]\ng_bs = fast", "[device]\ncolor = 1", "modes = 0", "photons = 5",
                                  "input = 1,1", "[gaussian]\nsqueezes = 0-2:0.1", "[gaussian]\norder = sideways",
                                  "[readout]\neta = 2", "just text"])
def test_config_errors(text):
    with pytest.raises(ValidationError):
        cfg = parse_config(text)
        cfg.input_state  # photons > modes is only caught on use


def test_config_missing_file(tmp_path):
    with pytest.raises(ValidationError):
        load_config(tmp_path / "missing.ini")


def test_parse_squeezes():
    assert parse_squeezes("") == ()
    assert parse_squeezes("0-1:0.2; 2-3:0.1:1.5") == (TwoModeSqueeze((0, 1), 0.2), TwoModeSqueeze((2, 3), 0.1, 1.5))
    with pytest.raises(ValidationError):
        parse_squeezes("0-1")
    with pytest.raises(ValidationError):
        parse_squeezes("a-b:0.1")


def test_canonical_includes_unitary_bytes(tmp_path):
    p = tmp_path / "u.tsv"
    formats.write_unitary(p, haar_random(2, 0), HEADER)
    cfg = ExperimentConfig(modes=2, unitary=str(p))
    h1 = formats.config_hash(cfg.canonical())
    formats.write_unitary(p, haar_random(2, 1), HEADER)
    assert formats.config_hash(cfg.canonical()) != h1
