"""Experiment configuration: ``key = value`` lines with optional sections.

Keys before any section header belong to ``[experiment]``.  Recognised
sections are ``[experiment]``, ``[device]`` (overrides of
:class:`~mwboson.device.DeviceParams`), ``[readout]``, ``[gaussian]`` and
``[verify]``.  Example::

    modes = 4
    photons = 2
    seed = 7
    readout = qnd

    [device]
    g_bs = 1.884955592153876e8

    [gaussian]
    displacements = 0.5, 0
    squeezes = 0-1:0.3:0.0
    order = squeeze_first
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .device import PHI_CONVENTIONS, DeviceParams
from .errors import ValidationError
from .gaussian import ORDERS, GaussianPrep, TwoModeSqueeze
from .sampler import QndCounter, SwapPhotodetector

READOUTS = ("none", "swap", "qnd")

_EXPERIMENT_KEYS = {"modes", "photons", "seed", "input", "unitary", "readout", "loss", "samples",
                    "cutoff", "convention_phi", "depth_coefficient", "r"}
_READOUT_KEYS = {"eta", "repetitions", "max_n_probe", "post_select_bunching"}
_GAUSSIAN_KEYS = {"displacements", "squeezes", "order"}
_VERIFY_KEYS = {"modes", "photons", "instances"}


@dataclass(frozen=True)
class ExperimentConfig:
    modes: int = 4
    photons: int = 2
    seed: int = 0
    input: tuple[int, ...] | None = None
    unitary: str = "haar"
    readout: str = "none"
    loss: bool = False
    samples: int = 10_000
    cutoff: int = 6
    depth_coefficient: float = 1.0
    r: float = 0.5
    device: DeviceParams = field(default_factory=DeviceParams)
    qnd: QndCounter = field(default_factory=QndCounter)
    swap: SwapPhotodetector = field(default_factory=SwapPhotodetector)
    gaussian: GaussianPrep | None = None
    verify_modes: tuple[int, ...] = (2, 3, 4, 5)
    verify_photons: tuple[int, ...] = (1, 2, 3)
    verify_instances: int = 5

    def __post_init__(self):
        if self.modes < 1:
            raise ValidationError(f"modes must be >= 1, got {self.modes}")
        if self.photons < 0:
            raise ValidationError(f"photons must be >= 0, got {self.photons}")
        if self.readout not in READOUTS:
            raise ValidationError(f"readout must be one of {READOUTS}, got {self.readout!r}")
        if self.samples < 0:
            raise ValidationError("samples must be >= 0")
        if self.cutoff < 1:
            raise ValidationError("cutoff must be >= 1")
        if self.input is not None:
            if len(self.input) != self.modes or any(n < 0 for n in self.input):
                raise ValidationError(f"input {self.input} does not fit {self.modes} modes")
        if self.gaussian is not None and self.gaussian.mode_count != self.modes:
            raise ValidationError(f"gaussian prep has {self.gaussian.mode_count} modes, config has {self.modes}")

    @property
    def input_state(self) -> tuple[int, ...]:
        """Explicit input, or one photon in each of the first ``photons`` modes."""
        if self.input is not None:
            return self.input
        if self.photons > self.modes:
            raise ValidationError(f"{self.photons} single photons do not fit {self.modes} modes; give an explicit input")
        return (1,) * self.photons + (0,) * (self.modes - self.photons)

    @property
    def readout_model(self):
        return {"none": None, "swap": self.swap, "qnd": self.qnd}[self.readout]

    def replace(self, **changes) -> ExperimentConfig:
        return dataclasses.replace(self, **changes)

    def canonical(self) -> dict:
        """Plain-data view used for the config hash."""
        d = dataclasses.asdict(self)
        if self.unitary != "haar":
            try:
                d["unitary_content"] = Path(self.unitary).read_bytes().hex()
            except OSError:
                pass
        return d


def _ints(text: str, key: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ValidationError(f"{key}: expected comma-separated integers, got {text!r}") from None


def _bool(text: str, key: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValidationError(f"{key}: expected a boolean, got {text!r}")


def _num(text: str, key: str, kind=float):
    try:
        return kind(text.strip())
    except ValueError:
        raise ValidationError(f"{key}: expected {kind.__name__}, got {text!r}") from None


def parse_squeezes(text: str) -> tuple[TwoModeSqueeze, ...]:
    """``i-j:r[:phase]`` items separated by ``;``."""
    out = []
    for item in filter(None, (s.strip() for s in text.split(";"))):
        parts = item.split(":")
        if len(parts) not in (2, 3):
            raise ValidationError(f"squeezes: bad item {item!r}, expected i-j:r[:phase]")
        try:
            i, j = (int(x) for x in parts[0].split("-"))
        except ValueError:
            raise ValidationError(f"squeezes: bad pair {parts[0]!r}") from None
        r = _num(parts[1], "squeezes")
        phase = _num(parts[2], "squeezes") if len(parts) == 3 else 0.0
        out.append(TwoModeSqueeze((i, j), r, phase))
    return tuple(out)


def _check_keys(section: str, keys, allowed):
    unknown = set(keys) - allowed
    if unknown:
        raise ValidationError(f"[{section}] unknown keys: {', '.join(sorted(unknown))}")


def parse_config(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ValidationError(f"config: {exc.message.splitlines()[0]}") from None
    cfg = base or ExperimentConfig()
    changes: dict = {}
    unknown_sections = set(cp.sections()) - {"experiment", "device", "readout", "gaussian", "verify"}
    if unknown_sections:
        raise ValidationError(f"config: unknown sections {sorted(unknown_sections)}")

    ex = cp["experiment"]
    _check_keys("experiment", ex, _EXPERIMENT_KEYS)
    for key in ("modes", "photons", "seed", "samples", "cutoff"):
        if key in ex:
            changes[key] = _num(ex[key], key, int)
    for key in ("depth_coefficient", "r"):
        if key in ex:
            changes[key] = _num(ex[key], key)
    if "input" in ex:
        changes["input"] = _ints(ex["input"], "input") or None
    if "unitary" in ex:
        changes["unitary"] = ex["unitary"].strip()
    if "readout" in ex:
        changes["readout"] = ex["readout"].strip()
    if "loss" in ex:
        changes["loss"] = _bool(ex["loss"], "loss")

    device = cfg.device
    if "convention_phi" in ex:
        conv = ex["convention_phi"].strip()
        if conv not in PHI_CONVENTIONS:
            raise ValidationError(f"convention_phi must be one of {PHI_CONVENTIONS}")
        device = device.replace(phi_convention=conv)
    if cp.has_section("device"):
        names = {f.name: f.type for f in dataclasses.fields(DeviceParams)}
        sec = cp["device"]
        _check_keys("device", sec, set(names))
        over = {k: (sec[k].strip() if k == "phi_convention" else _num(sec[k], k)) for k in sec}
        device = device.replace(**over)
    changes["device"] = device

    if cp.has_section("readout"):
        sec = cp["readout"]
        _check_keys("readout", sec, _READOUT_KEYS)
        q = cfg.qnd
        changes["qnd"] = QndCounter(
            eta=_num(sec["eta"], "eta") if "eta" in sec else q.eta,
            repetitions=_num(sec["repetitions"], "repetitions", int) if "repetitions" in sec else q.repetitions,
            max_n_probe=_num(sec["max_n_probe"], "max_n_probe", int) if "max_n_probe" in sec else q.max_n_probe,
        )
        if "post_select_bunching" in sec:
            changes["swap"] = SwapPhotodetector(_bool(sec["post_select_bunching"], "post_select_bunching"))

    if cp.has_section("gaussian"):
        sec = cp["gaussian"]
        _check_keys("gaussian", sec, _GAUSSIAN_KEYS)
        M = changes.get("modes", cfg.modes)
        if "displacements" in sec:
            try:
                alphas = tuple(complex(x.strip().replace(" ", "")) for x in sec["displacements"].split(","))
            except ValueError:
                raise ValidationError("displacements: expected comma-separated complex numbers") from None
        else:
            alphas = (0j,) * M
        order = sec.get("order", "squeeze_first").strip()
        if order not in ORDERS:
            raise ValidationError(f"order must be one of {ORDERS}")
        changes["gaussian"] = GaussianPrep(alphas, parse_squeezes(sec.get("squeezes", "")), order)

    if cp.has_section("verify"):
        sec = cp["verify"]
        _check_keys("verify", sec, _VERIFY_KEYS)
        if "modes" in sec:
            changes["verify_modes"] = _ints(sec["modes"], "verify.modes")
        if "photons" in sec:
            changes["verify_photons"] = _ints(sec["photons"], "verify.photons")
        if "instances" in sec:
            changes["verify_instances"] = _num(sec["instances"], "verify.instances", int)

    return cfg.replace(**changes)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
