"""Tab-delimited record files with a ``#`` header.

Every file starts with ``# key: value`` lines (artifact version, command,
config hash, seed, plus file-specific metadata) followed by one
``# columns:`` line.  Writers are deterministic, and each reader returns
exactly what its writer needs to reproduce the file byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .errors import ValidationError
from .interferometer import BeamSplitter, ElementList, PhaseShifter, check_unitary
from .pulses import CouplerOn, PulseSchedule, QubitDetune, QubitDrive
from .sampler import OutputDistribution

Header = dict[str, str]


def config_hash(payload) -> str:
    """First 12 hex digits of the sha256 of canonical JSON."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def make_header(command: str, cfg_hash: str, seed, **extra) -> Header:
    head = {"artifact": f"mwboson {__version__}", "command": command, "config_hash": cfg_hash, "seed": str(seed)}
    head.update({k: str(v) for k, v in extra.items()})
    return head


def _fmt12(x: float) -> str:
    return f"{x:.12g}"


def _write(path: Path, header: Header, columns: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    lines = [f"# {k}: {v}" for k, v in header.items()]
    lines.append("# columns: " + "\t".join(columns))
    lines.extend("\t".join(r) for r in rows)
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def _read(path: Path, columns: Sequence[str]) -> tuple[Header, list[list[str]]]:
    header: Header = {}
    rows: list[list[str]] = []
    seen_columns = None
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            key, sep, value = body.partition(":")
            if not sep:
                raise ValidationError(f"{path}:{lineno}: malformed header line")
            if key == "columns":
                seen_columns = value.strip().split("\t")
            else:
                header[key.strip()] = value.strip()
            continue
        fields = line.split("\t")
        if len(fields) != len(columns):
            raise ValidationError(f"{path}:{lineno}: expected {len(columns)} fields, got {len(fields)}")
        rows.append(fields)
    if seen_columns is not None and seen_columns != list(columns):
        raise ValidationError(f"{path}: columns {seen_columns} != expected {list(columns)}")
    return header, rows


def _float(s: str, where: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ValidationError(f"{where}: not a number: {s!r}") from None


def _int(s: str, where: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ValidationError(f"{where}: not an integer: {s!r}") from None


# -- unitary ------------------------------------------------------------------

UNITARY_COLUMNS = ("row", "col", "re", "im")


def write_unitary(path, U: np.ndarray, header: Header) -> Path:
    U = np.asarray(U, dtype=complex)
    rows = ((str(i), str(j), repr(float(U[i, j].real)), repr(float(U[i, j].imag)))
            for i in range(U.shape[0]) for j in range(U.shape[1]))
    return _write(path, header, UNITARY_COLUMNS, rows)


def read_unitary(path, *, tol: float = 1e-8) -> tuple[Header, np.ndarray]:
    """Read and validate a unitary; raises ValidationError if it is not unitary within ``tol``."""
    header, rows = _read(path, UNITARY_COLUMNS)
    if not rows:
        raise ValidationError(f"{path}: no matrix entries")
    entries = {}
    for r in rows:
        i, j = _int(r[0], str(path)), _int(r[1], str(path))
        if (i, j) in entries:
            raise ValidationError(f"{path}: duplicate entry ({i}, {j})")
        entries[i, j] = complex(_float(r[2], str(path)), _float(r[3], str(path)))
    M = int(math.isqrt(len(entries)))
    if M * M != len(entries) or set(entries) != {(i, j) for i in range(M) for j in range(M)}:
        raise ValidationError(f"{path}: entries do not form a complete square matrix")
    U = np.zeros((M, M), dtype=complex)
    for (i, j), v in entries.items():
        U[i, j] = v
    check_unitary(U, tol)
    return header, U


# -- element list -------------------------------------------------------------

ELEMENT_COLUMNS = ("index", "kind", "mode", "value")


def write_elements(path, elements: ElementList, header: Header) -> Path:
    header = {**header, "modes": str(elements.mode_count)}
    rows = []
    for k, e in enumerate(elements):
        if isinstance(e, BeamSplitter):
            rows.append((str(k), "BS", str(e.lower_mode), repr(float(e.angle))))
        else:
            rows.append((str(k), "PS", str(e.mode), repr(float(e.phase))))
    return _write(path, header, ELEMENT_COLUMNS, rows)


def read_elements(path) -> tuple[Header, ElementList]:
    header, rows = _read(path, ELEMENT_COLUMNS)
    if "modes" not in header:
        raise ValidationError(f"{path}: missing 'modes' header")
    M = _int(header["modes"], str(path))
    out = []
    for r in rows:
        mode, value = _int(r[2], str(path)), _float(r[3], str(path))
        if r[1] == "BS":
            out.append(BeamSplitter(mode, value))
        elif r[1] == "PS":
            out.append(PhaseShifter(mode, value))
        else:
            raise ValidationError(f"{path}: unknown element kind {r[1]!r}")
    return header, ElementList(M, out)


# -- pulse schedule -----------------------------------------------------------

SCHEDULE_COLUMNS = ("layer", "kind", "targets", "flux_phi0", "duration_ns", "rotation")


def write_schedule(path, schedule: PulseSchedule, header: Header) -> Path:
    header = {**header, "modes": str(schedule.mode_count), "depth": str(schedule.depth)}
    rows = []
    for k, ins in schedule.instructions():
        if isinstance(ins, CouplerOn):
            rows.append((str(k), "coupler", f"{ins.pair[0]},{ins.pair[1]}", _fmt12(ins.flux),
                         _fmt12(ins.duration * 1e9), "-"))
        elif isinstance(ins, QubitDetune):
            flux = "-" if ins.flux is None else _fmt12(ins.flux)
            rows.append((str(k), "detune", str(ins.qubit), flux, _fmt12(ins.duration * 1e9), "-"))
        else:
            rows.append((str(k), "drive", str(ins.qubit), "-", _fmt12(ins.duration * 1e9), _fmt12(ins.rotation)))
    return _write(path, header, SCHEDULE_COLUMNS, rows)


def read_schedule(path) -> tuple[Header, PulseSchedule]:
    header, rows = _read(path, SCHEDULE_COLUMNS)
    if "modes" not in header:
        raise ValidationError(f"{path}: missing 'modes' header")
    M = _int(header["modes"], str(path))
    layers: list[list] = []
    for r in rows:
        k = _int(r[0], str(path))
        if k < len(layers) - 1 or k < 0:
            raise ValidationError(f"{path}: layer indices must be non-decreasing")
        while len(layers) <= k:
            layers.append([])
        duration = _float(r[4], str(path)) * 1e-9
        if r[1] == "coupler":
            i, j = (_int(x, str(path)) for x in r[2].split(","))
            ins = CouplerOn((i, j), _float(r[3], str(path)), duration)
        elif r[1] == "detune":
            flux = None if r[3] == "-" else _float(r[3], str(path))
            ins = QubitDetune(_int(r[2], str(path)), flux, duration)
        elif r[1] == "drive":
            ins = QubitDrive(_int(r[2], str(path)), _float(r[5], str(path)), duration)
        else:
            raise ValidationError(f"{path}: unknown instruction kind {r[1]!r}")
        layers[k].append(ins)
    return header, PulseSchedule(M, layers)


# -- distributions and samples ------------------------------------------------

DISTRIBUTION_COLUMNS = ("outcome", "probability")
COUNT_COLUMNS = ("outcome", "count")
SAMPLE_COLUMNS = ("shot", "true_outcome", "reported", "accepted")


def _occ(o) -> str:
    return ",".join(str(int(x)) for x in o)


def _parse_occ(s: str, where: str) -> tuple[int, ...]:
    return tuple(_int(x, where) for x in s.split(","))


def write_distribution(path, dist: OutputDistribution, header: Header) -> Path:
    header = {**header, "modes": str(dist.mode_count),
              "photons": "-" if dist.photon_count is None else str(dist.photon_count),
              "rejected": _fmt12(dist.rejected), "leakage": _fmt12(dist.leakage)}
    rows = ((_occ(k), _fmt12(p)) for k, p in dist.entries.items())
    return _write(path, header, DISTRIBUTION_COLUMNS, rows)


def read_distribution(path) -> tuple[Header, OutputDistribution]:
    header, rows = _read(path, DISTRIBUTION_COLUMNS)
    try:
        M = int(header["modes"])
        N = None if header["photons"] == "-" else int(header["photons"])
        rejected, leakage = float(header["rejected"]), float(header["leakage"])
    except (KeyError, ValueError):
        raise ValidationError(f"{path}: incomplete distribution header") from None
    entries = {_parse_occ(r[0], str(path)): _float(r[1], str(path)) for r in rows}
    return header, OutputDistribution(M, N, entries, rejected, leakage)


def write_counts(path, counts: dict, header: Header) -> Path:
    return _write(path, header, COUNT_COLUMNS, ((_occ(k), str(v)) for k, v in counts.items()))


def write_samples(path, records: Iterable[tuple], header: Header) -> Path:
    """Records are ``(true_outcome, reported_outcome, accepted)``."""
    rows = ((str(i), _occ(t), _occ(r), "1" if ok else "0") for i, (t, r, ok) in enumerate(records))
    return _write(path, header, SAMPLE_COLUMNS, rows)


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence], header: Header) -> Path:
    """Generic table; floats go out at 12 significant digits."""
    def cell(v):
        if isinstance(v, float):
            return _fmt12(v)
        return str(v)
    return _write(path, header, columns, ([cell(v) for v in r] for r in rows))
