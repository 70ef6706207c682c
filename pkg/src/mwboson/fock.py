"""Truncated Fock spaces of bosonic modes, optionally tensored with qubits.

Two truncations are supported:

* ``FockBasis.fixed_total(M, N)`` -- the N-photon sector, dimension C(N+M-1, N).
* ``FockBasis.per_mode_cutoff(M, n_max)`` -- at most ``n_max`` photons per mode,
  dimension (n_max+1)**M.

Bosonic labels are ordered lexicographically descending, so for the
two-photon, three-mode sector the order is (2,0,0), (1,1,0), (1,0,1),
(0,2,0), (0,1,1), (0,0,2).  Qubit patterns are the most significant part of
the full index: ``index = qubit_pattern * boson_dim + boson_index`` with qubit 0
the leading bit and ``0 = |g>``, ``1 = |e>``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import ResourceCapError, ValidationError

DEFAULT_DIM_LIMIT = 2_000_000

Occupation = tuple[int, ...]


class BasisLabel(NamedTuple):
    counts: Occupation
    qubits: tuple[int, ...] = ()


@dataclass(frozen=True)
class FockBasis:
    """Basis specification.  Exactly one of ``total`` / ``cutoff`` is set."""

    mode_count: int
    total: int | None = None
    cutoff: int | None = None
    qubit_slots: int = 0
    dim_limit: int = field(default=DEFAULT_DIM_LIMIT, compare=False, repr=False)

    def __post_init__(self):
        if self.mode_count < 1:
            raise ValidationError(f"mode_count must be >= 1, got {self.mode_count}")
        if (self.total is None) == (self.cutoff is None):
            raise ValidationError("exactly one of total / cutoff must be given")
        if self.total is not None and self.total < 0:
            raise ValidationError(f"photon total must be >= 0, got {self.total}")
        if self.cutoff is not None and self.cutoff < 0:
            raise ValidationError(f"cutoff must be >= 0, got {self.cutoff}")
        if self.qubit_slots < 0:
            raise ValidationError("qubit_slots must be >= 0")

    @classmethod
    def fixed_total(cls, mode_count: int, total: int, qubit_slots: int = 0, **kw) -> FockBasis:
        return cls(mode_count, total=total, qubit_slots=qubit_slots, **kw)

    @classmethod
    def per_mode_cutoff(cls, mode_count: int, cutoff: int, qubit_slots: int = 0, **kw) -> FockBasis:
        return cls(mode_count, cutoff=cutoff, qubit_slots=qubit_slots, **kw)

    @property
    def is_fixed_total(self) -> bool:
        return self.total is not None

    @property
    def boson_dim(self) -> int:
        if self.total is not None:
            return math.comb(self.total + self.mode_count - 1, self.total)
        return (self.cutoff + 1) ** self.mode_count

    @property
    def qubit_dim(self) -> int:
        return 2**self.qubit_slots

    @property
    def dim(self) -> int:
        return self.boson_dim * self.qubit_dim

    def with_cutoff(self, cutoff: int) -> FockBasis:
        return FockBasis(self.mode_count, cutoff=cutoff, qubit_slots=self.qubit_slots, dim_limit=self.dim_limit)

    @cached_property
    def boson_labels(self) -> np.ndarray:
        """``(boson_dim, mode_count)`` integer array of occupations in canonical order."""
        if self.dim > self.dim_limit:
            raise ResourceCapError(
                f"basis dimension {self.dim} exceeds limit {self.dim_limit}"
            )
        if self.total is not None:
            rows = list(_compositions_desc(self.total, self.mode_count))
        else:
            rows = list(itertools.product(range(self.cutoff, -1, -1), repeat=self.mode_count))
        arr = np.array(rows, dtype=np.int64).reshape(len(rows), self.mode_count)
        arr.flags.writeable = False
        return arr

    @cached_property
    def total_photons(self) -> np.ndarray:
        """Photon number of every full-basis state."""
        return np.tile(self.boson_labels.sum(axis=1), self.qubit_dim)

    @cached_property
    def _pascal(self) -> np.ndarray:
        n = (self.total or 0) + self.mode_count + 1
        table = np.zeros((n + 1, n + 1), dtype=np.int64)
        for a in range(n + 1):
            for b in range(a + 1):
                table[a, b] = math.comb(a, b)
        return table

    def boson_rank(self, counts: np.ndarray) -> np.ndarray:
        """Vectorised canonical index of admissible occupation rows (no validation)."""
        counts = np.atleast_2d(np.asarray(counts, dtype=np.int64))
        M = self.mode_count
        if self.cutoff is not None:
            weights = (self.cutoff + 1) ** np.arange(M - 1, -1, -1, dtype=np.int64)
            return ((self.cutoff - counts) * weights).sum(axis=1)
        # Number of compositions preceding the label: at position i with r photons
        # left over k = M - i parts, every larger first part contributes
        # C(r - n_i - 1 + k - 1, k - 1) earlier labels.
        remaining = self.total - np.concatenate(
            [np.zeros((counts.shape[0], 1), dtype=np.int64), np.cumsum(counts, axis=1)[:, :-1]], axis=1
        )
        top = remaining - counts - 1 + (M - 1 - np.arange(M))
        bottom = np.broadcast_to(M - 1 - np.arange(M), top.shape)
        valid = remaining - counts - 1 >= 0
        vals = np.where(valid, self._pascal[np.where(valid, top, 0), bottom], 0)
        return vals.sum(axis=1)

    def admissible(self, counts: np.ndarray) -> np.ndarray:
        counts = np.atleast_2d(counts)
        ok = (counts >= 0).all(axis=1)
        if self.cutoff is not None:
            ok &= (counts <= self.cutoff).all(axis=1)
        else:
            ok &= counts.sum(axis=1) == self.total
        return ok


def _compositions_desc(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions_desc(total - first, parts - 1):
            yield (first,) + rest


def _qubit_patterns(slots: int):
    return list(itertools.product((0, 1), repeat=slots))


def enumerate_basis(basis: FockBasis) -> list[BasisLabel]:
    """All basis labels in canonical order."""
    bos = [tuple(int(x) for x in row) for row in basis.boson_labels]
    return [BasisLabel(b, q) for q in _qubit_patterns(basis.qubit_slots) for b in bos]


def index_of(basis: FockBasis, counts: Sequence[int] | BasisLabel, qubits: Sequence[int] = ()) -> int:
    """Inverse of :func:`enumerate_basis`, O(M) per call."""
    if isinstance(counts, BasisLabel):
        counts, qubits = counts
    counts = tuple(int(c) for c in counts)
    qubits = tuple(int(q) for q in qubits)
    if len(counts) != basis.mode_count:
        raise ValidationError(f"label {counts} has {len(counts)} modes, basis has {basis.mode_count}")
    if len(qubits) != basis.qubit_slots:
        raise ValidationError(f"label needs {basis.qubit_slots} qubit bits, got {len(qubits)}")
    if any(q not in (0, 1) for q in qubits):
        raise ValidationError(f"qubit bits must be 0/1, got {qubits}")
    if not basis.admissible(np.array(counts))[0]:
        raise ValidationError(f"label {counts} is not in basis {basis}")
    pattern = 0
    for q in qubits:
        pattern = 2 * pattern + q
    return pattern * basis.boson_dim + int(basis.boson_rank(np.array(counts))[0])


@dataclass(frozen=True)
class StateVector:
    basis: FockBasis
    amplitudes: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise ValidationError(f"amplitude shape {amps.shape} does not match basis dim {self.basis.dim}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_label(cls, basis: FockBasis, counts: Sequence[int], qubits: Sequence[int] = ()) -> StateVector:
        amps = np.zeros(basis.dim, dtype=complex)
        amps[index_of(basis, counts, qubits)] = 1.0
        return cls(basis, amps)

    @classmethod
    def vacuum(cls, basis: FockBasis) -> StateVector:
        return cls.from_label(basis, (0,) * basis.mode_count, (0,) * basis.qubit_slots)

    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def amplitude(self, counts: Sequence[int], qubits: Sequence[int] = ()) -> complex:
        return complex(self.amplitudes[index_of(self.basis, counts, qubits)])

    def mode_distribution(self, mode: int) -> np.ndarray:
        """Marginal photon-number distribution of one mode."""
        labels = np.tile(self.basis.boson_labels[:, mode], self.basis.qubit_dim)
        return np.bincount(labels, weights=self.probabilities(), minlength=int(labels.max()) + 1)

    def mean_photons(self, mode: int | None = None) -> float:
        labels = self.basis.boson_labels
        n = labels.sum(axis=1) if mode is None else labels[:, mode]
        return float(np.tile(n, self.basis.qubit_dim) @ self.probabilities())

    def with_amplitudes(self, amplitudes: np.ndarray, extra_leakage: float = 0.0) -> StateVector:
        return StateVector(self.basis, amplitudes, self.leakage + extra_leakage)


# -- operators ---------------------------------------------------------------


def _check_mode(basis: FockBasis, mode: int):
    if not 0 <= mode < basis.mode_count:
        raise ValidationError(f"mode {mode} out of range for {basis.mode_count} modes")


def _monomial_map(basis: FockBasis, create: Iterable[int], annihilate: Iterable[int]):
    """Rows, cols, coefficients of a normal-ordered boson monomial on the bosonic factor.

    Also returns the per-column coefficient that fell outside the truncation
    (non-zero only at a per-mode cutoff).
    """
    labels = basis.boson_labels.copy()
    coef = np.ones(len(labels))
    for m in annihilate:
        _check_mode(basis, m)
        coef *= np.sqrt(np.clip(labels[:, m], 0, None))
        labels[:, m] -= 1
    for m in create:
        _check_mode(basis, m)
        labels[:, m] += 1
        coef *= np.sqrt(np.clip(labels[:, m], 0, None))
    live = coef != 0
    if basis.is_fixed_total:
        if (labels[live].sum(axis=1) != basis.total).any():
            raise ValidationError(
                "operator does not conserve photon number; use a per-mode cutoff basis"
            )
    inside = live & basis.admissible(labels)
    dropped = np.where(live & ~inside, coef, 0.0)
    cols = np.nonzero(inside)[0]
    rows = basis.boson_rank(labels[inside]) if len(cols) else np.zeros(0, dtype=np.int64)
    return rows, cols, coef[inside], dropped


def boson_operator(basis: FockBasis, create: Sequence[int] = (), annihilate: Sequence[int] = ()) -> sp.csr_matrix:
    """Sparse matrix of ``prod(a_c^dag) prod(a_a)`` acting on the full basis."""
    rows, cols, vals, _ = _monomial_map(basis, create, annihilate)
    d = basis.boson_dim
    op = sp.csr_matrix((vals.astype(complex), (rows, cols)), shape=(d, d))
    if basis.qubit_slots:
        op = sp.kron(sp.identity(basis.qubit_dim, format="csr"), op, format="csr")
    return op


def number_operator(basis: FockBasis, mode: int) -> sp.csr_matrix:
    _check_mode(basis, mode)
    diag = np.tile(basis.boson_labels[:, mode], basis.qubit_dim).astype(complex)
    return sp.diags(diag, format="csr")


_SIGMA = {
    "sz": np.diag([-1.0, 1.0]),
    "sp": np.array([[0.0, 0.0], [1.0, 0.0]]),
    "sm": np.array([[0.0, 1.0], [0.0, 0.0]]),
}


def qubit_operator(basis: FockBasis, slot: int, which: str) -> sp.csr_matrix:
    """Pauli-type operator on one qubit slot: ``sz``, ``sp`` (|g>->|e>) or ``sm``."""
    if not 0 <= slot < basis.qubit_slots:
        raise ValidationError(f"qubit slot {slot} absent (basis has {basis.qubit_slots})")
    factors = [sp.identity(2, format="csr")] * basis.qubit_slots
    factors[slot] = sp.csr_matrix(_SIGMA[which])
    op = factors[0]
    for f in factors[1:]:
        op = sp.kron(op, f, format="csr")
    return sp.kron(op, sp.identity(basis.boson_dim, format="csr"), format="csr").astype(complex)


def apply_ladder(state: StateVector, mode: int, kind: str) -> StateVector:
    """Apply ``a`` (``kind='annihilation'``) or ``a^dag`` (``'creation'``) to one mode.

    Amplitude pushed above a per-mode cutoff is dropped and its squared norm
    added to ``leakage``.
    """
    basis = state.basis
    if basis.is_fixed_total:
        raise ValidationError("ladder operators leave a fixed-photon-number sector")
    if kind not in ("creation", "annihilation"):
        raise ValidationError(f"kind must be 'creation' or 'annihilation', got {kind!r}")
    create, annihilate = ((mode,), ()) if kind == "creation" else ((), (mode,))
    rows, cols, vals, dropped = _monomial_map(basis, create, annihilate)
    d = basis.boson_dim
    amps = state.amplitudes.reshape(basis.qubit_dim, d)
    out = np.zeros_like(amps)
    np.add.at(out, (slice(None), rows), amps[:, cols] * vals)
    leak = float((np.abs(amps) ** 2 @ dropped**2).sum())
    return state.with_amplitudes(out.reshape(-1), leak)


def as_mode_tensor(state: StateVector) -> np.ndarray:
    """Amplitudes of a per-mode-cutoff state as an array indexed ``[q, n_0, ..., n_{M-1}]``."""
    basis = state.basis
    if basis.is_fixed_total:
        raise ValidationError("tensor view needs a per-mode cutoff basis")
    shape = (basis.qubit_dim,) + (basis.cutoff + 1,) * basis.mode_count
    t = state.amplitudes.reshape(shape)
    return t[(slice(None),) + (slice(None, None, -1),) * basis.mode_count]


def from_mode_tensor(basis: FockBasis, tensor: np.ndarray) -> np.ndarray:
    """Inverse of :func:`as_mode_tensor`; returns flat amplitudes."""
    t = tensor[(slice(None),) + (slice(None, None, -1),) * basis.mode_count]
    return np.ascontiguousarray(t).reshape(-1)
