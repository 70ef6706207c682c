"""Interferometer unitaries and their factorisation into adjacent beam splitters and phase shifters.

Matrix convention: ``U[out, in]`` is the single-photon amplitude to leave in
mode ``out`` having entered in mode ``in``.  An element list is applied first
element first, so ``elements_to_unitary([e1, e2]) == W(e2) @ W(e1)``.

A beam splitter of angle ``theta`` on modes (i, i+1) is ``exp(-i theta
(a_i^dag a_{i+1} + h.c.))``; in the one-photon sector this is the block
``[[cos, -i sin], [-i sin, cos]]``.  A phase shifter of phase ``phi`` is
``exp(-i phi n_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ValidationError

TWO_PI = 2 * math.pi
INPUT_UNITARITY_TOL = 1e-8


@dataclass(frozen=True)
class BeamSplitter:
    lower_mode: int
    angle: float

    @property
    def modes(self) -> tuple[int, int]:
        return (self.lower_mode, self.lower_mode + 1)


@dataclass(frozen=True)
class PhaseShifter:
    mode: int
    phase: float

    @property
    def modes(self) -> tuple[int]:
        return (self.mode,)


OpticalElement = Union[BeamSplitter, PhaseShifter]


@dataclass(frozen=True)
class ElementList:
    mode_count: int
    elements: tuple[OpticalElement, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        for e in self.elements:
            _check_element(e, self.mode_count)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    @property
    def beam_splitter_count(self) -> int:
        return sum(isinstance(e, BeamSplitter) for e in self.elements)


def _check_element(e: OpticalElement, M: int):
    if isinstance(e, BeamSplitter):
        if not 0 <= e.lower_mode < M - 1:
            raise ValidationError(f"beam splitter on modes {e.modes} out of range for M={M}")
    elif isinstance(e, PhaseShifter):
        if not 0 <= e.mode < M:
            raise ValidationError(f"phase shifter on mode {e.mode} out of range for M={M}")
    else:
        raise ValidationError(f"unknown optical element {e!r}")


def unitarity_error(U: np.ndarray) -> float:
    U = np.asarray(U)
    return float(np.max(np.abs(U @ U.conj().T - np.eye(len(U)))))


def check_unitary(U, tol: float = INPUT_UNITARITY_TOL) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {U.shape}")
    err = unitarity_error(U)
    if not err <= tol:
        raise ValidationError(f"matrix is not unitary: max |UU^dag - I| = {err:.3e} > {tol:.1e}")
    return U


def haar_random(M: int, seed: int | np.random.Generator | None) -> np.ndarray:
    """Haar-distributed ``M x M`` unitary.

    QR of a complex Ginibre matrix, with the columns rephased by the phases of
    ``diag(R)`` so the result does not depend on the QR sign convention.
    """
    if M < 1:
        raise ValidationError(f"M must be >= 1, got {M}")
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def element_block(e: OpticalElement) -> np.ndarray:
    if isinstance(e, BeamSplitter):
        c, s = math.cos(e.angle), math.sin(e.angle)
        return np.array([[c, -1j * s], [-1j * s, c]])
    return np.array([[np.exp(-1j * e.phase)]])


def single_element_unitary(e: OpticalElement, M: int) -> np.ndarray:
    _check_element(e, M)
    U = np.eye(M, dtype=complex)
    idx = list(e.modes)
    U[np.ix_(idx, idx)] = element_block(e)
    return U


def elements_to_unitary(elements: ElementList | Iterable[OpticalElement], M: int | None = None) -> np.ndarray:
    if isinstance(elements, ElementList):
        M, elements = elements.mode_count, elements.elements
    if M is None:
        raise ValidationError("mode count required for a bare element sequence")
    U = np.eye(M, dtype=complex)
    for e in elements:
        _check_element(e, M)
        idx = list(e.modes)
        # left-multiplying by the element touches only its rows
        U[idx, :] = element_block(e) @ U[idx, :]
    return U


def reck_decompose(U, *, canonical: bool = True, tol: float = INPUT_UNITARITY_TOL) -> ElementList:
    """Triangular (Reck) factorisation using only adjacent-mode beam splitters.

    Row ``i`` of ``U`` is cleared right to left by column operations on
    neighbouring columns ``(j, j+1)``; each operation is undone in the output
    by a phase shifter on ``j`` followed by a beam splitter on ``(j, j+1)``.
    What remains is diagonal and becomes ``M`` trailing phase shifters.
    """
    W = check_unitary(U, tol).copy()
    M = len(W)
    steps: list[OpticalElement] = []
    for i in range(M - 1):
        for j in range(M - 2, i - 1, -1):
            u, v = W[i, j], W[i, j + 1]
            if abs(v) == 0.0:
                theta, alpha = 0.0, 0.0
            else:
                theta = math.atan2(abs(v), abs(u))
                alpha = float(np.angle(1j * v / u)) if abs(u) > 0 else 0.0
            # W <- W T^-1 with T = BS(theta) PS_j(alpha) on columns (j, j+1)
            c, s = math.cos(theta), math.sin(theta)
            t_inv = np.array([[np.exp(1j * alpha) * c, 1j * np.exp(1j * alpha) * s], [1j * s, c]])
            W[:, j : j + 2] = W[:, j : j + 2] @ t_inv
            W[i, j + 1] = 0.0
            steps.append((PhaseShifter(j, alpha % TWO_PI), BeamSplitter(j, theta)))
    out: list[OpticalElement] = []
    # U = D T_L ... T_1, and T_1 acts first
    for ps, bs in steps:
        out += [ps, bs]
    out += [PhaseShifter(k, float(-np.angle(W[k, k])) % TWO_PI) for k in range(M)]
    result = ElementList(M, out)
    return canonicalize(result) if canonical else result


def canonicalize(elements: ElementList, atol: float = 1e-15) -> ElementList:
    """Fold beam-splitter angles into [0, pi/2], reduce phases to [0, 2pi), drop no-ops."""
    M = elements.mode_count
    out: list[OpticalElement] = []
    for e in elements:
        if isinstance(e, PhaseShifter):
            out.append(PhaseShifter(e.mode, e.phase % TWO_PI))
            continue
        j = e.lower_mode
        theta = e.angle % TWO_PI
        pre: list[OpticalElement] = []
        post: list[OpticalElement] = []
        if theta >= math.pi:
            # BS(theta + pi) = -BS(theta)
            theta -= math.pi
            post += [PhaseShifter(j, math.pi), PhaseShifter(j + 1, math.pi)]
        if theta > math.pi / 2:
            # BS(pi - t) = diag(-1, 1) BS(t) diag(1, -1)
            theta = math.pi - theta
            pre.append(PhaseShifter(j + 1, math.pi))
            post.append(PhaseShifter(j, math.pi))
        out += pre + [BeamSplitter(j, theta)] + post
    merged = _merge_phases(out)
    kept = [
        e
        for e in merged
        if not (
            (isinstance(e, BeamSplitter) and abs(e.angle) <= atol)
            or (isinstance(e, PhaseShifter) and min(e.phase, TWO_PI - e.phase) <= atol)
        )
    ]
    return ElementList(M, kept)


def _merge_phases(seq: list[OpticalElement]) -> list[OpticalElement]:
    # Combine consecutive phase shifters on the same mode when nothing in
    # between touches that mode; only fold-generated pairs need this.
    out: list[OpticalElement] = []
    for e in seq:
        if isinstance(e, PhaseShifter):
            for k in range(len(out) - 1, -1, -1):
                prev = out[k]
                if e.mode in prev.modes:
                    if isinstance(prev, PhaseShifter):
                        out[k] = PhaseShifter(e.mode, (prev.phase + e.phase) % TWO_PI)
                        e = None
                    break
            if e is None:
                continue
        out.append(e)
    return out


def max_entry_error(A, B) -> float:
    return float(np.max(np.abs(np.asarray(A) - np.asarray(B))))


def remove_global_phase(A: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Rotate ``A`` by the global phase that best aligns it with ``reference``."""
    overlap = np.vdot(A, reference)
    if abs(overlap) == 0:
        return A
    return A * (overlap / abs(overlap))


def adjacent_only(elements: Sequence[OpticalElement]) -> bool:
    return all(not isinstance(e, BeamSplitter) or e.modes[1] == e.modes[0] + 1 for e in elements)
