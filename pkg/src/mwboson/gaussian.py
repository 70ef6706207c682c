"""Displaced and two-mode-squeezed inputs for generalized boson sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import eval_genlaguerre, gammaln

from .dynamics import Propagator, TwoModeSqueezing, build_hamiltonian, evolve_network
from .errors import ValidationError
from .fock import FockBasis, StateVector, as_mode_tensor, from_mode_tensor
from .interferometer import ElementList
from .sampler import OutputDistribution, QndCounter, ReadoutModel, readout_distribution

PREP_NORM_TOL = 1e-6
PIPELINE_LEAK_TOL = 1e-4
ORDERS = ("squeeze_first", "displace_first")

_DEFAULT_READOUT = QndCounter()


@dataclass(frozen=True)
class TwoModeSqueeze:
    """Pair creation ``exp(-i r (e^{i phase} a^dag b^dag + h.c.))`` on adjacent modes."""

    modes: tuple[int, int]
    r: float
    phase: float = 0.0


@dataclass(frozen=True)
class GaussianPrep:
    displacements: tuple[complex, ...]
    squeezes: tuple[TwoModeSqueeze, ...] = ()
    order: str = "squeeze_first"

    def __post_init__(self):
        object.__setattr__(self, "displacements", tuple(complex(a) for a in self.displacements))
        object.__setattr__(self, "squeezes", tuple(self.squeezes))
        M = len(self.displacements)
        if M < 1:
            raise ValidationError("need at least one mode")
        if self.order not in ORDERS:
            raise ValidationError(f"order must be one of {ORDERS}, got {self.order!r}")
        for s in self.squeezes:
            i, j = s.modes
            if not (0 <= i < M and 0 <= j < M) or abs(i - j) != 1:
                raise ValidationError(f"squeezing pair {s.modes} is not an adjacent pair of {M} modes")
            if s.r < 0:
                raise ValidationError(f"squeeze parameter must be >= 0, got {s.r}")

    @property
    def mode_count(self) -> int:
        return len(self.displacements)

    @classmethod
    def vacuum(cls, mode_count: int) -> GaussianPrep:
        return cls((0j,) * mode_count)


def displacement_matrix(alpha: complex, cutoff: int) -> np.ndarray:
    """Exact ``<m|D(alpha)|n>`` for ``m, n <= cutoff``.

    For ``m >= n`` the element is ``sqrt(n!/m!) alpha^(m-n) e^{-|alpha|^2/2}
    L_n^(m-n)(|alpha|^2)``; the upper triangle follows from ``D(alpha)^dag =
    D(-alpha)``.  Because the entries are exact rather than exponentiated in
    the truncated space, applying this matrix to a state supported below the
    cutoff gives the exact amplitudes there.
    """
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    D = np.zeros((cutoff + 1, cutoff + 1), dtype=complex)
    if alpha == 0:
        return np.eye(cutoff + 1, dtype=complex)
    for m in range(cutoff + 1):
        for n in range(cutoff + 1):
            lo, hi = min(m, n), max(m, n)
            k = hi - lo
            base = (alpha if m >= n else -alpha.conjugate()) ** k
            mag = math.exp(0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - x / 2)
            D[m, n] = mag * base * eval_genlaguerre(lo, k, x)
    return D


def displace(state: StateVector, alphas: Sequence[complex]) -> StateVector:
    """Apply single-mode displacements; mass pushed past the cutoff is leakage."""
    basis = state.basis
    if basis.is_fixed_total or basis.qubit_slots:
        raise ValidationError("displacement needs a photon-only per-mode cutoff basis")
    if len(alphas) != basis.mode_count:
        raise ValidationError(f"{len(alphas)} displacements for {basis.mode_count} modes")
    t = as_mode_tensor(state)
    for mode, a in enumerate(alphas):
        if a == 0:
            continue
        D = displacement_matrix(a, basis.cutoff)
        t = np.moveaxis(np.tensordot(D, t, axes=([1], [mode + 1])), 0, mode + 1)
    amps = from_mode_tensor(basis, t)
    leak = max(0.0, state.norm_sq() - float(np.sum(np.abs(amps) ** 2)))
    return state.with_amplitudes(amps, leak)


def squeeze(state: StateVector, op: TwoModeSqueeze) -> StateVector:
    """Effective pair-creation evolution for unit rate over time ``r``.

    The pair is evolved in a two-mode basis with one buffer level above the
    cutoff and contracted into the state; weight ending in the buffer is
    leakage.  Spectator modes never reach their buffer, so this matches a
    full-basis evolution.
    """
    if op.r == 0:
        return state
    basis = state.basis
    if basis.is_fixed_total or basis.qubit_slots:
        raise ValidationError("squeezing needs a photon-only per-mode cutoff basis")
    i, j = op.modes
    c = basis.cutoff
    pair = FockBasis.per_mode_cutoff(2, c + 1)
    U = Propagator(build_hamiltonian(TwoModeSqueezing((0, 1), 1.0, op.phase), pair)).matrix(op.r)
    n = pair.boson_labels
    # U4[out_i, out_j, in_i, in_j], inputs restricted to the cutoff
    U4 = np.zeros((c + 2, c + 2, c + 2, c + 2), dtype=complex)
    U4[n[:, None, 0], n[:, None, 1], n[None, :, 0], n[None, :, 1]] = U
    U4 = U4[:, :, : c + 1, : c + 1]
    t = as_mode_tensor(state)
    t = np.moveaxis(np.tensordot(U4, t, axes=([2, 3], [i + 1, j + 1])), [0, 1], [i + 1, j + 1])
    keep = (slice(None),) * (i + 1) + (slice(None, c + 1),)
    t = t[keep]
    keep = (slice(None),) * (j + 1) + (slice(None, c + 1),)
    t = t[keep]
    amps = from_mode_tensor(basis, t)
    leak = max(0.0, state.norm_sq() - float(np.sum(np.abs(amps) ** 2)))
    return state.with_amplitudes(amps, leak)


def prepare_gaussian(prep: GaussianPrep, basis: FockBasis) -> StateVector:
    """Vacuum with the configured squeezers and displacements applied.

    Raises
    ------
    ValidationError
        If the cutoff loses more than ``1e-6`` of the norm.
    """
    if basis.is_fixed_total or basis.qubit_slots:
        raise ValidationError("Gaussian inputs need a photon-only per-mode cutoff basis")
    if basis.mode_count != prep.mode_count:
        raise ValidationError(f"prep has {prep.mode_count} modes, basis has {basis.mode_count}")
    state = StateVector.vacuum(basis)
    steps = [lambda s: displace(s, prep.displacements)]
    sq = [lambda s, op=op: squeeze(s, op) for op in prep.squeezes]
    steps = sq + steps if prep.order == "squeeze_first" else steps + sq
    for step in steps:
        state = step(state)
    deficit = 1.0 - state.norm_sq()
    if deficit > PREP_NORM_TOL:
        raise ValidationError(f"cutoff {basis.cutoff} loses {deficit:.3e} of the prepared norm (> {PREP_NORM_TOL:g})")
    return state


def parity_expectation(state: StateVector, mode: int) -> float:
    """``<(-1)^n>`` of one mode."""
    if state.basis.is_fixed_total:
        raise ValidationError("parity needs a per-mode cutoff basis")
    p = state.mode_distribution(mode)
    signs = 1 - 2 * (np.arange(len(p)) % 2)
    return float(signs @ p)


def state_distribution(state: StateVector) -> OutputDistribution:
    labels = state.basis.boson_labels
    entries = {tuple(int(x) for x in lab): float(p) for lab, p in zip(labels, state.probabilities())}
    return OutputDistribution(state.basis.mode_count, None, entries, leakage=state.leakage)


def gaussian_pipeline(prep: GaussianPrep, elements: ElementList, readout: ReadoutModel | None = _DEFAULT_READOUT,
                      *, cutoff: int = 6) -> OutputDistribution:
    """Prepare, interfere and count.

    ``readout=None`` returns the ideal photon-number distribution.  Mass lost
    to truncation is carried in ``leakage``.
    """
    if elements.mode_count != prep.mode_count:
        raise ValidationError(f"network has {elements.mode_count} modes, prep has {prep.mode_count}")
    basis = FockBasis.per_mode_cutoff(prep.mode_count, cutoff)
    state = prepare_gaussian(prep, basis)
    before = state.leakage
    state = evolve_network(elements, state)
    if state.leakage - before > PIPELINE_LEAK_TOL:
        raise ValidationError(
            f"interferometer pushed {state.leakage - before:.3e} past cutoff {cutoff} (> {PIPELINE_LEAK_TOL:g})")
    return readout_distribution(state_distribution(state), readout)
