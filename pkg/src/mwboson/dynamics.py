"""Hamiltonians of the circuit-QED building blocks and exact state evolution (hbar = 1).

Time-independent Hamiltonians are exponentiated through a Hermitian
eigendecomposition.  The flux-modulated coupler is integrated in the
interaction picture of the bare resonators with a fourth-order Magnus
stepper; the step count doubles until two successive runs agree.

On a per-mode-cutoff basis every evolution runs with one extra buffer level
per mode.  The population that reaches the buffer is reported as
``truncation_leakage`` and removed from the returned state, so
``norm + leakage == 1`` up to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .errors import ConvergenceError, ValidationError
from .fock import FockBasis, StateVector, boson_operator, number_operator, qubit_operator

DENSE_LIMIT = 4096


@dataclass(frozen=True)
class JaynesCummings:
    """``omega_s n + Omega/2 sz + g (s+ a + s- a^dag)``."""

    qubit: int
    resonator: int
    Omega: float
    omega_s: float
    g: float


@dataclass(frozen=True)
class Dispersive:
    """Large-detuning limit of :class:`JaynesCummings`.

    ``(omega_s + chi sz) n + (Omega + chi)/2 sz`` with ``chi = g^2/Delta`` and
    ``Delta = Omega - omega_s``.  This sign is what second-order perturbation
    theory gives for that definition of Delta.
    """

    qubit: int
    resonator: int
    omega_s: float
    Omega: float
    g: float

    @property
    def detuning(self) -> float:
        return self.Omega - self.omega_s

    @property
    def chi(self) -> float:
        return self.g**2 / self.detuning

    @property
    def ratio(self) -> float:
        return self.g / self.detuning


@dataclass(frozen=True)
class BeamSplitterRWA:
    modes: tuple[int, int]
    g: float


@dataclass(frozen=True)
class PhaseShifterH:
    mode: int
    phi: float


@dataclass(frozen=True)
class TwoModeSqueezing:
    """``g (e^{i phase} a^dag b^dag + h.c.)``, the resonant part of a modulated coupler."""

    modes: tuple[int, int]
    g: float
    phase: float = 0.0


@dataclass(frozen=True)
class FluxDrive:
    """Coupler flux ``bias + amplitude cos(frequency t)`` in units of Phi_0."""

    bias: float = 0.0
    amplitude: float = 0.0
    frequency: float = 0.0

    @property
    def static(self) -> bool:
        return self.amplitude == 0.0

    def __call__(self, t):
        return self.bias + self.amplitude * np.cos(self.frequency * t)


@dataclass(frozen=True)
class QuadratureCoupling:
    """Lab-frame ``w1 n1 + w2 n2 + g(Phi(t)) (a1 + a1^dag)(a2 + a2^dag)``.

    ``g(Phi) = g_bs cos(2 pi Phi)`` with Phi in units of Phi_0.
    """

    modes: tuple[int, int]
    g_bs: float
    flux: FluxDrive = FluxDrive()
    frequencies: tuple[float, float] = (0.0, 0.0)

    def coupling(self, t):
        return self.g_bs * np.cos(2 * math.pi * self.flux(t))


HamiltonianSpec = Union[JaynesCummings, Dispersive, BeamSplitterRWA, PhaseShifterH, TwoModeSqueezing, QuadratureCoupling]


@dataclass(frozen=True)
class EvolutionResult:
    final_state: StateVector
    truncation_leakage: float
    step_count: int


def _check_qubit(basis: FockBasis, q: int):
    if not 0 <= q < basis.qubit_slots:
        raise ValidationError(f"Hamiltonian references qubit {q}; basis has {basis.qubit_slots}")


def _check_modes(basis: FockBasis, *modes: int):
    for m in modes:
        if not 0 <= m < basis.mode_count:
            raise ValidationError(f"Hamiltonian references mode {m}; basis has {basis.mode_count}")
    if len(set(modes)) != len(modes):
        raise ValidationError(f"repeated mode in {modes}")


def _static_and_coupling(spec: QuadratureCoupling, basis: FockBasis):
    i, j = spec.modes
    _check_modes(basis, i, j)
    w1, w2 = spec.frequencies
    h0 = w1 * number_operator(basis, i) + w2 * number_operator(basis, j)
    x = boson_operator(basis, (i, j)) + boson_operator(basis, (i,), (j,))
    x = x + x.conj().T
    return h0.tocsr(), x.tocsr()


def build_hamiltonian(spec: HamiltonianSpec, basis: FockBasis, t: float = 0.0) -> sp.csr_matrix:
    """Sparse Hermitian matrix of ``spec`` on ``basis`` at time ``t``."""
    if isinstance(spec, PhaseShifterH):
        _check_modes(basis, spec.mode)
        return (spec.phi * number_operator(basis, spec.mode)).tocsr()
    if isinstance(spec, BeamSplitterRWA):
        i, j = spec.modes
        _check_modes(basis, i, j)
        hop = boson_operator(basis, (i,), (j,))
        return (spec.g * (hop + hop.conj().T)).tocsr()
    if isinstance(spec, TwoModeSqueezing):
        i, j = spec.modes
        _check_modes(basis, i, j)
        pair = np.exp(1j * spec.phase) * boson_operator(basis, (i, j))
        return (spec.g * (pair + pair.conj().T)).tocsr()
    if isinstance(spec, (JaynesCummings, Dispersive)):
        _check_qubit(basis, spec.qubit)
        _check_modes(basis, spec.resonator)
        n = number_operator(basis, spec.resonator)
        sz = qubit_operator(basis, spec.qubit, "sz")
        if isinstance(spec, JaynesCummings):
            a = boson_operator(basis, (), (spec.resonator,))
            ex = qubit_operator(basis, spec.qubit, "sp") @ a
            return (spec.omega_s * n + 0.5 * spec.Omega * sz + spec.g * (ex + ex.conj().T)).tocsr()
        chi = spec.chi
        return (spec.omega_s * n + chi * (sz @ n) + 0.5 * (spec.Omega + chi) * sz).tocsr()
    if isinstance(spec, QuadratureCoupling):
        h0, x = _static_and_coupling(spec, basis)
        return (h0 + float(spec.coupling(t)) * x).tocsr()
    raise ValidationError(f"unknown Hamiltonian spec {spec!r}")


def is_time_dependent(spec: HamiltonianSpec) -> bool:
    return isinstance(spec, QuadratureCoupling) and not spec.flux.static


class Propagator:
    """Spectral propagator ``t -> exp(-i H t)`` for a fixed Hermitian matrix."""

    def __init__(self, H):
        H = H.toarray() if sp.issparse(H) else np.asarray(H)
        self.energies, self.vectors = la.eigh(H)

    def apply(self, psi: np.ndarray, t: float) -> np.ndarray:
        coeff = self.vectors.conj().T @ psi
        return self.vectors @ (np.exp(-1j * self.energies * t) * coeff)

    def matrix(self, t: float) -> np.ndarray:
        return (self.vectors * np.exp(-1j * self.energies * t)) @ self.vectors.conj().T


def _buffered(state: StateVector):
    """Embed a cutoff state into a basis with one extra level per mode."""
    basis = state.basis
    big = basis.with_cutoff(basis.cutoff + 1)
    keep = np.nonzero((big.boson_labels <= basis.cutoff).all(axis=1))[0]
    idx = np.concatenate([q * big.boson_dim + keep for q in range(basis.qubit_dim)])
    amps = np.zeros(big.dim, dtype=complex)
    amps[idx] = state.amplitudes
    return big, idx, amps


def evolve(spec: HamiltonianSpec, state: StateVector, duration: float, *, tol: float = 1e-8,
           max_steps: int = 2**18) -> EvolutionResult:
    """Evolve ``state`` under ``spec`` for ``duration``."""
    if duration < 0:
        raise ValidationError(f"duration must be >= 0, got {duration}")
    basis = state.basis
    if basis.is_fixed_total and isinstance(spec, (JaynesCummings, TwoModeSqueezing, QuadratureCoupling)):
        raise ValidationError(f"{type(spec).__name__} does not conserve photon number; use a cutoff basis")
    if duration == 0:
        build_hamiltonian(spec, basis)  # validates references
        return EvolutionResult(state, 0.0, 0)

    if basis.is_fixed_total:
        work_basis, idx, psi = basis, None, state.amplitudes.copy()
    else:
        work_basis, idx, psi = _buffered(state)

    if is_time_dependent(spec):
        psi, steps = _magnus_evolve(spec, work_basis, psi, duration, tol, max_steps)
    else:
        H = build_hamiltonian(spec, work_basis)
        if work_basis.dim <= DENSE_LIMIT:
            psi = Propagator(H).apply(psi, duration)
        else:
            psi = expm_multiply(-1j * duration * H.tocsc(), psi)
        steps = 1

    leak = 0.0
    if idx is not None:
        leak = max(0.0, float(np.sum(np.abs(psi) ** 2) - np.sum(np.abs(psi[idx]) ** 2)))
        psi = psi[idx]
    final = StateVector(basis, psi, state.leakage + leak)
    return EvolutionResult(final, leak, steps)


_GAUSS = math.sqrt(3) / 6


def _magnus_run(h0_diag, x, coupling: Callable, psi0, duration, n_steps):
    # interaction picture of the diagonal part: X_I(t)_jk = X_jk exp(i (e_j - e_k) t)
    h = duration / n_steps
    t0 = np.arange(n_steps) * h
    t1, t2 = t0 + (0.5 - _GAUSS) * h, t0 + (0.5 + _GAUSS) * h
    de = h0_diag[:, None] - h0_diag[None, :]
    psi = psi0.copy()
    chunk = max(1, 2**20 // max(1, x.size))
    for start in range(0, n_steps, chunk):
        sl = slice(start, min(n_steps, start + chunk))
        H1 = coupling(t1[sl])[:, None, None] * x * np.exp(1j * de * t1[sl][:, None, None])
        H2 = coupling(t2[sl])[:, None, None] * x * np.exp(1j * de * t2[sl][:, None, None])
        # Omega = -i K with K Hermitian
        K = 0.5 * h * (H1 + H2) - 1j * (math.sqrt(3) / 12) * h * h * (H2 @ H1 - H1 @ H2)
        E, V = np.linalg.eigh(K)
        for k in range(len(E)):
            psi = V[k] @ (np.exp(-1j * E[k]) * (V[k].conj().T @ psi))
    return psi


def _magnus_evolve(spec: QuadratureCoupling, basis: FockBasis, psi, duration, tol, max_steps):
    h0, x = _static_and_coupling(spec, basis)
    h0_diag = h0.diagonal().real
    # only states connected to the initial support matter
    reach = _reachable(x, np.nonzero(np.abs(psi) > 0)[0])
    xs = x[reach][:, reach].toarray()
    d = h0_diag[reach]
    fastest = float(np.max(np.abs(d[:, None] - d[None, :]), initial=0.0)) + abs(spec.flux.frequency) * (1 + 2 * math.pi * abs(spec.flux.amplitude))
    n = max(16, int(math.ceil(duration * (fastest + spec.g_bs * 10) / 2)))
    prev = _magnus_run(d, xs, spec.coupling, psi[reach], duration, n)
    while True:
        n *= 2
        if n > max_steps:
            raise ConvergenceError(f"Magnus stepping did not reach tol={tol:g} within {max_steps} steps")
        cur = _magnus_run(d, xs, spec.coupling, psi[reach], duration, n)
        if np.linalg.norm(cur - prev) < tol:
            break
        prev = cur
    out = np.zeros_like(psi)
    # back to the lab frame
    out[reach] = np.exp(-1j * d * duration) * cur
    return out, n


def _reachable(op: sp.csr_matrix, seeds) -> np.ndarray:
    adj = (abs(op) > 0).astype(np.int8).tocsr()
    seen = np.zeros(op.shape[0], dtype=bool)
    seen[seeds] = True
    frontier = seen.copy()
    while frontier.any():
        nxt = (adj @ frontier.astype(np.int8)) > 0
        frontier = nxt & ~seen
        seen |= nxt
    return np.nonzero(seen)[0]


# -- optical networks on photon-number sectors --------------------------------


def element_spec(e) -> HamiltonianSpec:
    """Unit-time Hamiltonian whose propagator is the optical element."""
    from .interferometer import BeamSplitter, PhaseShifter

    if isinstance(e, BeamSplitter):
        return BeamSplitterRWA(e.modes, e.angle)
    if isinstance(e, PhaseShifter):
        return PhaseShifterH(e.mode, e.phase)
    raise ValidationError(f"unknown element {e!r}")


def sector_unitary(spec: HamiltonianSpec, basis: FockBasis, duration: float) -> np.ndarray:
    if not basis.is_fixed_total:
        raise ValidationError("sector unitaries need a fixed-total basis")
    return Propagator(build_hamiltonian(spec, basis)).matrix(duration)


def network_sector_unitary(elements, photons: int) -> np.ndarray:
    """Unitary of an element list on the ``photons``-photon Fock sector."""
    basis = FockBasis.fixed_total(elements.mode_count, photons)
    U = np.eye(basis.dim, dtype=complex)
    for e in elements:
        U = sector_unitary(element_spec(e), basis, 1.0) @ U
    return U


def _pair_blocks(labels: np.ndarray, i: int, j: int) -> list[tuple[int, np.ndarray]]:
    """Group sector rows that differ only in how ``n_i + n_j`` is split.

    Returns ``(s, idx)`` pairs where ``idx[g, a]`` is the row with ``n_i = a``
    in group ``g`` of pair total ``s``.
    """
    s = labels[:, i] + labels[:, j]
    rest = np.delete(labels, [i, j], axis=1)
    _, group = np.unique(np.column_stack([rest, s]), axis=0, return_inverse=True)
    group = group.reshape(-1)
    blocks = []
    for total in np.unique(s):
        rows = np.nonzero(s == total)[0]
        _, local = np.unique(group[rows], return_inverse=True)
        idx = np.empty((local.max() + 1, total + 1), dtype=np.int64)
        idx[local.reshape(-1), labels[rows, i]] = rows
        blocks.append((int(total), idx))
    return blocks


def _beam_splitter_block(angle: float, total: int) -> np.ndarray:
    """Beam splitter on ``total`` photons in two modes, indexed by the first mode's occupation."""
    pair = FockBasis.fixed_total(2, total)
    U = Propagator(build_hamiltonian(BeamSplitterRWA((0, 1), angle), pair)).matrix(1.0)
    order = pair.boson_labels[:, 0]
    B = np.empty_like(U)
    B[np.ix_(order, order)] = U
    return B


def _apply_elements(elements, labels: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """Apply an element list to amplitudes over a fixed-total set of occupation rows."""
    from .interferometer import BeamSplitter, PhaseShifter

    vec = vec.copy()
    blocks: dict[int, list] = {}
    for e in elements:
        if isinstance(e, PhaseShifter):
            vec *= np.exp(-1j * e.phase * labels[:, e.mode])
        elif isinstance(e, BeamSplitter):
            if e.lower_mode not in blocks:
                blocks[e.lower_mode] = _pair_blocks(labels, *e.modes)
            for total, idx in blocks[e.lower_mode]:
                if total:
                    vec[idx] = vec[idx] @ _beam_splitter_block(e.angle, total).T
        else:
            raise ValidationError(f"unknown element {e!r}")
    return vec


def evolve_network(elements, state: StateVector) -> StateVector:
    """Apply a passive network exactly, one photon-number sector at a time.

    Each element only mixes the two modes it touches, so it is applied as
    small blocks over the pair occupation.  On a per-mode-cutoff basis,
    amplitude that would put more than ``cutoff`` photons in a mode is dropped
    and counted as leakage.
    """
    basis = state.basis
    if basis.qubit_slots:
        raise ValidationError("network evolution acts on photons only")
    if elements.mode_count != basis.mode_count:
        raise ValidationError(f"network has {elements.mode_count} modes, basis has {basis.mode_count}")
    if basis.is_fixed_total:
        return state.with_amplitudes(_apply_elements(elements, basis.boson_labels, state.amplitudes))
    labels = basis.boson_labels
    totals = labels.sum(axis=1)
    out = np.zeros(basis.dim, dtype=complex)
    leak = 0.0
    for N in np.unique(totals[np.abs(state.amplitudes) > 0]):
        rows = np.nonzero(totals == N)[0]
        sector = FockBasis.fixed_total(basis.mode_count, int(N))
        pos = sector.boson_rank(labels[rows])
        vec = np.zeros(sector.dim, dtype=complex)
        vec[pos] = state.amplitudes[rows]
        vec = _apply_elements(elements, sector.boson_labels, vec)
        out[rows] = vec[pos]
        leak += float(np.sum(np.abs(vec) ** 2) - np.sum(np.abs(vec[pos]) ** 2))
    return StateVector(basis, out, state.leakage + max(leak, 0.0))


def schedule_sector_unitary(schedule, params, photons: int = 1) -> np.ndarray:
    """Simulate a pulse schedule with the effective coupler and dispersive Hamiltonians.

    Coupler pulses evolve the hopping Hamiltonian at ``g_bs cos(2 pi flux)``.
    A detuned excited qubit pulls its resonator by ``2 chi`` relative to the
    others, which all see the same ground-state pull; that common shift is a
    global phase in a fixed-photon-number sector and is left out.
    """
    from .pulses import CouplerOn, QubitDetune
    from .device import coupler_strength

    basis = FockBasis.fixed_total(schedule.mode_count, photons)
    U = np.eye(basis.dim, dtype=complex)
    for _, ins in schedule.instructions():
        if isinstance(ins, CouplerOn):
            spec = BeamSplitterRWA(ins.pair, coupler_strength(params.g_bs, ins.flux))
        elif isinstance(ins, QubitDetune):
            spec = PhaseShifterH(ins.qubit, 2 * params.chi_rate())
        else:
            continue
        U = sector_unitary(spec, basis, ins.duration) @ U
    return U
