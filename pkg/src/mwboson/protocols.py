"""Checks of each effective circuit-QED model against the dynamics it approximates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .device import DeviceParams
from .dynamics import (
    BeamSplitterRWA,
    Dispersive,
    EvolutionResult,
    FluxDrive,
    JaynesCummings,
    Propagator,
    QuadratureCoupling,
    TwoModeSqueezing,
    build_hamiltonian,
    evolve,
)
from .errors import InvariantViolation, ValidationError
from .fock import FockBasis, StateVector, index_of

# first maximum of the Bessel function J1
J1_ARGMAX = 1.8411837813406593


@dataclass(frozen=True)
class JCLoadResult:
    evolution: EvolutionResult
    optimal_time: float | None
    transfer_probability: float
    rabi_time: float
    quoted_time: float

    @property
    def quoted_time_ratio(self) -> float | None:
        """``pi/g_s`` divided by the located optimum; 2 for the resonant swap."""
        return None if self.optimal_time is None else self.quoted_time / self.optimal_time


def jc_load(params: DeviceParams, *, qubit_state: str = "e", detuning: float = 0.0,
            fidelity_tol: float = 1e-10, scan_points: int = 4001) -> JCLoadResult:
    """Locate the first time the qubit excitation has moved into the storage resonator.

    The optimum is found on the exact two-level dynamics: a coarse scan brackets
    the first maximum of ``|<g,1|psi(t)>|^2`` and a root of its time derivative
    pins it down.  On resonance the transfer must reach ``1 - fidelity_tol``.
    """
    if qubit_state not in ("g", "e"):
        raise ValidationError("qubit_state must be 'g' or 'e'")
    g = params.g_s
    basis = FockBasis.per_mode_cutoff(1, 1, qubit_slots=1)
    spec = JaynesCummings(0, 0, params.omega_s + detuning, params.omega_s, g)
    psi0 = StateVector.from_label(basis, (0,), (1 if qubit_state == "e" else 0,))
    target = index_of(basis, (1,), (0,))
    rabi_time = math.pi / math.sqrt(4 * g * g + detuning * detuning)
    quoted_time = math.pi / g

    prop = Propagator(build_hamiltonian(spec, basis))
    w = prop.vectors[target, :] * (prop.vectors.conj().T @ psi0.amplitudes)
    E = prop.energies

    def amp(t):
        return np.exp(-1j * np.multiply.outer(t, E)) @ w

    def dprob(t):
        c = amp(t)
        dc = np.exp(-1j * E * t) @ (-1j * E * w)
        return 2 * (np.conj(c) * dc).real

    ts = np.linspace(0.0, 2 * math.pi / g, scan_points)
    P = np.abs(amp(ts)) ** 2
    peaks = np.nonzero((P[1:-1] > P[:-2]) & (P[1:-1] >= P[2:]) & (P[1:-1] > 1e-14))[0]
    if len(peaks) == 0:
        # nothing to transfer (e.g. qubit starts in |g>)
        return JCLoadResult(evolve(spec, psi0, 0.0), None, float(P.max()), rabi_time, quoted_time)
    k = peaks[0] + 1
    t_star = optimize.brentq(dprob, ts[k - 1], ts[k + 1], xtol=1e-30, rtol=4 * np.finfo(float).eps)
    result = evolve(spec, psi0, t_star)
    prob = abs(result.final_state.amplitudes[target]) ** 2
    if detuning == 0 and prob < 1 - fidelity_tol:
        raise InvariantViolation(f"resonant JC transfer reached only {prob:.12f}")
    return JCLoadResult(result, float(t_star), float(prob), rabi_time, quoted_time)


@dataclass(frozen=True)
class DispersiveCheck:
    duration: float
    chi: float
    full_relative_phase: float
    effective_relative_phase: float
    discrepancy: float
    doubled_discrepancy: float | None = None

    @property
    def shrink_factor(self) -> float | None:
        if not self.doubled_discrepancy:
            return None
        return self.discrepancy / self.doubled_discrepancy


def _wrap(x: float) -> float:
    return float(np.angle(np.exp(1j * x)))


def _photon_phase(spec, basis: FockBasis, qubit: int, duration: float) -> float:
    # phase of |q,1> relative to |q,0>, removing the qubit's own energy
    one = evolve(spec, StateVector.from_label(basis, (1,), (qubit,)), duration).final_state
    zero = evolve(spec, StateVector.from_label(basis, (0,), (qubit,)), duration).final_state
    return float(np.angle(one.amplitude((1,), (qubit,))) - np.angle(zero.amplitude((0,), (qubit,))))


def _relative_phase(spec, basis, duration):
    return _wrap(_photon_phase(spec, basis, 1, duration) - _photon_phase(spec, basis, 0, duration))


def _dispersive_once(g, Delta, duration, cutoff):
    # Frame rotating at the bare resonator frequency for both qubit and photon.
    # JC conserves excitation number, so this frame is exact: omega_s -> 0, Omega -> Delta.
    basis = FockBasis.per_mode_cutoff(1, cutoff, qubit_slots=1)
    full = _relative_phase(JaynesCummings(0, 0, Delta, 0.0, g), basis, duration)
    eff = _relative_phase(Dispersive(0, 0, 0.0, Delta, g), basis, duration)
    return full, eff, abs(_wrap(full - eff))


def dispersive_phase_check(g: float, Delta: float, duration: float | None = None, *,
                           target_phase: float = math.pi, cutoff: int = 4,
                           check_scaling: bool = True, min_shrink: float = 3.5) -> DispersiveCheck:
    """Relative photon phase (qubit in |e> vs |g>) from full JC against the dispersive model.

    The effective model predicts ``-2 chi t``.  With ``check_scaling`` the run is
    repeated at twice the detuning and the same accumulated phase; the
    discrepancy has to shrink by at least ``min_shrink``.
    """
    if Delta == 0 or not abs(g / Delta) < 0.2:
        raise ValidationError(f"dispersive regime needs |g/Delta| < 0.2, got {g / Delta if Delta else math.inf}")
    chi = g * g / Delta
    if duration is None:
        duration = abs(target_phase / (2 * chi))
    if duration < 0:
        raise ValidationError("duration must be >= 0")
    full, eff, disc = _dispersive_once(g, Delta, duration, cutoff)
    doubled = None
    if check_scaling and duration > 0:
        _, _, doubled = _dispersive_once(g, 2 * Delta, 2 * duration, cutoff)
        if doubled > 0 and disc / doubled < min_shrink:
            raise InvariantViolation(
                f"dispersive error shrank only by {disc / doubled:.3f} when Delta doubled"
            )
    return DispersiveCheck(duration, chi, full, eff, disc, doubled)


@dataclass(frozen=True)
class RwaCheck:
    g: float
    omega: float
    theta: float
    duration: float
    infidelity: float
    leakage: float


def rwa_beam_splitter_check(g: float, omega: float, theta: float, *, cutoff: int = 5,
                            photons: tuple[int, int] = (1, 0), leak_tol: float = 1e-6) -> RwaCheck:
    """Infidelity of the hopping Hamiltonian against the full static quadrature coupling.

    The lab-frame state is moved to the frame of the bare resonators before
    comparing.
    """
    if g < 0 or omega <= 0:
        raise ValidationError("need g >= 0 and omega > 0")
    if g == 0:
        return RwaCheck(g, omega, theta, 0.0, 0.0, 0.0)
    if g >= omega:
        raise ValidationError("rotating-wave comparison needs g << omega")
    basis = FockBasis.per_mode_cutoff(2, cutoff)
    psi0 = StateVector.from_label(basis, photons)
    t = theta / g
    full = evolve(QuadratureCoupling((0, 1), g, FluxDrive(), (omega, omega)), psi0, t)
    if full.truncation_leakage > leak_tol:
        raise ValidationError(f"truncation leakage {full.truncation_leakage:.2e} > {leak_tol:g}; raise cutoff")
    n_tot = basis.boson_labels.sum(axis=1)
    rotated = full.final_state.amplitudes * np.exp(1j * omega * n_tot * t)
    ref = evolve(BeamSplitterRWA((0, 1), g), psi0, t).final_state.amplitudes
    infid = 1.0 - abs(np.vdot(ref, rotated)) ** 2
    return RwaCheck(g, omega, theta, t, max(infid, 0.0), full.truncation_leakage)


def rwa_scaling(ratios, theta: float = math.pi / 4, omega: float = 1.0, **kw) -> list[RwaCheck]:
    return [rwa_beam_splitter_check(r * omega, omega, theta, **kw) for r in ratios]


@dataclass(frozen=True)
class SqueezingResult:
    state: StateVector
    squeeze_parameter: float
    pair_probabilities: np.ndarray
    leakage: float

    def probability(self, n: int, m: int) -> float:
        return float(self.pair_probabilities[n, m])


def _pair_table(state: StateVector) -> np.ndarray:
    c = state.basis.cutoff
    P = np.zeros((c + 1, c + 1))
    labels = state.basis.boson_labels
    np.add.at(P, (labels[:, 0], labels[:, 1]), state.probabilities())
    return P


def flux_modulated_squeezing(g_bs: float, duration: float, cutoff: int, *, phase: float = 0.0,
                             tail_tol: float = 1e-8) -> SqueezingResult:
    """Two-mode squeezing of vacuum under the effective pair-creation Hamiltonian.

    ``r = g_bs * duration``; the cutoff must leave a ``tanh(r)^(2(cutoff+1))``
    tail below ``tail_tol``.
    """
    r = abs(g_bs * duration)
    tail = math.tanh(r) ** (2 * (cutoff + 1))
    if tail >= tail_tol:
        raise ValidationError(f"cutoff {cutoff} leaves squeezing tail {tail:.2e} >= {tail_tol:g}")
    basis = FockBasis.per_mode_cutoff(2, cutoff)
    res = evolve(TwoModeSqueezing((0, 1), g_bs, phase), StateVector.vacuum(basis), duration)
    return SqueezingResult(res.final_state, r, _pair_table(res.final_state), res.truncation_leakage)


@dataclass(frozen=True)
class FullSqueezingResult:
    ratio: float
    drive_amplitude: float
    effective_rate: float
    duration: float
    full_probabilities: np.ndarray
    effective_probabilities: np.ndarray
    step_count: int

    @property
    def max_error(self) -> float:
        return float(np.max(np.abs(self.full_probabilities - self.effective_probabilities)))


def squeezing_full_simulation(ratio: float, r: float = 0.5, *, omega: float = 1.0, cutoff: int = 8,
                              drive_amplitude: float = J1_ARGMAX, tol: float = 1e-8) -> FullSqueezingResult:
    """Flux-modulated quadrature coupling between two identical resonators.

    The coupler is biased at its off point (a quarter flux quantum) and
    modulated at ``2 omega``.  Expanding ``cos(pi/2 + A cos wt)`` in Bessel
    functions leaves a resonant pair-creation term of strength
    ``g_bs J1(A)``; without the bias only even harmonics survive and nothing
    is resonant.  ``drive_amplitude`` is ``A`` in radians of coupler phase.
    """
    if not 0 < ratio < 1:
        raise ValidationError("ratio g_bs/omega must lie in (0, 1)")
    g_bs = ratio * omega
    g_eff = g_bs * special.jv(1, drive_amplitude)
    duration = r / abs(g_eff)
    drive = FluxDrive(bias=0.25, amplitude=drive_amplitude / (2 * math.pi), frequency=2 * omega)
    basis = FockBasis.per_mode_cutoff(2, cutoff)
    vac = StateVector.vacuum(basis)
    full = evolve(QuadratureCoupling((0, 1), g_bs, drive, (omega, omega)), vac, duration, tol=tol)
    # cos(pi/2 + x) = -sin(x): the resonant term carries a minus sign
    eff = evolve(TwoModeSqueezing((0, 1), g_eff, math.pi), vac, duration)
    return FullSqueezingResult(ratio, drive_amplitude, g_eff, duration,
                               _pair_table(full.final_state), _pair_table(eff.final_state), full.step_count)


def squeezing_convergence(ratios=(0.04, 0.02, 0.01), r: float = 0.5, **kw) -> list[FullSqueezingResult]:
    """Full-vs-effective squeezing errors; they must fall as the coupling ratio drops."""
    results = [squeezing_full_simulation(x, r, **kw) for x in ratios]
    errs = [res.max_error for res in results]
    if any(b >= a for a, b in zip(errs, errs[1:])):
        raise InvariantViolation(f"squeezing error not monotone in g/omega: {errs}")
    return results
