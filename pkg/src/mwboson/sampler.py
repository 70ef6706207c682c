"""Boson sampling output distributions, sampling, readout and loss models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from scipy import stats

from .dynamics import evolve_network
from .errors import ResourceCapError, ValidationError
from .fock import FockBasis, StateVector, enumerate_basis
from .interferometer import ElementList

PERMANENT_MAX_DIM = 24
ENUMERATION_CAP = 1_000_000

Occupation = tuple[int, ...]


def permanent(A) -> complex:
    """Permanent by Ryser's formula with Gray-code subset updates, O(2^n n).

    ``perm(A) = (-1)^n sum_S (-1)^|S| prod_i sum_{j in S} A_ij``.  Column
    subsets are visited in Gray-code order so each step adds or removes one
    column from the running row sums.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValidationError(f"permanent needs a square matrix, got shape {A.shape}")
    n = A.shape[0]
    if n > PERMANENT_MAX_DIM:
        raise ResourceCapError(f"permanent of a {n}x{n} matrix exceeds the {PERMANENT_MAX_DIM} guard")
    if n == 0:
        return 1.0 + 0j
    cols = A.T.copy()
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    prev_gray = 0
    for k in range(1, 2**n):
        gray = k ^ (k >> 1)
        diff = gray ^ prev_gray
        j = diff.bit_length() - 1
        if gray & diff:
            row_sums += cols[j]
        else:
            row_sums -= cols[j]
        prev_gray = gray
        # (-1)^|S| for the current column subset
        sign = -1.0 if bin(gray).count("1") & 1 else 1.0
        total += sign * np.prod(row_sums)
    return complex(total * (-1) ** n)


def _check_occupation(occ: Sequence[int], M: int, what: str) -> Occupation:
    occ = tuple(int(x) for x in occ)
    if len(occ) != M or any(x < 0 for x in occ):
        raise ValidationError(f"{what} occupation {occ} invalid for {M} modes")
    return occ


def submatrix(U: np.ndarray, inp: Occupation, out: Occupation) -> np.ndarray:
    rows = np.repeat(np.arange(len(out)), out)
    cols = np.repeat(np.arange(len(inp)), inp)
    return U[np.ix_(rows, cols)]


def output_probability(U, inp: Sequence[int], out: Sequence[int]) -> float:
    """``|perm(U_{out,in})|^2 / (prod in_i! prod out_i!)``."""
    U = np.asarray(U, dtype=complex)
    M = U.shape[0]
    inp = _check_occupation(inp, M, "input")
    out = _check_occupation(out, M, "output")
    if sum(inp) != sum(out):
        raise ValidationError(f"photon number mismatch: input {sum(inp)} vs output {sum(out)}")
    norm = math.prod(math.factorial(x) for x in inp) * math.prod(math.factorial(x) for x in out)
    return abs(permanent(submatrix(U, inp, out))) ** 2 / norm


@dataclass
class OutputDistribution:
    """Probabilities over reported outcomes, in canonical basis order.

    ``rejected`` holds the mass a readout model discarded (post-selection or an
    unresolved count) and ``leakage`` the mass lost to Fock truncation;
    accepted probabilities plus both sum to 1.  ``photon_count`` is ``None``
    for inputs without a definite photon number.
    """

    mode_count: int
    photon_count: int | None
    entries: dict[Occupation, float] = field(default_factory=dict)
    rejected: float = 0.0
    leakage: float = 0.0

    def __getitem__(self, outcome) -> float:
        return self.entries.get(tuple(outcome), 0.0)

    @property
    def outcomes(self) -> list[Occupation]:
        return list(self.entries)

    @property
    def probabilities(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=float, count=len(self.entries))

    def total(self) -> float:
        return float(self.probabilities.sum()) + self.rejected + self.leakage

    def check_normalized(self, tol: float = 1e-9) -> None:
        if (self.probabilities < -tol).any() or abs(self.total() - 1) > tol:
            raise ValidationError(f"distribution not normalized: total {self.total():.12f}")

    def max_deviation(self, other: OutputDistribution) -> float:
        keys = set(self.entries) | set(other.entries)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)


def _sector_basis(M: int, N: int, cap: int) -> FockBasis:
    basis = FockBasis.fixed_total(M, N, dim_limit=cap)
    if basis.dim > cap:
        raise ResourceCapError(f"{basis.dim} outcomes for N={N}, M={M} exceed enumeration cap {cap}")
    return basis


def full_distribution(U, inp: Sequence[int], *, cap: int = ENUMERATION_CAP) -> OutputDistribution:
    """Exact distribution from permanents over every N-photon outcome."""
    U = np.asarray(U, dtype=complex)
    M = U.shape[0]
    inp = _check_occupation(inp, M, "input")
    N = sum(inp)
    basis = _sector_basis(M, N, cap)
    entries = {lab.counts: output_probability(U, inp, lab.counts) for lab in enumerate_basis(basis)}
    return OutputDistribution(M, N, entries)


def brute_force_distribution(elements: ElementList, inp: Sequence[int], *, cap: int = ENUMERATION_CAP) -> OutputDistribution:
    """Independent oracle: evolve the Fock state element by element in the N-photon sector."""
    M = elements.mode_count
    inp = _check_occupation(inp, M, "input")
    N = sum(inp)
    basis = _sector_basis(M, N, cap)
    state = evolve_network(elements, StateVector.from_label(basis, inp))
    probs = state.probabilities()
    return OutputDistribution(M, N, {lab.counts: float(p) for lab, p in zip(enumerate_basis(basis), probs)})


def sample(dist: OutputDistribution, seed, count: int) -> list[Occupation]:
    """Inverse-CDF sampling over the enumerated (accepted) outcomes."""
    if count < 0:
        raise ValidationError("count must be >= 0")
    outcomes = dist.outcomes
    probs = np.clip(dist.probabilities, 0.0, None)
    if not len(outcomes) or probs.sum() <= 0:
        raise ValidationError("distribution has no support")
    cdf = np.cumsum(probs)
    rng = np.random.default_rng(seed)
    u = rng.random(count) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    idx = np.minimum(idx, len(outcomes) - 1)
    return [outcomes[i] for i in idx]


def total_variation(counts: dict[Occupation, int], dist: OutputDistribution) -> float:
    n = sum(counts.values())
    keys = set(counts) | set(dist.entries)
    return 0.5 * sum(abs(counts.get(k, 0) / n - dist[k]) for k in keys)


# -- readout ------------------------------------------------------------------


@dataclass(frozen=True)
class SwapPhotodetector:
    """Swap the resonator back into its qubit; bunched modes are post-selected away."""

    post_select_bunching: bool = True


@dataclass(frozen=True)
class QndCounter:
    """Photon-number-resolving counter built from qubit probes at the shifted frequencies.

    Candidate counts are probed in ascending order; the probe matching the true
    count flips the qubit with probability ``eta`` per trial and is retried up
    to ``repetitions`` times.  Probes at other counts never fire.  A mode none
    of whose probes fired is unresolved.
    """

    eta: float = 0.9
    repetitions: int = 5
    max_n_probe: int = 8

    def __post_init__(self):
        if not 0 < self.eta <= 1:
            raise ValidationError("eta must lie in (0, 1]")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be >= 1")
        if self.max_n_probe < 0:
            raise ValidationError("max_n_probe must be >= 0")

    @property
    def mode_success(self) -> float:
        return 1.0 - (1.0 - self.eta) ** self.repetitions


ReadoutModel = Union[SwapPhotodetector, QndCounter]

UNRESOLVED = -1


@dataclass(frozen=True)
class ReadoutResult:
    outcome: Occupation
    rejected: bool
    reason: str = ""


def qnd_probe_frequencies(Omega: float, g_s: float, Delta: float, max_n: int) -> np.ndarray:
    """Qubit frequencies ``Omega + (2n+1) g_s^2/Delta`` for n = 0..max_n."""
    n = np.arange(max_n + 1)
    return Omega + (2 * n + 1) * g_s**2 / Delta


def apply_readout(true_outcome: Sequence[int], model: ReadoutModel, seed) -> ReadoutResult:
    true_outcome = tuple(int(x) for x in true_outcome)
    if isinstance(model, SwapPhotodetector):
        reported = tuple(min(n, 1) for n in true_outcome)
        bunched = any(n >= 2 for n in true_outcome)
        if bunched and model.post_select_bunching:
            return ReadoutResult(reported, True, "bunched")
        return ReadoutResult(reported, False)
    if isinstance(model, QndCounter):
        rng = np.random.default_rng(seed)
        reported = []
        for n in true_outcome:
            found = UNRESOLVED
            for k in range(model.max_n_probe + 1):
                if k == n and (rng.random(model.repetitions) < model.eta).any():
                    found = k
                    break
            reported.append(found)
        if UNRESOLVED in reported:
            return ReadoutResult(tuple(reported), True, "unresolved")
        return ReadoutResult(tuple(reported), False)
    raise ValidationError(f"unknown readout model {model!r}")


def readout_distribution(dist: OutputDistribution, model: ReadoutModel | None) -> OutputDistribution:
    """Push an ideal photon-number distribution through a readout model."""
    if model is None:
        return dist
    out: dict[Occupation, float] = {}
    rejected = dist.rejected
    for outcome, p in dist.entries.items():
        if isinstance(model, SwapPhotodetector):
            if model.post_select_bunching and any(n >= 2 for n in outcome):
                rejected += p
                continue
            key = tuple(min(n, 1) for n in outcome)
            out[key] = out.get(key, 0.0) + p
        elif isinstance(model, QndCounter):
            ok = 1.0
            for n in outcome:
                ok *= model.mode_success if n <= model.max_n_probe else 0.0
            out[outcome] = out.get(outcome, 0.0) + p * ok
            rejected += p * (1 - ok)
        else:
            raise ValidationError(f"unknown readout model {model!r}")
    return OutputDistribution(dist.mode_count, dist.photon_count, out, rejected, dist.leakage)


# -- loss ---------------------------------------------------------------------


def survival_probability(kappa_s: float, t_total: float) -> float:
    return math.exp(-kappa_s * t_total)


def apply_loss(dist: OutputDistribution, survival_p: float, *, cap: int = ENUMERATION_CAP) -> OutputDistribution:
    """Binomial thinning: each photon survives independently with ``survival_p``."""
    if not 0 <= survival_p <= 1:
        raise ValidationError("survival probability must lie in [0, 1]")
    if survival_p == 1:
        return OutputDistribution(dist.mode_count, dist.photon_count, dict(dist.entries), dist.rejected, dist.leakage)
    M = dist.mode_count
    lossy: dict[Occupation, float] = {}
    for outcome, p in dist.entries.items():
        per_mode = [stats.binom.pmf(np.arange(n + 1), n, survival_p) for n in outcome]
        for kept in np.ndindex(*(n + 1 for n in outcome)):
            w = p * math.prod(per_mode[i][k] for i, k in enumerate(kept))
            if w:
                lossy[kept] = lossy.get(kept, 0.0) + w
        if len(lossy) > cap:
            raise ResourceCapError("lossy outcome space exceeds enumeration cap")
    # canonical order: descending total, then descending lexicographic
    ordered = dict(sorted(lossy.items(), key=lambda kv: (-sum(kv[0]), tuple(-x for x in kv[0]))))
    return OutputDistribution(M, dist.photon_count, ordered, dist.rejected, dist.leakage)


def apply_loss_to_samples(samples: Sequence[Sequence[int]], survival_p: float, seed) -> list[Occupation]:
    if not 0 <= survival_p <= 1:
        raise ValidationError("survival probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    arr = np.asarray(samples, dtype=np.int64)
    if arr.size == 0:
        return [tuple(s) for s in samples]
    kept = rng.binomial(arr, survival_p)
    return [tuple(int(x) for x in row) for row in kept]
