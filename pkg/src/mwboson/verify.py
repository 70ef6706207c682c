"""Cross-module oracle battery behind ``mwboson verify``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .device import DeviceParams
from .dynamics import schedule_sector_unitary
from .interferometer import (BeamSplitter, ElementList, elements_to_unitary, haar_random, max_entry_error,
                             reck_decompose, remove_global_phase)
from .protocols import dispersive_phase_check, rwa_scaling
from .pulses import compile_schedule
from .sampler import brute_force_distribution, full_distribution, output_probability

FAULT_SIZE = 1e-3
RECK_TOL = 1e-10
ORACLE_TOL = 1e-9
SCHEDULE_TOL = 1e-6
HOM_TOL = 1e-12
DISPERSIVE_RATIOS = (0.1, 0.05, 0.025)
DISPERSIVE_BAND = (3.5, 4.5)
RWA_RATIOS = (1e-2, 5e-3, 2.5e-3)
RWA_BAND = (3.0, 5.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    bound: str
    passed: bool


@dataclass
class VerifyReport:
    checks: list[CheckResult] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, measured: float, passed: bool, bound: str) -> None:
        self.checks.append(CheckResult(name, float(measured), bound, bool(passed)))


def grid_input(M: int, N: int) -> tuple[int, ...]:
    """Single photons in the leading modes, with any excess stacked on mode 0."""
    occ = [1 if i < N else 0 for i in range(M)]
    if N > M:
        occ[0] += N - M
    return tuple(occ)


def _perturb(U: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    return U + FAULT_SIZE * (rng.standard_normal(U.shape) + 1j * rng.standard_normal(U.shape))


def _within(values: Sequence[float], band: tuple[float, float]) -> bool:
    return all(band[0] <= v <= band[1] for v in values)


def _worst(values: Sequence[float], band: tuple[float, float]) -> float:
    """The value furthest from the middle of ``band``."""
    mid = 0.5 * (band[0] + band[1])
    return max(values, key=lambda v: abs(v - mid))


def run_battery(modes: Sequence[int], photons: Sequence[int], instances: int, seed: int = 0, *,
                inject_fault: bool = False, params: DeviceParams | None = None) -> VerifyReport:
    """Run every check on the ``modes x photons`` grid.

    With ``inject_fault`` the reference unitary of the grid checks is
    perturbed by ``1e-3`` per entry, so those checks must fail.  An empty
    grid runs nothing and passes vacuously with a warning; the fixed
    scaling-law checks run alongside any non-empty grid.
    """
    report = VerifyReport()
    modes, photons = tuple(modes), tuple(photons)
    if not modes or not photons or instances < 1:
        report.warnings.append("empty verification grid: no checks run, vacuous pass")
        return report
    params = params or DeviceParams()
    rng = np.random.default_rng(seed)
    fault_rng = np.random.default_rng([seed, 1])

    for M in modes:
        reck_err = oracle_err = sched_err = 0.0
        for _ in range(instances):
            U = haar_random(M, rng)
            elements = reck_decompose(U)
            ref = _perturb(U, fault_rng) if inject_fault else U
            reck_err = max(reck_err, max_entry_error(elements_to_unitary(elements, M), ref))
            V = schedule_sector_unitary(compile_schedule(elements, params), params, photons=1)
            sched_err = max(sched_err, max_entry_error(remove_global_phase(V, ref), ref))
            for N in photons:
                inp = grid_input(M, N)
                exact = full_distribution(ref, inp)
                oracle_err = max(oracle_err, exact.max_deviation(brute_force_distribution(elements, inp)))
        report.add(f"reck_roundtrip[M={M}]", reck_err, reck_err < RECK_TOL, f"< {RECK_TOL:g}")
        report.add(f"oracle_equivalence[M={M}]", oracle_err, oracle_err < ORACLE_TOL, f"< {ORACLE_TOL:g}")
        report.add(f"schedule_fidelity[M={M}]", sched_err, sched_err < SCHEDULE_TOL, f"< {SCHEDULE_TOL:g}")

    bs = elements_to_unitary(ElementList(2, [BeamSplitter(0, math.pi / 4)]))
    hom = output_probability(bs, (1, 1), (1, 1))
    report.add("hong_ou_mandel", hom, hom < HOM_TOL, f"< {HOM_TOL:g}")

    disc = [dispersive_phase_check(1.0, 1.0 / x, check_scaling=False).discrepancy for x in DISPERSIVE_RATIOS]
    shrink = [a / b for a, b in zip(disc, disc[1:])]
    report.add("dispersive_scaling", _worst(shrink, DISPERSIVE_BAND), _within(shrink, DISPERSIVE_BAND), "in [3.5, 4.5]")

    infid = [c.infidelity for c in rwa_scaling(RWA_RATIOS)]
    shrink = [a / b for a, b in zip(infid, infid[1:])]
    report.add("rwa_scaling", _worst(shrink, RWA_BAND), _within(shrink, RWA_BAND), "in [3, 5]")
    return report
