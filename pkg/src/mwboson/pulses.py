"""Lowering an element list to a layered microwave pulse schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

from .device import DeviceGeometry, DeviceParams, coupler_strength, flux_for_qubit_frequency
from .errors import ValidationError
from .interferometer import BeamSplitter, ElementList, PhaseShifter, haar_random, reck_decompose

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class CouplerOn:
    """Ring coupler between resonators ``pair`` held at ``flux`` (units of Phi_0)."""

    pair: tuple[int, int]
    flux: float
    duration: float

    @property
    def hardware(self):
        i, j = self.pair
        return {("res", i), ("res", j), ("coupler", i)}


@dataclass(frozen=True)
class QubitDetune:
    """Excited qubit parked in the dispersive regime next to its storage resonator.

    ``flux`` is in units of Phi_0, or ``None`` when no geometry was supplied.
    """

    qubit: int
    flux: float | None
    duration: float

    @property
    def hardware(self):
        return {("qubit", self.qubit), ("res", self.qubit)}


@dataclass(frozen=True)
class QubitDrive:
    qubit: int
    rotation: float
    duration: float = 0.0

    @property
    def hardware(self):
        return {("qubit", self.qubit)}


Instruction = Union[CouplerOn, QubitDetune, QubitDrive]


@dataclass(frozen=True)
class PulseSchedule:
    mode_count: int
    layers: tuple[tuple[Instruction, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(tuple(layer) for layer in self.layers))
        for k, layer in enumerate(self.layers):
            seen: set = set()
            for ins in layer:
                if seen & ins.hardware:
                    raise ValidationError(f"layer {k} reuses hardware {sorted(seen & ins.hardware)}")
                seen |= ins.hardware
                if ins.duration < 0:
                    raise ValidationError(f"negative duration in layer {k}: {ins}")

    @property
    def depth(self) -> int:
        return len(self.layers)

    def layer_duration(self, k: int) -> float:
        return max((ins.duration for ins in self.layers[k]), default=0.0)

    @property
    def total_duration(self) -> float:
        return sum(self.layer_duration(k) for k in range(self.depth))

    def instructions(self):
        """Flat ``(layer, instruction)`` pairs in schedule order."""
        for k, layer in enumerate(self.layers):
            for ins in layer:
                yield k, ins


def pack_layers(instructions: Sequence[Instruction]) -> list[list[Instruction]]:
    """Greedy as-soon-as-possible packing.

    Each instruction goes one layer after the latest layer that already uses
    any of its hardware, so instructions sharing hardware keep their order.
    """
    last: dict = {}
    layers: list[list[Instruction]] = []
    for ins in instructions:
        k = 1 + max((last.get(h, -1) for h in ins.hardware), default=-1)
        if k == len(layers):
            layers.append([])
        layers[k].append(ins)
        for h in ins.hardware:
            last[h] = k
    return layers


def element_to_instruction(e, params: DeviceParams, geometry: DeviceGeometry | None = None) -> Instruction:
    if isinstance(e, BeamSplitter):
        if not 0 <= e.angle <= math.pi / 2:
            raise ValidationError(f"beam splitter angle {e.angle} not canonical; canonicalize first")
        return CouplerOn(e.modes, 0.0, e.angle / params.g_bs)
    if isinstance(e, PhaseShifter):
        if not 0 <= e.phase < TWO_PI:
            raise ValidationError(f"phase {e.phase} not in [0, 2pi); canonicalize first")
        # the excited qubit shifts its resonator by 2 chi relative to the others
        duration = e.phase / (2 * params.chi_rate())
        flux = None
        if geometry is not None:
            omega_q = params.omega_s + params.dispersive_detuning()
            flux = flux_for_qubit_frequency(geometry, omega_q) / geometry.Phi_0
        return QubitDetune(e.mode, flux, duration)
    raise ValidationError(f"cannot compile {e!r}")


def compile_schedule(elements: ElementList, params: DeviceParams, geometry: DeviceGeometry | None = None) -> PulseSchedule:
    """Beam splitters run at full coupling for ``theta/g_bs``; phases by dispersive detuning."""
    ins = [element_to_instruction(e, params, geometry) for e in elements]
    return PulseSchedule(elements.mode_count, pack_layers(ins))


def schedule_to_elements(schedule: PulseSchedule, params: DeviceParams) -> ElementList:
    """Flatten a schedule back to an element list in layer order."""
    out = []
    for _, ins in schedule.instructions():
        if isinstance(ins, CouplerOn):
            g = coupler_strength(params.g_bs, ins.flux)
            out.append(BeamSplitter(ins.pair[0], g * ins.duration))
        elif isinstance(ins, QubitDetune):
            out.append(PhaseShifter(ins.qubit, 2 * params.chi_rate() * ins.duration))
        # a QubitDrive alone does not act on the photons
    return ElementList(schedule.mode_count, out)


def schedule_depth_estimate(M: int, params: DeviceParams | None = None, seed: int = 0) -> int:
    """Layer count of a compiled Haar-random ``M``-mode interferometer."""
    if M < 1:
        raise ValidationError("M must be >= 1")
    params = params or DeviceParams()
    return compile_schedule(reck_decompose(haar_random(M, seed)), params).depth
