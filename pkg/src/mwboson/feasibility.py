"""Operation-time and lifetime budget for scaling the device up."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .device import PHI_CONVENTIONS, DeviceParams
from .errors import ValidationError

# figures quoted for the large-scale proposal, kept for side-by-side reporting
QUOTED_LIFETIME = 150e-6
QUOTED_ELEMENT_TIME = 0.3e-6
QUOTED_SEQUENTIAL_OPS = 500
QUOTED_PHOTONS = 20


def beam_splitter_time(params: DeviceParams) -> float:
    """Time charged per beam splitter slot, ``pi/g_bs``.

    This is generous: a 50/50 splitter needs only ``(pi/4)/g_bs`` at full
    coupling.
    """
    return math.pi / params.g_bs


def phase_shifter_time(params: DeviceParams, convention: str | None = None) -> float:
    """Upper bound ``pi/phi`` for a phase shifter at dispersive rate ``phi``."""
    return math.pi / params.chi_rate(convention)


def element_time(params: DeviceParams, convention: str | None = None) -> float:
    """Time charged per interferometer element, ``pi/g_bs + pi/phi``."""
    return beam_splitter_time(params) + phase_shifter_time(params, convention)


@dataclass(frozen=True)
class FeasibilityReport:
    convention: str
    t_element: float
    t_lifetime: float
    max_sequential_ops: int
    max_modes: int
    max_photons: int
    photons: int
    t_total: float
    prep_factor: float
    survival_factor: float
    readout_factor: float

    @property
    def success_probability(self) -> float:
        return self.prep_factor * self.survival_factor * self.readout_factor

    def rows(self) -> list[tuple[str, str]]:
        """Labeled values, with quoted reference figures alongside."""
        return [
            ("convention", self.convention),
            ("t_element_ns", f"{self.t_element * 1e9:.6g}"),
            ("t_element_quoted_ns", f"{QUOTED_ELEMENT_TIME * 1e9:.6g}"),
            ("t_element_ratio_to_quoted", f"{self.t_element / QUOTED_ELEMENT_TIME:.6g}"),
            ("t_lifetime_us", f"{self.t_lifetime * 1e6:.6g}"),
            ("t_lifetime_quoted_us", f"{QUOTED_LIFETIME * 1e6:.6g}"),
            ("max_sequential_ops", str(self.max_sequential_ops)),
            ("max_sequential_ops_quoted", str(QUOTED_SEQUENTIAL_OPS)),
            ("max_modes", str(self.max_modes)),
            ("max_photons", str(self.max_photons)),
            ("max_photons_quoted", str(QUOTED_PHOTONS)),
            ("photons", str(self.photons)),
            ("t_total_us", f"{self.t_total * 1e6:.6g}"),
            ("prep_factor", f"{self.prep_factor:.6g}"),
            ("survival_factor", f"{self.survival_factor:.6g}"),
            ("readout_factor", f"{self.readout_factor:.6g}"),
            ("success_probability", f"{self.success_probability:.6g}"),
        ]


def budget(params: DeviceParams | None = None, depth_coefficient: float = 1.0, *,
           convention: str | None = None, photons: int | None = None) -> FeasibilityReport:
    """Budget for a linear-depth interferometer limited by the storage lifetime.

    Parameters
    ----------
    depth_coefficient
        Sequential layers per mode; 1 is the linear-depth mesh.
    photons
        Photon number for the success probability.  Defaults to
        ``max_photons``, run on ``photons**2`` modes.
    """
    params = params or DeviceParams()
    convention = convention or params.phi_convention
    if depth_coefficient <= 0:
        raise ValidationError("depth_coefficient must be positive")
    t_el = element_time(params, convention)
    t_life = 1.0 / params.kappa_s
    ops = math.floor(t_life / t_el)
    max_modes = math.floor(ops / depth_coefficient)
    max_photons = math.isqrt(max_modes)
    N = max_photons if photons is None else int(photons)
    if N < 0:
        raise ValidationError("photons must be >= 0")
    t_total = depth_coefficient * N**2 * t_el
    return FeasibilityReport(
        convention=convention,
        t_element=t_el,
        t_lifetime=t_life,
        max_sequential_ops=ops,
        max_modes=max_modes,
        max_photons=max_photons,
        photons=N,
        t_total=t_total,
        prep_factor=(params.F_prep * params.F_fock) ** N,
        survival_factor=math.exp(-N * params.kappa_s * t_total),
        readout_factor=params.eta_readout**N,
    )


def budget_both(params: DeviceParams | None = None, depth_coefficient: float = 1.0, **kw) -> dict[str, FeasibilityReport]:
    """Reports under each phase-rate convention."""
    return {c: budget(params, depth_coefficient, convention=c, **kw) for c in PHI_CONVENTIONS}
