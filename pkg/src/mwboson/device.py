"""Device constants and the circuit formulas for qubit frequency and couplings."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace

from scipy import constants

from .errors import OutOfBandError, ValidationError

TWO_PI = 2 * math.pi
PHI_CONVENTIONS = ("plain", "angular")


@dataclass(frozen=True)
class DeviceParams:
    """Rates in rad/s unless noted.

    ``chi_ps`` and ``xi_0`` are quoted as bare numbers in MHz-style units.
    Under ``phi_convention='plain'`` the number is used directly as a rate in
    1/s; under ``'angular'`` it is multiplied by 2 pi.
    """

    g_s: float = TWO_PI * 150e6
    g_bs: float = TWO_PI * 30e6
    chi_ps: float = 20e6
    kappa_s: float = TWO_PI * 1e3
    kappa_m: float = TWO_PI * 20e6
    xi_0: float = 30e6
    omega_s: float = TWO_PI * 5.0e9
    omega_m: float = TWO_PI * 7.0e9
    Omega_max: float = TWO_PI * 12.6e9
    eta_readout: float = 0.90
    F_prep: float = 0.9992
    F_fock: float = 0.999
    phi_convention: str = "plain"

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name == "phi_convention":
                if val not in PHI_CONVENTIONS:
                    raise ValidationError(f"phi_convention must be one of {PHI_CONVENTIONS}, got {val!r}")
            elif not (isinstance(val, (int, float)) and val > 0 and math.isfinite(val)):
                raise ValidationError(f"{f.name} must be positive and finite, got {val!r}")
        for name in ("eta_readout", "F_prep", "F_fock"):
            if getattr(self, name) > 1:
                raise ValidationError(f"{name} must lie in (0, 1]")

    def _rate(self, value: float, convention: str | None) -> float:
        convention = convention or self.phi_convention
        if convention not in PHI_CONVENTIONS:
            raise ValidationError(f"unknown convention {convention!r}")
        return value * TWO_PI if convention == "angular" else value

    def chi_rate(self, convention: str | None = None) -> float:
        """Dispersive pull g_s^2/Delta_s in rad/s."""
        return self._rate(self.chi_ps, convention)

    def xi_rate(self, convention: str | None = None) -> float:
        return self._rate(self.xi_0, convention)

    def dispersive_detuning(self, convention: str | None = None) -> float:
        """Qubit-storage detuning that produces the configured pull."""
        return self.g_s**2 / self.chi_rate(convention)

    def replace(self, **changes) -> DeviceParams:
        return replace(self, **changes)


@dataclass(frozen=True)
class DeviceGeometry:
    """Circuit element values in SI units.

    Defaults describe a transmon with E_C/h = 250 MHz, a single-junction
    E_J/h = 40 GHz (so the SQUID tops out near 12.6 GHz) and a 12 mm
    coplanar resonator.
    """

    C_s: float = 6.9e-14
    C_m: float = 3.0e-14
    C_J: float = constants.e**2 / (2 * constants.h * 250e6)
    L: float = 12e-3
    c: float = 1.6e-10
    E_J: float = constants.h * 40e9
    Phi_0: float = constants.physical_constants["mag. flux quantum"][0]

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if not (val > 0 and math.isfinite(val)):
                raise ValidationError(f"{f.name} must be positive and finite, got {val!r}")

    @property
    def E_C(self) -> float:
        return constants.e**2 / (2 * self.C_J)


def qubit_frequency(geometry: DeviceGeometry, Phi_ext: float, *, atol: float = 1e-12) -> float:
    """Split-transmon frequency ``sqrt(8 E_J(Phi) E_C)/hbar`` in rad/s.

    ``E_J(Phi) = 2 E_J cos(2 pi Phi/Phi_0)`` changes sign past a quarter flux
    quantum; the magnitude is used, as for a symmetric dc-SQUID.
    """
    cos = math.cos(TWO_PI * Phi_ext / geometry.Phi_0)
    if abs(cos) <= atol:
        raise OutOfBandError(f"Josephson energy vanishes at Phi_ext = {Phi_ext / geometry.Phi_0:.6g} Phi_0")
    ej = 2 * geometry.E_J * abs(cos)
    return math.sqrt(8 * ej * geometry.E_C) / constants.hbar


def flux_for_qubit_frequency(geometry: DeviceGeometry, Omega: float) -> float:
    """Flux in ``[0, Phi_0/4)`` that tunes the qubit to ``Omega`` (rad/s)."""
    cos = (constants.hbar * Omega) ** 2 / (16 * geometry.E_J * geometry.E_C)
    if 1 < cos <= 1 + 1e-12:
        cos = 1.0
    if not 0 < cos <= 1:
        raise OutOfBandError(
            f"qubit frequency {Omega / TWO_PI:.4g} Hz outside tunable band "
            f"(max {qubit_frequency(geometry, 0.0) / TWO_PI:.4g} Hz)"
        )
    return geometry.Phi_0 * math.acos(cos) / TWO_PI


def coupler_strength(g_bs: float, Phi_c: float, Phi_0: float = 1.0) -> float:
    """Ring-coupler strength ``g_bs cos(2 pi Phi_c/Phi_0)``; fully on at integer flux quanta."""
    return g_bs * math.cos(TWO_PI * Phi_c / Phi_0)


def flux_for_strength(g_bs: float, g: float, Phi_0: float = 1.0) -> float:
    """Coupler flux in ``[0, Phi_0/4]`` giving strength ``g`` in ``[0, g_bs]``."""
    if g_bs <= 0:
        raise ValidationError("g_bs must be positive")
    if not 0 <= g <= g_bs * (1 + 1e-15):
        raise ValidationError(f"requested strength {g:.6g} outside [0, g_bs={g_bs:.6g}]")
    return Phi_0 * math.acos(min(g / g_bs, 1.0)) / TWO_PI


def qubit_resonator_coupling(geometry: DeviceGeometry, which: str, omega: float) -> float:
    """Qubit-resonator coupling in rad/s for the storage or measurement resonator.

    ``g = C_x/(C_x + C_J) * e * sqrt(omega / (hbar c L))``; with ``e = hbar = 1``
    this is the bare ratio-times-root form.
    """
    if which == "storage":
        cx = geometry.C_s
    elif which == "measurement":
        cx = geometry.C_m
    else:
        raise ValidationError(f"which must be 'storage' or 'measurement', got {which!r}")
    beta = cx / (cx + geometry.C_J)
    return beta * constants.e * math.sqrt(omega / (constants.hbar * geometry.c * geometry.L))


def calibrate_coupling_capacitance(geometry: DeviceGeometry, which: str, omega: float, g_target: float) -> DeviceGeometry:
    """Return a geometry whose coupling capacitance yields ``g_target``."""
    scale = constants.e * math.sqrt(omega / (constants.hbar * geometry.c * geometry.L))
    beta = g_target / scale
    if not 0 < beta < 1:
        raise ValidationError(f"target coupling needs capacitance ratio {beta:.3g}, not in (0, 1)")
    cx = beta * geometry.C_J / (1 - beta)
    return replace(geometry, **({"C_s": cx} if which == "storage" else {"C_m": cx}))
