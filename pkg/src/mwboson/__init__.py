"""Microwave boson sampling: interferometer compilation and exact circuit-QED simulation."""

__version__ = "0.1.0"

from .device import DeviceGeometry, DeviceParams
from .errors import ConvergenceError, InvariantViolation, MwbosonError, OutOfBandError, ResourceCapError, ValidationError
from .fock import FockBasis, StateVector, enumerate_basis, index_of
from .interferometer import BeamSplitter, ElementList, PhaseShifter, elements_to_unitary, haar_random, reck_decompose
from .pulses import PulseSchedule, compile_schedule
from .sampler import (OutputDistribution, QndCounter, SwapPhotodetector, apply_loss, apply_readout,
                      brute_force_distribution, full_distribution, output_probability, permanent, sample)
from .gaussian import GaussianPrep, TwoModeSqueeze, gaussian_pipeline, parity_expectation, prepare_gaussian
from .feasibility import budget, element_time

__all__ = [
    "BeamSplitter", "ConvergenceError", "DeviceGeometry", "DeviceParams", "ElementList", "FockBasis",
    "GaussianPrep", "InvariantViolation", "MwbosonError", "OutOfBandError", "OutputDistribution",
    "PhaseShifter", "PulseSchedule", "QndCounter", "ResourceCapError", "StateVector", "SwapPhotodetector",
    "TwoModeSqueeze", "ValidationError", "apply_loss", "apply_readout", "brute_force_distribution", "budget",
    "compile_schedule", "element_time", "elements_to_unitary", "enumerate_basis", "full_distribution",
    "gaussian_pipeline", "haar_random", "index_of", "output_probability", "parity_expectation", "permanent",
    "prepare_gaussian", "reck_decompose", "sample",
]
