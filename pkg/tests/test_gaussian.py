import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from mwboson.dynamics import TwoModeSqueezing, evolve
from mwboson.errors import ValidationError
from mwboson.fock import FockBasis, StateVector
from mwboson.gaussian import (GaussianPrep, TwoModeSqueeze, displace, displacement_matrix, gaussian_pipeline,
                              parity_expectation, prepare_gaussian, squeeze)
from mwboson.interferometer import BeamSplitter, ElementList, haar_random, reck_decompose
from mwboson.sampler import QndCounter, SwapPhotodetector


def test_displacement_matrix_matches_large_expm():
    alpha = 0.7 - 0.4j
    big = 60
    a = np.diag(np.sqrt(np.arange(1, big + 1)), 1)
    D_ref = expm(alpha * a.conj().T - np.conj(alpha) * a)
    assert np.max(np.abs(displacement_matrix(alpha, 8) - D_ref[:9, :9])) < 1e-12


def test_displacement_zero_is_identity():
    assert np.array_equal(displacement_matrix(0, 3), np.eye(4))


@pytest.mark.parametrize("alpha", [1.0, 0.5j, -0.8 + 0.3j])
def test_coherent_state_statistics(alpha):
    basis = FockBasis.per_mode_cutoff(1, 20)
    state = displace(StateVector.vacuum(basis), [alpha])
    x = abs(alpha) ** 2
    p = state.mode_distribution(0)
    expected = [math.exp(-x) * x**n / math.factorial(n) for n in range(5)]
    assert np.allclose(p[:5], expected, atol=1e-12)
    assert parity_expectation(state, 0) == pytest.approx(math.exp(-2 * x), abs=1e-12)


def test_displacement_truncation_is_leakage():
    basis = FockBasis.per_mode_cutoff(1, 2)
    state = displace(StateVector.vacuum(basis), [1.5])
    assert state.leakage > 0
    assert state.norm_sq() + state.leakage == pytest.approx(1)


def test_displace_validation():
    with pytest.raises(ValidationError):
        displace(StateVector.vacuum(FockBasis.fixed_total(2, 0)), [0, 0])
    with pytest.raises(ValidationError):
        displace(StateVector.vacuum(FockBasis.per_mode_cutoff(2, 2)), [0])


@pytest.mark.parametrize("r", [0.3, 0.6])
def test_two_mode_squeezed_vacuum(r):
    basis = FockBasis.per_mode_cutoff(2, 30)
    state = squeeze(StateVector.vacuum(basis), TwoModeSqueeze((0, 1), r))
    for n in range(3):
        assert abs(state.amplitude((n, n))) ** 2 == pytest.approx(math.tanh(r) ** (2 * n) / math.cosh(r) ** 2, abs=1e-12)
    assert state.mean_photons(0) == pytest.approx(math.sinh(r) ** 2, abs=1e-10)


@pytest.mark.parametrize("modes", [(0, 1), (2, 1)])
def test_local_squeeze_matches_full_evolution(modes):
    basis = FockBasis.per_mode_cutoff(3, 3)
    start = displace(StateVector.vacuum(basis), [0.3, 0.2j, 0.4])
    local = squeeze(start, TwoModeSqueeze(modes, 0.7, 0.4))
    full = evolve(TwoModeSqueezing(modes, 1.0, 0.4), start, 0.7)
    assert np.max(np.abs(local.amplitudes - full.final_state.amplitudes)) < 1e-12
    assert local.leakage == pytest.approx(full.final_state.leakage, abs=1e-12)
    assert local.leakage > start.leakage


@settings(max_examples=15)
@given(st.floats(0, 0.6), st.floats(0, 0.5), st.floats(0, 0.5), st.sampled_from(["squeeze_first", "displace_first"]))
def test_mean_photons_of_squeezed_coherent(r, a0, a1, order):
    prep = GaussianPrep((a0, a1), (TwoModeSqueeze((0, 1), r),), order)
    state = prepare_gaussian(prep, FockBasis.per_mode_cutoff(2, 20))
    c2, s2 = math.cosh(r) ** 2, math.sinh(r) ** 2
    if order == "squeeze_first":
        expected = [a0**2 + s2, a1**2 + s2]
    else:
        expected = [c2 * a0**2 + s2 * (a1**2 + 1), c2 * a1**2 + s2 * (a0**2 + 1)]
    for mode in range(2):
        assert state.mean_photons(mode) == pytest.approx(expected[mode], abs=1e-7)


@pytest.mark.parametrize("kw", [dict(displacements=()), dict(displacements=(0, 0, 0), squeezes=(TwoModeSqueeze((0, 2), 0.1),)),
                                dict(displacements=(0, 0), squeezes=(TwoModeSqueeze((0, 1), -0.1),)),
                                dict(displacements=(0, 0), order="random")])
def test_prep_validation(kw):
    with pytest.raises(ValidationError):
        GaussianPrep(**kw)


def test_prep_rejects_tight_cutoff():
    prep = GaussianPrep((1.5, 0))
    with pytest.raises(ValidationError):
        prepare_gaussian(prep, FockBasis.per_mode_cutoff(2, 3))


def test_vacuum_prep():
    state = prepare_gaussian(GaussianPrep.vacuum(3), FockBasis.per_mode_cutoff(3, 1))
    assert abs(state.amplitude((0, 0, 0))) ** 2 == 1


def test_pipeline_vacuum_through_network():
    el = reck_decompose(haar_random(3, 0))
    dist = gaussian_pipeline(GaussianPrep.vacuum(3), el, None, cutoff=2)
    assert dist[(0, 0, 0)] == pytest.approx(1)
    assert dist.photon_count is None


def test_pipeline_tmsv_through_splitter_keeps_parity():
    # pairs stay pairs: a 50/50 splitter maps |n,n> to even total photon number
    prep = GaussianPrep((0, 0), (TwoModeSqueeze((0, 1), 0.4),))
    el = ElementList(2, [BeamSplitter(0, math.pi / 4)])
    dist = gaussian_pipeline(prep, el, None, cutoff=12)
    odd = sum(p for o, p in dist.entries.items() if sum(o) % 2)
    assert odd < 1e-12
    dist.check_normalized(1e-6)


def test_pipeline_identity_network_only_pairs():
    prep = GaussianPrep((0, 0), (TwoModeSqueeze((0, 1), 0.3),))
    dist = gaussian_pipeline(prep, ElementList(2, []), None, cutoff=12)
    assert sum(p for o, p in dist.entries.items() if o[0] != o[1]) < 1e-14


def test_pipeline_with_readout():
    prep = GaussianPrep((0.5, 0))
    el = ElementList(2, [BeamSplitter(0, math.pi / 4)])
    ideal = gaussian_pipeline(prep, el, None, cutoff=8)
    qnd = gaussian_pipeline(prep, el, QndCounter(), cutoff=8)
    assert qnd.total() == pytest.approx(ideal.total())
    assert qnd.rejected > 0
    swap = gaussian_pipeline(prep, el, SwapPhotodetector(), cutoff=8)
    assert set(swap.outcomes) <= {(0, 0), (1, 0), (0, 1), (1, 1)}


def test_pipeline_mode_mismatch_and_leakage():
    with pytest.raises(ValidationError):
        gaussian_pipeline(GaussianPrep.vacuum(2), ElementList(3, []), None)
    prep = GaussianPrep((0, 0), (TwoModeSqueeze((0, 1), 0.5),))
    with pytest.raises(ValidationError):
        # pairs bunched by the splitter overflow a cutoff tuned for the input
        gaussian_pipeline(prep, ElementList(2, [BeamSplitter(0, math.pi / 4)]), None, cutoff=7)
