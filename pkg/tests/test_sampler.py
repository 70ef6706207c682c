import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mwboson.errors import ResourceCapError, ValidationError
from mwboson.interferometer import BeamSplitter, ElementList, elements_to_unitary, haar_random, reck_decompose
from mwboson.sampler import (UNRESOLVED, OutputDistribution, QndCounter, SwapPhotodetector, apply_loss,
                             apply_loss_to_samples, apply_readout, brute_force_distribution, full_distribution,
                             output_probability, permanent, qnd_probe_frequencies, readout_distribution, sample,
                             submatrix, survival_probability, total_variation)

HOM = elements_to_unitary(ElementList(2, [BeamSplitter(0, math.pi / 4)]))


def naive_permanent(A):
    n = A.shape[0]
    return sum(math.prod(A[i, s[i]] for i in range(n)) for s in itertools.permutations(range(n)))


@pytest.mark.parametrize("A,value", [(np.zeros((0, 0)), 1), (np.array([[3.0]]), 3), (np.ones((3, 3)), 6),
                                     (np.array([[1, 2], [3, 4]]), 10), (np.eye(4), 1)])
def test_permanent_examples(A, value):
    assert permanent(A) == pytest.approx(value)


@given(st.integers(1, 6), st.integers(0, 10_000))
def test_permanent_matches_naive(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    assert permanent(A) == pytest.approx(naive_permanent(A), rel=1e-10, abs=1e-10)


def test_permanent_rejects_non_square_and_large():
    with pytest.raises(ValidationError):
        permanent(np.ones((2, 3)))
    with pytest.raises(ResourceCapError):
        permanent(np.ones((25, 25)))


def test_submatrix_repeats_rows_and_columns():
    U = np.arange(9).reshape(3, 3)
    S = submatrix(U, (2, 0, 1), (0, 1, 2))
    # rows follow the output occupation, columns the input
    assert S.tolist() == [[U[1, 0], U[1, 0], U[1, 2]], [U[2, 0], U[2, 0], U[2, 2]], [U[2, 0], U[2, 0], U[2, 2]]]


def test_hong_ou_mandel():
    assert output_probability(HOM, (1, 1), (1, 1)) < 1e-15
    dist = full_distribution(HOM, (1, 1))
    assert dist[(2, 0)] == pytest.approx(0.5)
    assert dist[(0, 2)] == pytest.approx(0.5)


def test_identity_gives_point_mass():
    dist = full_distribution(np.eye(4), (1, 0, 2, 0))
    assert dist[(1, 0, 2, 0)] == pytest.approx(1)
    assert dist.total() == pytest.approx(1)


def test_sector_mismatch_rejected():
    with pytest.raises(ValidationError):
        output_probability(HOM, (1, 1), (1, 0))


@pytest.mark.parametrize("M,inp", [(3, (1, 1, 0)), (4, (2, 0, 1, 0)), (5, (1, 1, 1, 0, 0))])
def test_distribution_normalized_and_matches_oracle(M, inp):
    U = haar_random(M, sum(inp) + M)
    exact = full_distribution(U, inp)
    exact.check_normalized()
    brute = brute_force_distribution(reck_decompose(U), inp)
    assert exact.max_deviation(brute) < 1e-9
    assert len(exact.outcomes) == math.comb(sum(inp) + M - 1, sum(inp))


def test_enumeration_cap():
    with pytest.raises(ResourceCapError):
        full_distribution(haar_random(10, 0), (1,) * 10, cap=1000)


def test_input_validation():
    with pytest.raises(ValidationError):
        full_distribution(HOM, (1, 1, 0))
    with pytest.raises(ValidationError):
        full_distribution(HOM, (1, -1))


def test_sampling_is_deterministic():
    dist = full_distribution(haar_random(3, 1), (1, 1, 0))
    assert sample(dist, 5, 200) == sample(dist, 5, 200)
    assert sample(dist, 5, 200) != sample(dist, 6, 200)


def test_hom_samples_never_coincide():
    counts = Counter(sample(full_distribution(HOM, (1, 1)), 0, 10_000))
    assert counts[(1, 1)] == 0
    assert abs(counts[(2, 0)] - 5000) < 5 * 50


def test_sample_validation():
    with pytest.raises(ValidationError):
        sample(OutputDistribution(1, 0, {}), 0, 3)
    with pytest.raises(ValidationError):
        sample(full_distribution(HOM, (1, 1)), 0, -1)


def test_total_variation_examples():
    dist = OutputDistribution(2, 1, {(1, 0): 0.5, (0, 1): 0.5})
    assert total_variation({(1, 0): 5, (0, 1): 5}, dist) == pytest.approx(0)
    assert total_variation({(1, 0): 10}, dist) == pytest.approx(0.5)


def test_swap_readout():
    assert apply_readout((1, 0, 1), SwapPhotodetector(), 0).outcome == (1, 0, 1)
    res = apply_readout((2, 0), SwapPhotodetector(), 0)
    assert res.rejected and res.outcome == (1, 0)
    assert not apply_readout((2, 0), SwapPhotodetector(post_select_bunching=False), 0).rejected


def test_swap_acceptance_equals_collision_free_mass():
    dist = full_distribution(haar_random(4, 3), (1, 1, 1, 0))
    free = sum(p for o, p in dist.entries.items() if max(o) <= 1)
    out = readout_distribution(dist, SwapPhotodetector())
    assert out.probabilities.sum() == pytest.approx(free)
    assert out.rejected == pytest.approx(1 - free)
    assert out.total() == pytest.approx(1)


def test_qnd_perfect_counter():
    res = apply_readout((3, 0, 2), QndCounter(eta=1.0, repetitions=1), 0)
    assert res.outcome == (3, 0, 2) and not res.rejected


def test_qnd_unresolved_beyond_probe_range():
    res = apply_readout((9,), QndCounter(eta=1.0, max_n_probe=8), 0)
    assert res.rejected and res.outcome == (UNRESOLVED,)


def test_qnd_success_probability():
    model = QndCounter(eta=0.9, repetitions=5)
    assert model.mode_success == pytest.approx(1 - 1e-5)
    dist = readout_distribution(OutputDistribution(2, 2, {(1, 1): 1.0}), model)
    assert dist[(1, 1)] == pytest.approx(model.mode_success**2)
    assert dist.rejected + dist.probabilities.sum() == pytest.approx(1)
    dist.check_normalized()


@pytest.mark.parametrize("kw", [dict(eta=0.0), dict(eta=1.1), dict(repetitions=0), dict(max_n_probe=-1)])
def test_qnd_validation(kw):
    with pytest.raises(ValidationError):
        QndCounter(**kw)


def test_probe_frequencies():
    f = qnd_probe_frequencies(10.0, 1.0, 2.0, 3)
    assert np.allclose(f, [10.5, 11.5, 12.5, 13.5])


def test_loss_examples():
    dist = OutputDistribution(2, 2, {(1, 1): 1.0})
    assert apply_loss(dist, 1.0).entries == dist.entries
    assert apply_loss(dist, 0.0)[(0, 0)] == pytest.approx(1)
    lossy = apply_loss(dist, 0.9)
    assert lossy[(1, 1)] == pytest.approx(0.81)
    assert lossy[(1, 0)] == pytest.approx(0.09)
    assert lossy.total() == pytest.approx(1)
    assert list(lossy.entries)[0] == (1, 1)


def test_loss_validation():
    with pytest.raises(ValidationError):
        apply_loss(OutputDistribution(1, 1, {(1,): 1.0}), 1.5)


def test_survival_probability():
    assert survival_probability(2 * math.pi * 1e3, 0.0) == 1
    assert survival_probability(1.0, 2.0) == pytest.approx(math.exp(-2))


def test_loss_on_samples_matches_thinning():
    kept = apply_loss_to_samples([(2, 0)] * 20_000, 0.5, 1)
    counts = Counter(kept)
    assert counts[(1, 0)] / 20_000 == pytest.approx(0.5, abs=0.02)
    assert apply_loss_to_samples([(2, 0)], 1.0, 1) == [(2, 0)]
