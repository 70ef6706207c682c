import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mwboson.errors import ResourceCapError, ValidationError
from mwboson.fock import (BasisLabel, FockBasis, StateVector, apply_ladder, as_mode_tensor, boson_operator,
                          enumerate_basis, from_mode_tensor, index_of, number_operator, qubit_operator)


def test_fixed_total_order():
    labels = [lab.counts for lab in enumerate_basis(FockBasis.fixed_total(3, 2))]
    assert labels == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]


def test_vacuum_sector():
    assert [lab.counts for lab in enumerate_basis(FockBasis.fixed_total(5, 0))] == [(0,) * 5]


def test_cutoff_with_qubit_has_eight_states():
    basis = FockBasis.per_mode_cutoff(2, 1, qubit_slots=1)
    labels = enumerate_basis(basis)
    assert basis.dim == len(labels) == 8
    # qubit pattern is the most significant part of the index
    assert labels[0] == BasisLabel((1, 1), (0,))
    assert labels[4] == BasisLabel((1, 1), (1,))


@pytest.mark.parametrize("label,index", [((2, 0, 0), 0), ((0, 0, 2), 5), ((1, 0, 1), 2)])
def test_index_examples(label, index):
    assert index_of(FockBasis.fixed_total(3, 2), label) == index


@pytest.mark.parametrize("label", [(1, 2, 0), (1, 1), (-1, 3, 0)])
def test_index_rejects_inadmissible(label):
    with pytest.raises(ValidationError):
        index_of(FockBasis.fixed_total(3, 2), label)


def test_index_rejects_bad_qubits():
    basis = FockBasis.per_mode_cutoff(1, 2, qubit_slots=1)
    with pytest.raises(ValidationError):
        index_of(basis, (0,), (2,))
    with pytest.raises(ValidationError):
        index_of(basis, (0,), ())


@pytest.mark.parametrize("M,N", [(1, 0), (1, 4), (3, 2), (4, 3), (6, 5)])
def test_fixed_total_dimension(M, N):
    assert FockBasis.fixed_total(M, N, qubit_slots=1).dim == math.comb(N + M - 1, N) * 2


@pytest.mark.parametrize("M,c,q", [(1, 0, 0), (2, 3, 1), (3, 2, 2)])
def test_cutoff_dimension(M, c, q):
    assert FockBasis.per_mode_cutoff(M, c, qubit_slots=q).dim == (c + 1) ** M * 2**q


def test_dimension_limit():
    basis = FockBasis.fixed_total(30, 10, dim_limit=1000)
    with pytest.raises(ResourceCapError):
        enumerate_basis(basis)


@pytest.mark.parametrize("kw", [dict(mode_count=0, total=1), dict(mode_count=2), dict(mode_count=2, total=1, cutoff=1),
                                dict(mode_count=2, total=-1), dict(mode_count=2, cutoff=1, qubit_slots=-1)])
def test_invalid_basis(kw):
    with pytest.raises(ValidationError):
        FockBasis(**kw)


@st.composite
def basis_and_label(draw):
    M = draw(st.integers(1, 5))
    q = draw(st.integers(0, 2))
    qubits = tuple(draw(st.lists(st.integers(0, 1), min_size=q, max_size=q)))
    if draw(st.booleans()):
        N = draw(st.integers(0, 5))
        cuts = sorted(draw(st.lists(st.integers(0, N), min_size=M - 1, max_size=M - 1)))
        counts = tuple(b - a for a, b in zip([0] + cuts, cuts + [N]))
        basis = FockBasis.fixed_total(M, N, qubit_slots=q)
    else:
        c = draw(st.integers(0, 3))
        counts = tuple(draw(st.lists(st.integers(0, c), min_size=M, max_size=M)))
        basis = FockBasis.per_mode_cutoff(M, c, qubit_slots=q)
    return basis, counts, qubits


@given(basis_and_label())
def test_index_enumerate_roundtrip(data):
    basis, counts, qubits = data
    i = index_of(basis, counts, qubits)
    assert enumerate_basis(basis)[i] == BasisLabel(counts, qubits)


@pytest.mark.parametrize("basis", [FockBasis.fixed_total(4, 3), FockBasis.per_mode_cutoff(3, 2, qubit_slots=1)])
def test_enumeration_is_descending_and_indexed(basis):
    labels = enumerate_basis(basis)
    assert [index_of(basis, lab) for lab in labels] == list(range(basis.dim))
    bos = [lab.counts for lab in labels[: basis.boson_dim]]
    assert bos == sorted(bos, reverse=True)


def test_ladder_examples():
    basis = FockBasis.per_mode_cutoff(1, 3)
    one = apply_ladder(StateVector.vacuum(basis), 0, "creation")
    assert one.amplitude((1,)) == pytest.approx(1)
    two = StateVector.from_label(basis, (2,))
    lowered = apply_ladder(two, 0, "annihilation")
    assert lowered.amplitude((1,)) == pytest.approx(math.sqrt(2))
    zero = apply_ladder(StateVector.vacuum(basis), 0, "annihilation")
    assert np.allclose(zero.amplitudes, 0)


def test_creation_at_cutoff_records_leakage():
    basis = FockBasis.per_mode_cutoff(1, 2)
    top = StateVector.from_label(basis, (2,))
    out = apply_ladder(top, 0, "creation")
    assert np.allclose(out.amplitudes, 0)
    assert out.leakage == pytest.approx(3.0)


def test_ladder_rejects_fixed_total():
    with pytest.raises(ValidationError):
        apply_ladder(StateVector.vacuum(FockBasis.fixed_total(2, 0)), 0, "creation")


@pytest.mark.parametrize("c", [1, 3, 6])
def test_commutator_below_cutoff(c):
    basis = FockBasis.per_mode_cutoff(2, c)
    a = boson_operator(basis, (), (0,)).toarray()
    ad = boson_operator(basis, (0,), ()).toarray()
    comm = a @ ad - ad @ a
    keep = basis.boson_labels[:, 0] < c
    assert np.allclose(comm[np.ix_(keep, keep)], np.eye(keep.sum()))


def test_hopping_closes_fixed_total():
    basis = FockBasis.fixed_total(3, 3)
    hop = boson_operator(basis, (0,), (2,))
    assert hop.shape == (basis.dim, basis.dim)
    with pytest.raises(ValidationError):
        boson_operator(basis, (0,), ())


def test_number_and_qubit_operators():
    basis = FockBasis.per_mode_cutoff(2, 2, qubit_slots=1)
    n1 = number_operator(basis, 1).diagonal()
    assert np.array_equal(n1, np.tile(basis.boson_labels[:, 1], 2))
    sz = qubit_operator(basis, 0, "sz").diagonal()
    assert np.array_equal(sz, np.repeat([-1, 1], basis.boson_dim))
    sp_ = qubit_operator(basis, 0, "sp")
    g = StateVector.vacuum(basis).amplitudes
    assert (sp_ @ g)[index_of(basis, (0, 0), (1,))] == 1


def test_mode_tensor_roundtrip():
    basis = FockBasis.per_mode_cutoff(3, 2, qubit_slots=1)
    rng = np.random.default_rng(0)
    amps = rng.normal(size=basis.dim) + 1j * rng.normal(size=basis.dim)
    state = StateVector(basis, amps)
    t = as_mode_tensor(state)
    assert t[1, 2, 0, 1] == amps[index_of(basis, (2, 0, 1), (1,))]
    assert np.array_equal(from_mode_tensor(basis, t), amps)


def test_state_observables():
    basis = FockBasis.per_mode_cutoff(2, 3)
    amps = np.zeros(basis.dim, dtype=complex)
    amps[index_of(basis, (1, 2))] = 0.6
    amps[index_of(basis, (3, 0))] = 0.8j
    state = StateVector(basis, amps)
    assert state.norm_sq() == pytest.approx(1)
    assert state.mean_photons(0) == pytest.approx(0.36 * 1 + 0.64 * 3)
    assert state.mean_photons() == pytest.approx(3)
    assert np.allclose(state.mode_distribution(1), [0.64, 0, 0.36, 0])


def test_state_shape_checked():
    with pytest.raises(ValidationError):
        StateVector(FockBasis.fixed_total(2, 1), np.zeros(3))
