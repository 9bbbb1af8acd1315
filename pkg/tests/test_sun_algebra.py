import numpy as np
import pytest

from spin_povm.errors import DimensionGuardError, SpinValueError
from spin_povm.sun_algebra import (
    anticommutator_residual,
    build_d_tensor,
    build_generator_basis,
)

# independent Gell-Mann literals used as the oracle for the D=3 case
GELL_MANN = np.array(
    [
        [[0, 1, 0], [1, 0, 0], [0, 0, 0]],
        [[0, -1j, 0], [1j, 0, 0], [0, 0, 0]],
        [[1, 0, 0], [0, -1, 0], [0, 0, 0]],
        [[0, 0, 1], [0, 0, 0], [1, 0, 0]],
        [[0, 0, -1j], [0, 0, 0], [1j, 0, 0]],
        [[0, 0, 0], [0, 0, 1], [0, 1, 0]],
        [[0, 0, 0], [0, 0, -1j], [0, 1j, 0]],
        np.diag([1, 1, -2]) / np.sqrt(3),
    ],
    dtype=complex,
)


def test_spin_half_gives_paulis():
    basis = build_generator_basis("1/2")
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    np.testing.assert_array_equal(basis.matrices[0], sx)
    np.testing.assert_array_equal(basis.matrices[1], sy)
    np.testing.assert_array_equal(basis.matrices[2], sz)
    gram = np.einsum("aij,bji->ab", basis.matrices, basis.matrices).real
    np.testing.assert_allclose(gram, 2 * np.eye(3), atol=1e-15)


def test_spin_one_matches_gell_mann_convention():
    basis = build_generator_basis("1")
    assert basis.count == 8
    np.testing.assert_allclose(basis.matrices, GELL_MANN, atol=1e-15)
    np.testing.assert_array_equal(basis.matrices[2], np.diag([1, -1, 0]))
    np.testing.assert_allclose(basis.matrices[7], np.diag([1, 1, -2]) / np.sqrt(3))
    assert basis.orthonormality_residual() < 1e-12


def test_spin_three_halves_counts_and_orthogonality():
    basis = build_generator_basis("3/2")
    assert basis.count == 15
    assert basis.orthonormality_residual() < 1e-12


@pytest.mark.parametrize("two_j", range(1, 6))
def test_generators_hermitian_traceless(two_j):
    basis = build_generator_basis(f"{two_j}/2")
    for g in basis.matrices:
        np.testing.assert_allclose(g, g.conj().T, atol=1e-15)
        assert abs(np.trace(g)) < 1e-15


def test_rejects_bad_spins():
    with pytest.raises(SpinValueError):
        build_generator_basis("1/3")
    with pytest.raises(SpinValueError):
        build_generator_basis("-1")
    with pytest.raises(DimensionGuardError):
        build_generator_basis("4")  # D = 9 above the default maximum
    basis = build_generator_basis("4", max_dim=9)
    assert basis.count == 80


def test_d_tensor_vanishes_for_su2():
    d = build_d_tensor(build_generator_basis("1/2"))
    assert d.entries == {}


def test_d_118_matches_direct_anticommutator_trace():
    # oracle: evaluate Tr({l1, l1} l8)/4 on the literal Gell-Mann matrices
    l1, l8 = GELL_MANN[0], GELL_MANN[7]
    oracle = 0.25 * np.trace((l1 @ l1 + l1 @ l1) @ l8).real
    d = build_d_tensor(build_generator_basis("1"))
    assert d.entries[(0, 0, 7)] == pytest.approx(oracle, abs=1e-14)
    assert oracle == pytest.approx(1 / np.sqrt(3), abs=1e-14)


def test_d3_contraction_is_five_thirds_delta():
    d = build_d_tensor(build_generator_basis("1"))
    dd = d.dense()
    gram = np.einsum("abc,dbc->ad", dd, dd)
    np.testing.assert_allclose(gram, (5 / 3) * np.eye(8), atol=1e-10)


@pytest.mark.parametrize("two_j", range(1, 6))
def test_orthonormality_all_supported_dims(two_j, bases):
    assert bases[two_j].orthonormality_residual() < 1e-12


@pytest.mark.parametrize("two_j", range(1, 5))
def test_d_identities(two_j, d_tensors):
    d = d_tensors[two_j]
    assert d.trace_identity_residual() < 1e-12
    assert d.contraction_identity_residual() < 1e-10


@pytest.mark.parametrize("two_j", range(1, 4))
def test_anticommutator_reconstruction(two_j, bases, d_tensors):
    assert anticommutator_residual(bases[two_j], d_tensors[two_j]) < 1e-10


def test_d_tensor_total_symmetry(d_tensors):
    d = d_tensors[2]
    dense = d.dense()
    for perm in [(0, 2, 1), (1, 0, 2), (2, 1, 0), (1, 2, 0), (2, 0, 1)]:
        np.testing.assert_array_equal(dense, dense.transpose(perm))


def test_dense_matches_sparse_quadratic_forms(d_tensors, rng):
    d = d_tensors[2]
    v = rng.standard_normal(8)
    dense = d.dense()
    np.testing.assert_allclose(
        d.contract_pair(v), np.einsum("abc,a,b->c", dense, v, v), atol=1e-12
    )
    assert d.cubic(v) == pytest.approx(np.einsum("abc,a,b,c->", dense, v, v, v), abs=1e-12)
    assert d.quartic(v) == pytest.approx(
        np.einsum("abe,cde,a,b,c,d->", dense, dense, v, v, v, v), abs=1e-12
    )
