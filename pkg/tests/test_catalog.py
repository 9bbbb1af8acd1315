from fractions import Fraction

import numpy as np
import pytest

import spin_povm as sp
from spin_povm.bloch import BlochVector, bloch_components, purity_residual
from spin_povm.catalog import (
    SPIN_HALF_KNOWN_MIN,
    bound_consistency_gap,
    catalog_entries,
    catalog_names,
    catalog_povm,
    hypertetrahedron_bloch_table,
    hypertetrahedron_frame_map,
)
from spin_povm.errors import SpinPovmError, UnsupportedCopiesError


# -- single-copy basis measurement ---------------------------------------------


@pytest.mark.parametrize("spin", ["1/2", "1", "3/2", "2", "5/2", "3", "7/2"])
def test_von_neumann_saturates_single_copy_bound(spin, rng):
    vn = sp.von_neumann_povm(spin)
    bound = sp.min_projector_bound(1, spin)
    assert vn.n_elements == bound.n_lower_bound
    np.testing.assert_array_equal(vn.weights, np.ones(vn.n_elements))
    basis = sp.build_generator_basis(spin)
    nb = bloch_components(vn.states, basis)
    gram = nb @ nb.T
    off = gram[~np.eye(vn.n_elements, dtype=bool)]
    np.testing.assert_allclose(off, -1.0 / vn.two_j, atol=1e-12)


def test_von_neumann_spin1_bloch_vectors(bases):
    nb = bloch_components(sp.von_neumann_povm("1").states, bases[2])
    s3 = np.sqrt(3.0)
    expected = np.array(
        [
            [0, 0, s3 / 2, 0, 0, 0, 0, 0.5],
            [0, 0, -s3 / 2, 0, 0, 0, 0, 0.5],
            [0, 0, 0, 0, 0, 0, 0, -1.0],
        ]
    )
    np.testing.assert_allclose(nb, expected, atol=1e-14)


def test_von_neumann_qubit_antipodal(bases):
    nb = bloch_components(sp.von_neumann_povm("1/2").states, bases[1])
    assert nb[0] @ nb[1] == pytest.approx(-1.0, abs=1e-14)


def test_von_neumann_passes_all_checks(bases, d_tensors):
    vn = sp.von_neumann_povm("1")
    report = sp.verify_povm(vn, bases[2], d_tensors[2], samples=500, seed=2)
    assert report.max_defined() < 1e-10


# -- two-copy qubit tetrahedron --------------------------------------------------


def test_tetrahedron_weights_and_dots(bases):
    tet = sp.tetrahedron_j12_n2()
    assert tet.weights.sum() == pytest.approx(3.0, abs=1e-12)
    np.testing.assert_allclose(tet.weights, 0.75)
    bound = sp.min_projector_bound(2, "1/2")
    assert float(bound.weight_upper_bound) == pytest.approx(0.75, abs=1e-15)
    nb = bloch_components(tet.states, bases[1])
    gram = nb @ nb.T
    off = gram[~np.eye(4, dtype=bool)]
    np.testing.assert_allclose(off, -1 / 3, atol=1e-12)


def test_tetrahedron_passes_all_checks(bases, d_tensors):
    tet = sp.tetrahedron_j12_n2()
    report = sp.verify_povm(tet, bases[1], d_tensors[1], samples=500, seed=2)
    assert report.max_defined() < 1e-10


# -- two-copy spin-1 hypertetrahedron ---------------------------------------------


def test_hypertetrahedron_geometry(bases):
    hyp = sp.hypertetrahedron_j1_n2()
    assert hyp.n_elements == 9
    assert hyp.weights.sum() == pytest.approx(6.0, abs=1e-12)
    overlaps = np.abs(hyp.states @ hyp.states.conj().T)
    off = overlaps[~np.eye(9, dtype=bool)]
    np.testing.assert_allclose(off, 0.5, atol=1e-12)
    nb = bloch_components(hyp.states, bases[2])
    gram = nb @ nb.T
    np.testing.assert_allclose(gram[~np.eye(9, dtype=bool)], -1 / 8, atol=1e-12)
    assert sp.completeness_residual(hyp) < 1e-10


def test_hypertetrahedron_weights_saturate_bound():
    bound = sp.min_projector_bound(2, "1")
    assert abs(2 / 3 - float(bound.weight_upper_bound)) < 1e-15


def test_hypertetrahedron_weights_forced_by_moment_system(bases):
    # oracle: with the states fixed, solve the order-0..2 equations for the
    # weights by linear least squares; the unique solution is 2/3 everywhere
    hyp = sp.hypertetrahedron_j1_n2()
    nb = bloch_components(hyp.states, bases[2])
    rows = [np.ones(9)]
    rhs = [6.0]
    for a in range(8):
        rows.append(nb[:, a])
        rhs.append(0.0)
    for a in range(8):
        for b in range(a, 8):
            rows.append(nb[:, a] * nb[:, b])
            rhs.append(6.0 / 8.0 if a == b else 0.0)
    matrix, target = np.array(rows), np.array(rhs)
    solution, *_ = np.linalg.lstsq(matrix, target, rcond=None)
    np.testing.assert_allclose(solution, 2 / 3, atol=1e-12)
    assert np.abs(matrix @ solution - target).max() < 1e-12


def test_hypertetrahedron_bloch_rows_match_reference_table(bases):
    # the tabulated rows live in a different generator frame; under the
    # frozen signed permutation the match is exact component-wise
    hyp = sp.hypertetrahedron_j1_n2()
    nb = bloch_components(hyp.states, bases[2])
    table = hypertetrahedron_bloch_table()
    np.testing.assert_allclose(hypertetrahedron_frame_map(nb), table, atol=1e-12)
    # first row of the table in this library's frame
    np.testing.assert_allclose(
        hypertetrahedron_frame_map(nb[0]), [0.5, np.sqrt(3) / 2, 0, 0, 0, 0, 0, 0],
        atol=1e-12,
    )


def test_reference_table_is_a_unit_hypertetrahedron():
    table = hypertetrahedron_bloch_table()
    np.testing.assert_allclose(np.linalg.norm(table, axis=1), 1.0, atol=1e-12)
    gram = table @ table.T
    np.testing.assert_allclose(gram[~np.eye(9, dtype=bool)], -1 / 8, atol=1e-12)


def test_reference_table_rows_are_pure_after_frame_change(bases, d_tensors):
    # mapping back into the Gell-Mann frame, every tabulated row satisfies
    # the purity constraint; the raw rows do not (their cubic invariant is
    # zero), which is exactly why the frame map exists
    hyp = sp.hypertetrahedron_j1_n2()
    nb = bloch_components(hyp.states, bases[2])
    d = d_tensors[2]
    for row_mapped, row_gm in zip(hypertetrahedron_frame_map(nb), nb):
        assert np.abs(purity_residual(BlochVector(2, row_gm), d)).max() < 1e-10
    raw_first = hypertetrahedron_bloch_table()[0]
    assert d.cubic(raw_first) == pytest.approx(0.0, abs=1e-12)
    assert np.abs(purity_residual(BlochVector(2, raw_first), d)).max() > 0.1


def test_hypertetrahedron_passes_all_checks(bases, d_tensors):
    hyp = sp.hypertetrahedron_j1_n2()
    report = sp.verify_povm(hyp, bases[2], d_tensors[2], samples=500, seed=2)
    assert report.max_defined() < 1e-10


# -- catalog fidelities ------------------------------------------------------------


def test_catalog_fidelities_within_three_sigma():
    for name in catalog_names():
        povm = catalog_povm(name)
        est = sp.estimate_average_fidelity(povm, samples=50_000, seed=17)
        assert est.mean == pytest.approx(est.analytic, abs=3 * est.stderr), name


def test_every_catalog_povm_passes_all_checks():
    for name in catalog_names():
        povm = catalog_povm(name)
        basis = sp.build_generator_basis(f"{povm.two_j}/2")
        d = sp.build_d_tensor(basis)
        report = sp.verify_povm(povm, basis, d, samples=500, seed=23)
        assert report.max_defined() < 1e-10, name


# -- bounds -------------------------------------------------------------------------


@pytest.mark.parametrize(
    "spin,expected",
    [("1/2", 6), ("1", 18), ("3/2", 40), ("2", 75), ("5/2", 126)],
)
def test_three_copy_bound_sequence(spin, expected):
    assert sp.min_projector_bound(3, spin).n_lower_bound == expected


@pytest.mark.parametrize(
    "ncopies,spin,n_expected,cap",
    [
        (1, "1", 3, Fraction(1)),
        (2, "1/2", 4, Fraction(3, 4)),
        (2, "1", 9, Fraction(2, 3)),
        (2, "3/2", 16, Fraction(5, 8)),
        (3, "1/2", 6, Fraction(2, 3)),
        (3, "1", 18, Fraction(5, 9)),
    ],
)
def test_bound_values(ncopies, spin, n_expected, cap):
    report = sp.min_projector_bound(ncopies, spin)
    assert report.n_lower_bound == n_expected
    assert report.weight_upper_bound == cap


def test_bound_saturability_labels():
    assert sp.min_projector_bound(1, "5/2").saturable == "yes"
    assert sp.min_projector_bound(2, "1/2").saturable == "yes"
    assert sp.min_projector_bound(2, "1").saturable == "yes"
    assert sp.min_projector_bound(2, "3/2").saturable == "unknown"
    assert sp.min_projector_bound(3, "1/2").saturable == "yes"
    assert sp.min_projector_bound(3, "1").saturable == "no-by-parity"
    assert sp.min_projector_bound(3, "2").saturable == "unknown"


def test_bound_rejects_unsupported_copies():
    with pytest.raises(UnsupportedCopiesError):
        sp.min_projector_bound(4, "1/2")


def test_bound_consistency_inequality():
    for ncopies in (1, 2, 3):
        for two_j in range(1, 8):
            gap = bound_consistency_gap(sp.min_projector_bound(ncopies, f"{two_j}/2"))
            assert gap >= -1e-9, (ncopies, two_j)


@pytest.mark.parametrize(
    "spin,p,q,ok",
    [
        ("1", Fraction(9, 2), Fraction(25, 2), False),
        ("1/2", Fraction(1), Fraction(4), True),
        ("2", Fraction(25), Fraction(49), True),
        ("3", Fraction(147, 2), Fraction(243, 2), False),
        ("3/2", Fraction(12), Fraction(27), True),
    ],
)
def test_parity_obstruction(spin, p, q, ok):
    got_p, got_q, got_ok = sp.n3_parity_obstruction(spin)
    assert (got_p, got_q, got_ok) == (p, q, ok)


def test_parity_pair_count_identity():
    for two_j in range(1, 10):
        p, q, _ = sp.n3_parity_obstruction(f"{two_j}/2")
        n3 = sp.min_projector_bound(3, f"{two_j}/2").n_lower_bound
        assert p + q == n3 - 1


@pytest.mark.parametrize(
    "ncopies,spin,expected",
    [(1, "1", 1.0), (2, "1", 1.0), (3, "3", 27.0), (2, "2", 4.0)],
)
def test_conjectured_scaling(ncopies, spin, expected):
    assert sp.conjectured_scaling(ncopies, spin) == expected


def test_spin_half_reference_counts():
    assert SPIN_HALF_KNOWN_MIN == {1: 2, 2: 4, 3: 6, 4: 10, 5: 12}


# -- named catalog -------------------------------------------------------------------


def test_catalog_names_and_entries():
    names = catalog_names()
    assert "hypertetrahedron-j1-n2" in names
    assert "tetrahedron-j12-n2" in names
    entries = catalog_entries()
    assert all({"name", "J", "N", "elements"} <= set(e) for e in entries)
    with pytest.raises(SpinPovmError):
        catalog_povm("no-such-povm")
