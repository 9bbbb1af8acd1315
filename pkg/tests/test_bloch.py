import numpy as np
import pytest

from spin_povm.bloch import (
    BlochVector,
    Spinor,
    bloch_components,
    bloch_overlap,
    bloch_to_density,
    cubic_quartic_checks,
    cubic_quartic_expected,
    purity_residual,
    spinor_to_bloch,
)
from spin_povm.errors import SpinPovmError, StateNormError
from spin_povm.montecarlo import sample_state_block


def random_spinor(two_j, rng):
    return Spinor(two_j, sample_state_block(two_j, 1, rng)[0])


def explicit_spin1_bloch(psi):
    """Componentwise spin-1 Bloch map written out by hand as an oracle."""
    x, y = psi.real, psi.imag
    s3 = np.sqrt(3.0)
    return np.array(
        [
            s3 * (x[0] * x[1] + y[0] * y[1]),
            s3 * (x[0] * y[1] - x[1] * y[0]),
            0.5 * s3 * (x[0] ** 2 + y[0] ** 2 - x[1] ** 2 - y[1] ** 2),
            s3 * (x[0] * x[2] + y[0] * y[2]),
            s3 * (x[0] * y[2] - x[2] * y[0]),
            s3 * (x[1] * x[2] + y[1] * y[2]),
            s3 * (x[1] * y[2] - x[2] * y[1]),
            0.5 * (1.0 - 3.0 * (x[2] ** 2 + y[2] ** 2)),
        ]
    )


def test_spin_up_qubit(bases):
    psi = Spinor(1, np.array([1.0, 0.0], dtype=complex))
    n = spinor_to_bloch(psi, bases[1])
    np.testing.assert_allclose(n.components, [0.0, 0.0, 1.0], atol=1e-15)


def test_spin1_basis_state(bases):
    psi = Spinor(2, np.array([1.0, 0.0, 0.0], dtype=complex))
    n = spinor_to_bloch(psi, bases[2])
    expected = np.array([0, 0, np.sqrt(3) / 2, 0, 0, 0, 0, 0.5])
    np.testing.assert_allclose(n.components, expected, atol=1e-15)


def test_spin1_components_match_explicit_formulas(bases, rng):
    for _ in range(200):
        psi = random_spinor(2, rng)
        n = spinor_to_bloch(psi, bases[2])
        np.testing.assert_allclose(
            n.components, explicit_spin1_bloch(psi.amplitudes), atol=1e-13
        )


@pytest.mark.parametrize("two_j", [1, 2, 3, 4])
def test_round_trip_density_matrix(two_j, bases, rng):
    basis = bases[two_j]
    states = sample_state_block(two_j, 1000, rng)
    comps = bloch_components(states, basis)
    for k in range(0, 1000, 97):
        n = BlochVector(two_j, comps[k])
        rho = bloch_to_density(n, basis)
        np.testing.assert_allclose(
            rho, np.outer(states[k], states[k].conj()), atol=1e-12
        )
        assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
        assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-12)
    # unit norm across the full batch
    assert np.abs((comps**2).sum(axis=1) - 1.0).max() < 1e-10


def test_global_phase_invariance(bases, rng):
    psi = random_spinor(2, rng)
    for theta in (0.3, 1.7, -2.2):
        rotated = Spinor(2, np.exp(1j * theta) * psi.amplitudes)
        a = spinor_to_bloch(psi, bases[2]).components
        b = spinor_to_bloch(rotated, bases[2]).components
        assert np.abs(a - b).max() < 1e-14


@pytest.mark.parametrize("two_j", [1, 2, 3, 4])
def test_purity_residual_on_pure_states(two_j, bases, d_tensors, rng):
    basis, d = bases[two_j], d_tensors[two_j]
    states = sample_state_block(two_j, 1000, rng)
    comps = bloch_components(states, basis)
    worst = 0.0
    for row in comps:
        res = purity_residual(BlochVector(two_j, row), d)
        worst = max(worst, float(np.abs(res).max()))
    assert worst < 1e-10


def test_purity_residual_is_zero_identically_for_qubits(d_tensors, rng):
    # every SU(2) d-symbol vanishes, so any unit vector passes
    v = rng.standard_normal(3)
    v /= np.linalg.norm(v)
    res = purity_residual(BlochVector(1, v), d_tensors[1])
    np.testing.assert_array_equal(res, np.zeros(3))


def test_purity_residual_detects_mixed_direction(bases, d_tensors, rng):
    # a generic unit vector in adjoint space is off the pure-state manifold
    v = rng.standard_normal(8)
    v /= np.linalg.norm(v)
    res = purity_residual(BlochVector(2, v), d_tensors[2])
    assert np.abs(res).max() > 1e-3


def test_purity_matches_idempotency(bases, d_tensors, rng):
    # the covariant residual and rho = rho^2 agree on and off the manifold
    basis, d = bases[2], d_tensors[2]
    psi = random_spinor(2, rng)
    n_pure = spinor_to_bloch(psi, basis)
    rho = bloch_to_density(n_pure, basis)
    assert np.abs(rho @ rho - rho).max() < 1e-12
    assert np.abs(purity_residual(n_pure, d)).max() < 1e-12

    v = rng.standard_normal(8)
    v /= np.linalg.norm(v)
    n_off = BlochVector(2, v)
    rho_off = bloch_to_density(n_off, basis)
    assert np.abs(rho_off @ rho_off - rho_off).max() > 1e-3
    assert np.abs(purity_residual(n_off, d)).max() > 1e-3


@pytest.mark.parametrize(
    "two_j,expected",
    [
        (1, (0.0, 0.0)),
        (2, (1 / np.sqrt(3), 1 / 3)),
        (3, (2 / np.sqrt(6), 4 / 6)),
    ],
)
def test_cubic_quartic_closed_forms(two_j, expected, bases, d_tensors, rng):
    assert cubic_quartic_expected(two_j) == pytest.approx(expected, abs=1e-14)
    for _ in range(50):
        psi = random_spinor(two_j, rng)
        n = spinor_to_bloch(psi, bases[two_j])
        cubic, quartic = cubic_quartic_checks(n, d_tensors[two_j])
        assert cubic == pytest.approx(expected[0], abs=1e-10)
        assert quartic == pytest.approx(expected[1], abs=1e-10)


def test_overlap_matches_amplitude_inner_product(bases, rng):
    basis = bases[2]
    for _ in range(200):
        a = random_spinor(2, rng)
        b = random_spinor(2, rng)
        na = spinor_to_bloch(a, basis)
        nb = spinor_to_bloch(b, basis)
        direct = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
        assert bloch_overlap(na, nb) == pytest.approx(direct, abs=1e-12)


def test_overlap_extremes(bases, rng):
    basis = bases[1]
    up = spinor_to_bloch(Spinor(1, np.array([1, 0], dtype=complex)), basis)
    down = spinor_to_bloch(Spinor(1, np.array([0, 1], dtype=complex)), basis)
    assert bloch_overlap(up, down) == pytest.approx(0.0, abs=1e-15)
    assert up.components @ down.components == pytest.approx(-1.0, abs=1e-15)
    assert bloch_overlap(up, up) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("two_j", [1, 2, 3])
def test_overlap_bound(two_j, bases, rng):
    basis = bases[two_j]
    states = sample_state_block(two_j, 200, rng)
    comps = bloch_components(states, basis)
    gram = comps @ comps.T  # 200 x 200 > 1e4 distinct pairs
    assert gram.min() >= -1.0 / two_j - 1e-12


@pytest.mark.parametrize("two_j", [1, 2, 3])
def test_bloch_map_rank_at_most_4j(two_j, bases, rng):
    # the image is the 4J-dimensional pure-state manifold: the Jacobian of
    # the normalized-amplitudes -> Bloch map never exceeds rank 4J
    basis = bases[two_j]
    dim = two_j + 1

    def bloch_of_raw(raw):
        z = raw[:dim] + 1j * raw[dim:]
        z = z / np.linalg.norm(z)
        return bloch_components(z[np.newaxis], basis)[0]

    h = 1e-6
    for _ in range(5):
        raw = rng.standard_normal(2 * dim)
        jac = np.empty((basis.count, 2 * dim))
        for i in range(2 * dim):
            plus, minus = raw.copy(), raw.copy()
            plus[i] += h
            minus[i] -= h
            jac[:, i] = (bloch_of_raw(plus) - bloch_of_raw(minus)) / (2 * h)
        rank = int((np.linalg.svd(jac, compute_uv=False) > 1e-8).sum())
        assert rank <= 2 * two_j


def test_spinor_validation():
    with pytest.raises(StateNormError):
        Spinor(2, np.array([1.0, 1.0, 0.0], dtype=complex))
    with pytest.raises(SpinPovmError):
        Spinor(2, np.array([1.0, 0.0], dtype=complex))
    psi = Spinor.normalized("1", [1.0, 1.0, 0.0])
    assert np.linalg.norm(psi.amplitudes) == pytest.approx(1.0, abs=1e-15)


def test_overlap_requires_matching_spin(bases):
    a = spinor_to_bloch(Spinor(1, np.array([1, 0], dtype=complex)), bases[1])
    b = spinor_to_bloch(Spinor(2, np.array([1, 0, 0], dtype=complex)), bases[2])
    with pytest.raises(SpinPovmError):
        bloch_overlap(a, b)
