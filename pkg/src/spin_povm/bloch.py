"""Spinors, generalized Bloch vectors, and the pure-state constraint.

A spin-J pure state with density matrix rho is expanded as

    rho = I/(2J+1) + sqrt(J/(2J+1)) * sum_a n_a g_a

over the SU(2J+1) generator basis.  Inverting with Tr(g_a g_b) = 2 delta_ab
gives the map used here, n_a = (1/2) sqrt((2J+1)/J) Tr(rho g_a); it is not
usually written out but follows in one line from the expansion and the
trace normalization.  The unit vector n of a pure state additionally obeys
the covariant constraint d_abc n_a n_b = (2J-1)/sqrt(J(2J+1)) n_c, which
carves the 4J-parameter pure-state manifold out of the unit sphere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SpinPovmError, StateNormError
from .spins import format_spin, parse_spin, spin_dim
from .sun_algebra import GeneratorBasis, SymmetricStructureTensor

NORM_TOL = 1e-8


def bloch_scale(two_j: int) -> float:
    """Coefficient (1/2) sqrt((2J+1)/J) of the inversion formula."""
    return 0.5 * math.sqrt(2.0 * (two_j + 1) / two_j)


def purity_ratio(two_j: int) -> float:
    """(2J-1)/sqrt(J(2J+1)): the pure-state eigenvalue of the d-contraction."""
    return (two_j - 1) / math.sqrt(0.5 * two_j * (two_j + 1))


@dataclass(frozen=True, eq=False)
class Spinor:
    """Normalized complex amplitude vector of a spin-J pure state."""

    two_j: int
    amplitudes: np.ndarray  # (2J+1,) complex

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (spin_dim(self.two_j),):
            raise SpinPovmError(
                f"spin {format_spin(self.two_j)} needs {spin_dim(self.two_j)} "
                f"amplitudes, got shape {amps.shape}"
            )
        deviation = abs(float(np.sum(amps.real**2 + amps.imag**2)) - 1.0)
        if deviation > NORM_TOL:
            raise StateNormError(f"spinor norm deviates from 1 by {deviation:.3e}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, spin, amplitudes) -> "Spinor":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0.0:
            raise StateNormError("cannot normalize the zero vector")
        return cls(parse_spin(spin), amps / norm)

    @property
    def dim(self) -> int:
        return spin_dim(self.two_j)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def overlap_probability(self, other: "Spinor") -> float:
        """|<self|other>|^2."""
        return abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2


@dataclass(frozen=True, eq=False)
class BlochVector:
    """Real adjoint-space vector n_a, a = 1..(2J+1)^2-1."""

    two_j: int
    components: np.ndarray

    def __post_init__(self):
        comp = np.array(self.components, dtype=float)
        expected = spin_dim(self.two_j) ** 2 - 1
        if comp.shape != (expected,):
            raise SpinPovmError(
                f"spin {format_spin(self.two_j)} Bloch vector needs {expected} "
                f"components, got shape {comp.shape}"
            )
        comp.setflags(write=False)
        object.__setattr__(self, "components", comp)

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))


def spinor_to_bloch(psi: Spinor, basis: GeneratorBasis) -> BlochVector:
    """Bloch vector n_a = (1/2) sqrt((2J+1)/J) <psi| g_a |psi>."""
    if basis.dim != psi.dim:
        raise SpinPovmError(f"basis dim {basis.dim} does not match spinor dim {psi.dim}")
    comp = bloch_components(psi.amplitudes[np.newaxis, :], basis)[0]
    return BlochVector(two_j=psi.two_j, components=comp)


def bloch_components(states: np.ndarray, basis: GeneratorBasis) -> np.ndarray:
    """Rows of Bloch vectors for a (n, D) array of normalized amplitudes."""
    scale = bloch_scale(basis.dim - 1)
    return scale * np.einsum(
        "aij,ri,rj->ra", basis.matrices, states.conj(), states, optimize=True
    ).real


def bloch_to_density(n: BlochVector, basis: GeneratorBasis) -> np.ndarray:
    """Reconstruct rho = I/(2J+1) + sqrt(J/(2J+1)) n_a g_a."""
    dim = basis.dim
    two_j = n.two_j
    coef = math.sqrt(0.5 * two_j / (two_j + 1))
    return np.eye(dim) / dim + coef * np.einsum("a,aij->ij", n.components, basis.matrices)


def purity_residual(n: BlochVector, d: SymmetricStructureTensor) -> np.ndarray:
    """Componentwise d_abc n_a n_b - (2J-1)/sqrt(J(2J+1)) n_c.

    Vanishes exactly on pure-state Bloch vectors; a large value is
    information (the vector is off the manifold), not an error.
    """
    if d.dim != spin_dim(n.two_j):
        raise SpinPovmError(f"tensor dim {d.dim} does not match spin {format_spin(n.two_j)}")
    return d.contract_pair(n.components) - purity_ratio(n.two_j) * n.components


def cubic_quartic_checks(n: BlochVector, d: SymmetricStructureTensor) -> tuple[float, float]:
    """(d_abc n_a n_b n_c, d_abe d_cde n_a n_b n_c n_d).

    For pure states these equal (2J-1)/sqrt(J(2J+1)) and its square.
    """
    return d.cubic(n.components), d.quartic(n.components)


def cubic_quartic_expected(two_j: int) -> tuple[float, float]:
    ratio = purity_ratio(two_j)
    return ratio, ratio**2


def bloch_overlap(n: BlochVector, m: BlochVector) -> float:
    """|<psi|phi>|^2 = (1 + 2J n.m)/(2J+1) for the states behind n and m."""
    if n.two_j != m.two_j:
        raise SpinPovmError(
            f"cannot overlap spin {format_spin(n.two_j)} with spin {format_spin(m.two_j)}"
        )
    two_j = n.two_j
    return (1.0 + two_j * float(n.components @ m.components)) / (two_j + 1)
