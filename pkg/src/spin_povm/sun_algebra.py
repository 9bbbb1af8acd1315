"""Generator basis of SU(2J+1) and its totally symmetric structure tensor.

The basis is the generalized Gell-Mann construction: for each column index
k = 2..D, the symmetric and antisymmetric off-diagonal pairs (j, k) for
j < k, followed by the diagonal (Cartan) generator of rank k-1.  At D = 3
this reproduces the textbook Gell-Mann matrices in their standard order,
which the explicit solution catalog relies on component-wise.

All generators are normalized to Tr(g_a g_b) = 2 delta_ab.  The symmetric
structure tensor d_abc = Tr({g_a, g_b} g_c) / 4 is stored sparsely by its
canonical (sorted) index triples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations

import numpy as np

from .errors import DimensionGuardError, SpinPovmError
from .spins import parse_spin, spin_dim

# construction-level identities hold to CONSTRUCTION_TOL; identities that
# involve one extra contraction are checked at DERIVED_TOL
CONSTRUCTION_TOL = 1e-12
DERIVED_TOL = 1e-10

# d-tensor storage grows ~ D^6; raise explicitly for higher spins
MAX_DIM_DEFAULT = 8


@dataclass(frozen=True, eq=False)
class GeneratorBasis:
    """Ordered hermitian traceless generators of SU(dim)."""

    dim: int
    matrices: np.ndarray  # (dim**2 - 1, dim, dim) complex

    def __post_init__(self):
        self.matrices.setflags(write=False)

    @property
    def two_j(self) -> int:
        return self.dim - 1

    @property
    def count(self) -> int:
        return self.dim**2 - 1

    def orthonormality_residual(self) -> float:
        """max |Tr(g_a g_b) - 2 delta_ab| over all pairs."""
        gram = np.einsum("aij,bji->ab", self.matrices, self.matrices).real
        return float(np.abs(gram - 2.0 * np.eye(self.count)).max())


@dataclass(frozen=True)
class SymmetricStructureTensor:
    """Totally symmetric d_abc of SU(dim), sparse over sorted index triples."""

    dim: int
    entries: dict[tuple[int, int, int], float] = field(repr=False)

    @property
    def count(self) -> int:
        return self.dim**2 - 1

    @cached_property
    def _coo(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All distinct index permutations of the canonical triples."""
        ia, ib, ic, val = [], [], [], []
        for key, v in self.entries.items():
            for a, b, c in set(permutations(key)):
                ia.append(a)
                ib.append(b)
                ic.append(c)
                val.append(v)
        return (
            np.asarray(ia, dtype=np.intp),
            np.asarray(ib, dtype=np.intp),
            np.asarray(ic, dtype=np.intp),
            np.asarray(val, dtype=float),
        )

    def dense(self) -> np.ndarray:
        """Full (K, K, K) array; affordable for the supported dims."""
        K = self.count
        out = np.zeros((K, K, K))
        ia, ib, ic, val = self._coo
        out[ia, ib, ic] = val
        return out

    def contract_pair(self, vec: np.ndarray) -> np.ndarray:
        """Vector with components sum_ab d_abc v_a v_b."""
        ia, ib, ic, val = self._coo
        return np.bincount(ic, weights=val * vec[ia] * vec[ib], minlength=self.count)

    def cubic(self, vec: np.ndarray) -> float:
        """Scalar sum_abc d_abc v_a v_b v_c."""
        ia, ib, ic, val = self._coo
        return float(np.sum(val * vec[ia] * vec[ib] * vec[ic]))

    def quartic(self, vec: np.ndarray) -> float:
        """Scalar sum d_abe d_cde v_a v_b v_c v_d = |contract_pair(v)|^2."""
        t = self.contract_pair(vec)
        return float(t @ t)

    def trace_identity_residual(self) -> float:
        """max_a |sum_b d_abb|."""
        ia, ib, ic, val = self._coo
        mask = ib == ic
        sums = np.bincount(ia[mask], weights=val[mask], minlength=self.count)
        return float(np.abs(sums).max())

    def contraction_identity_residual(self) -> float:
        """max |sum_bc d_abc d_dbc - (2J-1)(2J+3)/(2J+1) delta_ad|."""
        dd = self.dense()
        two_j = self.dim - 1
        target = (two_j - 1) * (two_j + 3) / (two_j + 1)
        gram = np.einsum("abc,dbc->ad", dd, dd)
        return float(np.abs(gram - target * np.eye(self.count)).max())


def build_generator_basis(spin, max_dim: int = MAX_DIM_DEFAULT) -> GeneratorBasis:
    """Construct the generalized Gell-Mann basis for SU(2J+1).

    Ordering: for k = 2..D, the symmetric then antisymmetric pair (j, k)
    for each j < k, then the rank-(k-1) diagonal generator.  For J = 1/2
    this yields the Pauli matrices (x, y, z); for J = 1 the standard
    Gell-Mann ordering.
    """
    two_j = parse_spin(spin)
    dim = spin_dim(two_j)
    if dim > max_dim:
        raise DimensionGuardError(
            f"D = {dim} exceeds the configured maximum {max_dim}; "
            "pass a larger max_dim to allow it"
        )
    mats = []
    for k in range(1, dim):  # 0-based column index of the pair/diagonal block
        for j in range(k):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[j, k] = 1.0
            sym[k, j] = 1.0
            mats.append(sym)
            asym = np.zeros((dim, dim), dtype=complex)
            asym[j, k] = -1.0j
            asym[k, j] = 1.0j
            mats.append(asym)
        diag = np.zeros((dim, dim), dtype=complex)
        scale = math.sqrt(2.0 / (k * (k + 1)))
        for i in range(k):
            diag[i, i] = scale
        diag[k, k] = -k * scale
        mats.append(diag)
    return GeneratorBasis(dim=dim, matrices=np.array(mats))


def build_d_tensor(basis: GeneratorBasis, drop_below: float = 1e-13) -> SymmetricStructureTensor:
    """Symmetric structure constants d_abc = Tr({g_a, g_b} g_c) / 4.

    Every computed entry must be real to 1e-10 (a larger imaginary part
    signals a broken basis).  Entries below `drop_below` in magnitude are
    treated as exact zeros of the sparse tensor.
    """
    g = basis.matrices
    K = basis.count
    prod = np.einsum("aij,bjk->abik", g, g)
    anti = prod + prod.transpose(1, 0, 2, 3)
    # Tr(X g_c) as a flat inner product over matrix entries
    full = 0.25 * np.einsum("abik,cki->abc", anti, g)
    worst_imag = float(np.abs(full.imag).max())
    if worst_imag > 1e-10:
        raise SpinPovmError(
            f"d-tensor entry with imaginary part {worst_imag:.3e}; basis is broken"
        )
    real = full.real
    entries: dict[tuple[int, int, int], float] = {}
    for a in range(K):
        for b in range(a, K):
            for c in range(b, K):
                v = real[a, b, c]
                if abs(v) > drop_below:
                    entries[(a, b, c)] = float(v)
    return SymmetricStructureTensor(dim=basis.dim, entries=entries)


def anticommutator_residual(basis: GeneratorBasis, d: SymmetricStructureTensor) -> float:
    """max deviation of {g_a, g_b} from (4/D) delta_ab I + 2 d_abc g_c."""
    g = basis.matrices
    K = basis.count
    dim = basis.dim
    prod = np.einsum("aij,bjk->abik", g, g)
    anti = prod + prod.transpose(1, 0, 2, 3)
    recon = np.einsum("abc,cik->abik", d.dense(), g) * 2.0
    eye = np.eye(dim)
    recon += (4.0 / dim) * np.einsum("ab,ik->abik", np.eye(K), eye)
    return float(np.abs(anti - recon).max())
