"""Known optimal measurements and the analytic minimality bounds.

Catalog states are stored as exact literals (halves and square roots) so
that component comparisons hold to machine precision.  The 9-element
two-copy spin-1 solution is also carried in its traditional tabulated
Bloch form; that table is written in a different (equally valid)
orthonormal generator frame, and `hypertetrahedron_frame_map` gives the
signed coordinate permutation connecting it to this library's Gell-Mann
frame.  The identity map cannot work: the first table row has vanishing
cubic invariant d_abc n_a n_b n_c, while every pure-state Bloch vector in
the Gell-Mann frame has cubic invariant 1/sqrt(3) at spin 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import SpinPovmError, UnsupportedCopiesError
from .povm_core import Povm, weight_sum
from .spins import format_spin, parse_spin, spin_dim

_S2 = math.sqrt(2.0)
_S3 = math.sqrt(3.0)
_S6 = math.sqrt(6.0)


def von_neumann_povm(spin) -> Povm:
    """Single-copy projective measurement onto the computational basis.

    Minimal and optimal for N = 1: n = 2J+1 elements, unit weights, and
    pairwise Bloch dot products -1/(2J).
    """
    two_j = parse_spin(spin)
    dim = spin_dim(two_j)
    return Povm(
        two_j=two_j,
        ncopies=1,
        weights=np.ones(dim),
        states=np.eye(dim, dtype=complex),
    )


def tetrahedron_j12_n2() -> Povm:
    """Two-copy spin-1/2 solution: 4 states at tetrahedron vertices.

    Weights 3/4 saturate the two-copy weight bound (J+1)/(2J+1); Bloch
    vectors have constant pairwise dot -1/3.
    """
    a = 1.0 / _S3
    b = math.sqrt(2.0 / 3.0)
    omega = complex(-0.5, 0.5 * _S3)  # exp(2 pi i / 3)
    states = np.array(
        [
            [1.0, 0.0],
            [a, b],
            [a, b * omega],
            [a, b * omega**2],
        ],
        dtype=complex,
    )
    return Povm(two_j=1, ncopies=2, weights=np.full(4, 0.75), states=states)


def hypertetrahedron_j1_n2() -> Povm:
    """Two-copy spin-1 solution: 9 states, all pairwise overlap moduli 1/2.

    Weights 2/3 follow from the total weight 6 over 9 elements and the
    saturated weight bound (J+1)/(2J+1); the order-0..2 moment system with
    these states fixed pins them uniquely (checked in the test suite by
    linear least squares).  Bloch vectors form a hypertetrahedron in the
    8-dimensional adjoint space: constant pairwise dot -1/8.
    """
    h = 0.5
    c = 1.0 / (2.0 * _S2)
    d = _S3 / (2.0 * _S2)
    states = np.array(
        [
            [1.0, 0.0, 0.0],
            [h, _S3 / 2.0, 0.0],
            [h, -_S3 / 2.0, 0.0],
            [h, 0.5j, 1.0 / _S2],
            [h, 0.5j, complex(-c, d)],
            [h, 0.5j, complex(-c, -d)],
            [h, -0.5j, 1.0 / _S2],
            [h, -0.5j, complex(-c, d)],
            [h, -0.5j, complex(-c, -d)],
        ],
        dtype=complex,
    )
    return Povm(two_j=2, ncopies=2, weights=np.full(9, 2.0 / 3.0), states=states)


def hypertetrahedron_bloch_table() -> np.ndarray:
    """The 9 Bloch rows of the two-copy spin-1 solution as traditionally
    tabulated, in the alternative generator frame (see module docstring)."""
    q = 3.0 * _S2 / 8.0
    e = _S6 / 8.0
    return np.array(
        [
            [0.5, _S3 / 2, 0, 0, 0, 0, 0, 0],
            [0.5, -_S3 / 4, 0.75, 0, 0, 0, 0, 0],
            [0.5, -_S3 / 4, -0.75, 0, 0, 0, 0, 0],
            [-0.25, 0, 0, 0, _S6 / 4, _S3 / 4, -_S6 / 4, 0],
            [-0.25, 0, 0, q, -e, _S3 / 4, e, -q],
            [-0.25, 0, 0, -q, -e, _S3 / 4, e, q],
            [-0.25, 0, 0, 0, _S6 / 4, -_S3 / 4, _S6 / 4, 0],
            [-0.25, 0, 0, -q, -e, -_S3 / 4, -e, -q],
            [-0.25, 0, 0, q, -e, -_S3 / 4, -e, q],
        ]
    )


# table_row[j] = FRAME_SIGNS[j] * gell_mann_bloch[FRAME_PERM[j]]
HYPERTETRAHEDRON_FRAME_PERM = (7, 2, 0, 5, 3, 1, 6, 4)
HYPERTETRAHEDRON_FRAME_SIGNS = (1, 1, 1, 1, 1, 1, 1, -1)


def hypertetrahedron_frame_map(bloch_rows: np.ndarray) -> np.ndarray:
    """Re-express Gell-Mann-frame Bloch rows in the tabulated frame."""
    perm = list(HYPERTETRAHEDRON_FRAME_PERM)
    signs = np.array(HYPERTETRAHEDRON_FRAME_SIGNS, dtype=float)
    return bloch_rows[..., perm] * signs


@dataclass(frozen=True)
class BoundReport:
    """Minimality bound for n elements plus the weight cap, when known.

    saturable is "yes", "no-by-parity", or "unknown"; the parity fractions
    are populated only for N = 3 where the counting argument applies.
    """

    two_j: int
    ncopies: int
    n_lower_bound: int
    weight_upper_bound: Fraction
    saturable: str
    parity_p: Fraction | None = None
    parity_q: Fraction | None = None

    def as_dict(self) -> dict:
        return {
            "J": format_spin(self.two_j),
            "N": self.ncopies,
            "n_lower_bound": self.n_lower_bound,
            "weight_upper_bound": float(self.weight_upper_bound),
            "weight_upper_bound_exact": str(self.weight_upper_bound),
            "saturable": self.saturable,
            "parity_p": None if self.parity_p is None else str(self.parity_p),
            "parity_q": None if self.parity_q is None else str(self.parity_q),
        }


def n3_parity_obstruction(spin) -> tuple[Fraction, Fraction, bool]:
    """Counting fractions (p, q) of the three-copy saturation argument.

    If the three-copy bound were saturated, each element would pair with p
    others at Bloch dot -1/(2J) and q others at (2J-1)/(2J(2J+3)), with
    p = J(2J+1)^2/2 and q = J(2J+3)^2/2.  Both must be integers for a
    solution to exist; odd integer spins fail.
    """
    two_j = parse_spin(spin)
    p = Fraction(two_j * (two_j + 1) ** 2, 4)
    q = Fraction(two_j * (two_j + 3) ** 2, 4)
    # each element pairs with all n-1 others
    total = (two_j + 2) * (two_j + 1) ** 2 // 2 - 1
    assert p + q == total
    return p, q, p.denominator == 1 and q.denominator == 1


# minimal element counts for spin 1/2 known from explicit constructions
SPIN_HALF_KNOWN_MIN = {1: 2, 2: 4, 3: 6, 4: 10, 5: 12}


def min_projector_bound(ncopies: int, spin) -> BoundReport:
    """Lower bound on the element count and upper bound on single weights.

    Supported for N in 1..3 (the orders with a proven bound); N = 1 gives
    n >= 2J+1, N = 2 gives n >= (2J+1)^2, N = 3 gives n >= (J+1)(2J+1)^2.
    """
    two_j = parse_spin(spin)
    if ncopies not in (1, 2, 3):
        raise UnsupportedCopiesError(
            f"no proven bound for N = {ncopies}; only the scaling conjecture "
            f"J^N = {conjectured_scaling(ncopies, spin)} is available"
        )
    dim = spin_dim(two_j)
    if ncopies == 1:
        return BoundReport(
            two_j=two_j,
            ncopies=1,
            n_lower_bound=dim,
            weight_upper_bound=Fraction(1),
            saturable="yes",
        )
    if ncopies == 2:
        return BoundReport(
            two_j=two_j,
            ncopies=2,
            n_lower_bound=dim**2,
            weight_upper_bound=Fraction(two_j + 2, 2 * (two_j + 1)),
            # explicit solutions exist through spin 1; beyond that the
            # realizability of the Bloch hypertetrahedron by states is open
            saturable="yes" if two_j <= 2 else "unknown",
        )
    p, q, parity_ok = n3_parity_obstruction(spin)
    if not parity_ok:
        saturable = "no-by-parity"
    elif two_j == 1:
        saturable = "yes"  # six elements are known to suffice for spin 1/2
    else:
        saturable = "unknown"
    return BoundReport(
        two_j=two_j,
        ncopies=3,
        n_lower_bound=(two_j + 2) * (two_j + 1) ** 2 // 2,
        weight_upper_bound=Fraction(two_j + 3, 3 * (two_j + 1)),
        saturable=saturable,
        parity_p=p,
        parity_q=q,
    )


def conjectured_scaling(ncopies: int, spin) -> float:
    """The observed J^N growth of minimal element counts.

    A conjecture extrapolated from N = 1..3; informational only, never a
    bound.
    """
    two_j = parse_spin(spin)
    return float((two_j / 2.0) ** ncopies)


def bound_consistency_gap(report: BoundReport) -> float:
    """n_lower_bound - total_weight / weight_cap; >= 0 when consistent."""
    total = weight_sum(report.ncopies, format_spin(report.two_j))
    return report.n_lower_bound - float(total) / float(report.weight_upper_bound)


# named catalog for the CLI
_CATALOG_BUILDERS = {
    "von-neumann-j12-n1": (lambda: von_neumann_povm("1/2"), "N=1 qubit basis measurement"),
    "von-neumann-j1-n1": (lambda: von_neumann_povm("1"), "N=1 spin-1 basis measurement"),
    "von-neumann-j32-n1": (lambda: von_neumann_povm("3/2"), "N=1 spin-3/2 basis measurement"),
    "von-neumann-j2-n1": (lambda: von_neumann_povm("2"), "N=1 spin-2 basis measurement"),
    "tetrahedron-j12-n2": (tetrahedron_j12_n2, "N=2 spin-1/2 tetrahedron (4 elements)"),
    "hypertetrahedron-j1-n2": (hypertetrahedron_j1_n2, "N=2 spin-1 hypertetrahedron (9 elements)"),
}


def catalog_names() -> list[str]:
    return sorted(_CATALOG_BUILDERS)


def catalog_entries() -> list[dict]:
    out = []
    for name in catalog_names():
        builder, description = _CATALOG_BUILDERS[name]
        povm = builder()
        out.append(
            {
                "name": name,
                "description": description,
                "J": format_spin(povm.two_j),
                "N": povm.ncopies,
                "elements": povm.n_elements,
            }
        )
    return out


def catalog_povm(name: str) -> Povm:
    try:
        builder, _ = _CATALOG_BUILDERS[name]
    except KeyError:
        raise SpinPovmError(
            f"unknown catalog entry {name!r}; available: {', '.join(catalog_names())}",
            code="unknown_catalog_name",
        ) from None
    return builder()
