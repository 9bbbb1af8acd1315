"""POVM data model and the optimality conditions it must satisfy.

A candidate measurement on N copies is a weighted family of pure states
{(c_r^2, psi_r)} resolving the identity on the N-copy symmetric subspace.
Optimality is checked two independent ways: the moment equations of the
element Bloch vectors (orders 0..min(N, 3) below) and the completeness of
sum_r c_r^2 |psi_r><psi_r|^(x N) on the symmetric subspace.  Moment orders
stop at the cubic row because the right-hand tensor structure beyond it is
not part of the supported system; for N >= 4 completeness (or its sampled
equivalent) is the verification route.

Residuals are max-norms throughout so tolerances are dimension independent.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bloch import Spinor, bloch_components
from .errors import (
    DimensionGuardError,
    PovmFormatError,
    PovmValidationError,
    SpinPovmError,
)
from .spins import format_spin, parse_spin, spin_dim
from .sun_algebra import GeneratorBasis, SymmetricStructureTensor

# n_elements * sym_subspace_dim above which completeness matrices are not
# materialized; overridable via the SPIN_POVM_MAX_DIM environment variable
SYM_GUARD_DEFAULT = 10_000

# exact integer combinatorics up to 2^53; log-gamma floats beyond
_EXACT_COMB_LIMIT = 2**53


def _sym_guard() -> int:
    raw = os.environ.get("SPIN_POVM_MAX_DIM", "")
    return int(raw) if raw.strip() else SYM_GUARD_DEFAULT


@dataclass(frozen=True, eq=False)
class Povm:
    """Weighted pure-state measurement family on N copies of a spin-J system."""

    two_j: int
    ncopies: int
    weights: np.ndarray  # (n,) positive
    states: np.ndarray  # (n, 2J+1) normalized complex rows

    def __post_init__(self):
        # copy so freezing the buffers never flips a caller's array read-only
        w = np.array(self.weights, dtype=float)
        s = np.array(self.states, dtype=complex)
        if self.ncopies < 1:
            raise SpinPovmError("copy count must be >= 1")
        if w.ndim != 1 or w.size == 0:
            raise PovmValidationError("POVM needs at least one element")
        if s.shape != (w.size, spin_dim(self.two_j)):
            raise PovmValidationError(
                f"state array shape {s.shape} does not match "
                f"{w.size} elements of dimension {spin_dim(self.two_j)}"
            )
        if not np.all(w > 0):
            raise PovmValidationError("all weights must be strictly positive")
        norms = (s.real**2 + s.imag**2).sum(axis=1)
        worst = float(np.abs(norms - 1.0).max())
        if worst > 1e-8:
            raise PovmValidationError(f"element state norm deviates from 1 by {worst:.3e}")
        w.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "states", s)

    @property
    def n_elements(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return spin_dim(self.two_j)

    @property
    def elements(self) -> list[tuple[float, Spinor]]:
        return [
            (float(w), Spinor(self.two_j, s)) for w, s in zip(self.weights, self.states)
        ]


@dataclass(frozen=True)
class MomentReport:
    """Max-norm residuals of the optimality conditions.

    order-k is None when k > min(N, 3); completeness is None when the
    symmetric subspace exceeded the materialization guard.
    """

    order0_residual: float
    order1_residual: float
    order2_residual: float | None
    order3_residual: float | None
    completeness_residual: float | None = None
    basiceq_residual: float | None = None

    def as_dict(self) -> dict:
        return {
            "order0_residual": self.order0_residual,
            "order1_residual": self.order1_residual,
            "order2_residual": self.order2_residual,
            "order3_residual": self.order3_residual,
            "completeness_residual": self.completeness_residual,
            "basiceq_residual": self.basiceq_residual,
        }

    def max_defined(self) -> float:
        vals = [v for v in self.as_dict().values() if v is not None]
        return max(vals)


def weight_sum(ncopies: int, spin) -> int | float:
    """Total weight (2J+N)!/(N!(2J)!) = dim of the N-copy symmetric subspace."""
    two_j = parse_spin(spin)
    if ncopies < 1:
        raise SpinPovmError("copy count must be >= 1")
    return _binomial(two_j + ncopies, ncopies)


def analytic_fidelity(ncopies: int, spin) -> float:
    """Optimal average fidelity (N+1)/(N+2J+1)."""
    two_j = parse_spin(spin)
    if ncopies < 1:
        raise SpinPovmError("copy count must be >= 1")
    return (ncopies + 1) / (ncopies + two_j + 1)


def equation_count(ncopies: int, spin) -> int | float:
    """Number of independent scalar equations in the order-0..N system.

    Equals C(4J(J+1) + N, N): one equation per totally symmetric index
    multiset over the adjoint dimension, including the scalar row.
    """
    two_j = parse_spin(spin)
    if ncopies < 1:
        raise SpinPovmError("copy count must be >= 1")
    adjoint = spin_dim(two_j) ** 2 - 1
    return _binomial(adjoint + ncopies, ncopies)


def _binomial(n: int, k: int) -> int | float:
    value = math.comb(n, k)
    if value <= _EXACT_COMB_LIMIT:
        return value
    # too big for exact float conversion in callers; return a float via lgamma
    return math.exp(math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1))


def moment_residuals(
    povm: Povm, basis: GeneratorBasis, d: SymmetricStructureTensor
) -> MomentReport:
    """Residuals of the moment equations at orders 0..min(N, 3).

    order-0:  |sum_r w_r - W|                      with W = weight_sum(N, J)
    order-1:  max_a |sum_r w_r n_a(r)|
    order-2:  max_ab |sum_r w_r n_a n_b - W delta_ab / (4J(J+1))|
    order-3:  max_abc |sum_r w_r n_a n_b n_c
                        - W sqrt((2J+1)/J) d_abc / (4J(J+1)(2J+3))|
    """
    if basis.dim != povm.dim:
        raise SpinPovmError(f"basis dim {basis.dim} does not match POVM dim {povm.dim}")
    if d.dim != povm.dim:
        raise SpinPovmError(f"tensor dim {d.dim} does not match POVM dim {povm.dim}")
    two_j = povm.two_j
    w = povm.weights
    nb = bloch_components(povm.states, basis)
    target = float(weight_sum(povm.ncopies, format_spin(two_j)))
    adjoint = spin_dim(two_j) ** 2 - 1  # = 4J(J+1)

    order0 = abs(float(w.sum()) - target)
    order1 = float(np.abs(nb.T @ w).max())
    order2 = None
    order3 = None
    if povm.ncopies >= 2:
        second = np.einsum("r,ra,rb->ab", w, nb, nb)
        order2 = float(np.abs(second - (target / adjoint) * np.eye(adjoint)).max())
    if povm.ncopies >= 3:
        third = np.einsum("r,ra,rb,rc->abc", w, nb, nb, nb)
        coef = target * math.sqrt(2.0 * (two_j + 1) / two_j) / (adjoint * (two_j + 3))
        order3 = float(np.abs(third - coef * d.dense()).max())
    return MomentReport(
        order0_residual=order0,
        order1_residual=order1,
        order2_residual=order2,
        order3_residual=order3,
    )


@lru_cache(maxsize=64)
def symmetric_occupations(dim: int, ncopies: int) -> tuple[tuple[int, ...], ...]:
    """Occupation vectors (k_1..k_D) with sum N, in lexicographic order."""

    def rec(remaining: int, slots: int):
        if slots == 1:
            yield (remaining,)
            return
        for k in range(remaining + 1):
            for rest in rec(remaining - k, slots - 1):
                yield (k,) + rest

    return tuple(sorted(rec(ncopies, dim)))


@lru_cache(maxsize=64)
def _occupation_coefs(dim: int, ncopies: int) -> np.ndarray:
    """sqrt multinomial normalizations matching symmetric_occupations order."""
    occ = symmetric_occupations(dim, ncopies)
    coefs = np.empty(len(occ))
    for idx, k in enumerate(occ):
        m = math.factorial(ncopies)
        for ki in k:
            m //= math.factorial(ki)
        coefs[idx] = math.sqrt(m)
    return coefs


def symmetric_embedding(states: np.ndarray, ncopies: int) -> np.ndarray:
    """(n, dim_sym) overlaps <sym_k|psi^(x N)> = sqrt(N!/prod k_i!) prod psi_i^k_i."""
    states = np.asarray(states, dtype=complex)
    n, dim = states.shape
    occ = symmetric_occupations(dim, ncopies)
    coefs = _occupation_coefs(dim, ncopies)
    powers = np.ones((n, dim, ncopies + 1), dtype=complex)
    for p in range(1, ncopies + 1):
        powers[:, :, p] = powers[:, :, p - 1] * states
    V = np.empty((n, len(occ)), dtype=complex)
    for col, k in enumerate(occ):
        mono = np.ones(n, dtype=complex)
        for i, ki in enumerate(k):
            if ki:
                mono = mono * powers[:, i, ki]
        V[:, col] = coefs[col] * mono
    return V


def completeness_residual(povm: Povm) -> float:
    """max |M - I| with M the POVM Gram on the N-copy symmetric subspace.

    Zero iff the weighted projectors resolve the identity there (the
    orthogonal complement is handled by the complementary projector and
    never constrains the elements, which live inside the subspace).
    """
    dim_sym = weight_sum(povm.ncopies, format_spin(povm.two_j))
    guard = _sym_guard()
    if not isinstance(dim_sym, int) or povm.n_elements * dim_sym > guard:
        raise DimensionGuardError(
            f"n * sym-subspace dim = {povm.n_elements} * {dim_sym} exceeds the "
            f"guard {guard}; raise SPIN_POVM_MAX_DIM or use basiceq_residual"
        )
    V = symmetric_embedding(povm.states, povm.ncopies)
    gram = V.T @ (povm.weights[:, np.newaxis] * V.conj())
    return float(np.abs(gram - np.eye(dim_sym)).max())


def basiceq_residual(povm: Povm, samples: int, seed) -> float:
    """Sampled resolution-of-identity check.

    Draws uniform random pure states psi and returns the max over samples of
    |sum_r w_r |<psi|psi_r>|^(2N) - 1|.  Statistically equivalent to
    completeness_residual and usable when the symmetric subspace is too
    large to materialize.
    """
    if samples < 1:
        raise SpinPovmError("samples must be >= 1")
    from . import montecarlo  # deferred: montecarlo depends on this module

    from .kernels import povm_moments_block

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    worst = 0.0
    for count in _blocks(samples, 65536):
        block = montecarlo.sample_state_block(povm.two_j, count, rng)
        _, unity = povm_moments_block(block, povm.states, povm.weights, povm.ncopies)
        worst = max(worst, float(np.abs(unity - 1.0).max()))
    return worst


def _blocks(total: int, block: int):
    remaining = total
    while remaining > 0:
        take = min(block, remaining)
        yield take
        remaining -= take


def verify_povm(
    povm: Povm,
    basis: GeneratorBasis,
    d: SymmetricStructureTensor,
    samples: int = 1000,
    seed=0,
) -> MomentReport:
    """Full report: moment residuals plus completeness and sampled checks."""
    report = moment_residuals(povm, basis, d)
    try:
        comp = completeness_residual(povm)
    except DimensionGuardError:
        comp = None
    basiceq = basiceq_residual(povm, samples, seed)
    return MomentReport(
        order0_residual=report.order0_residual,
        order1_residual=report.order1_residual,
        order2_residual=report.order2_residual,
        order3_residual=report.order3_residual,
        completeness_residual=comp,
        basiceq_residual=basiceq,
    )


# ---------------------------------------------------------------------------
# POVM file format
#
# {"J": "1", "N": 2, "elements": [{"weight": w, "re": [...], "im": [...]}]}
#
# Floats are written with 17 significant digits so emit -> parse -> emit is
# byte stable.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    x = float(x)
    if x == 0.0:
        x = 0.0  # canonicalize -0.0, whose sign JSON integers cannot carry
    return format(x, ".17g")


def povm_to_json(povm: Povm) -> str:
    lines = ["{", f'  "J": "{format_spin(povm.two_j)}",', f'  "N": {povm.ncopies},']
    lines.append('  "elements": [')
    for idx in range(povm.n_elements):
        re_part = ", ".join(_fmt(v) for v in povm.states[idx].real)
        im_part = ", ".join(_fmt(v) for v in povm.states[idx].imag)
        comma = "," if idx < povm.n_elements - 1 else ""
        lines.append(
            f'    {{"weight": {_fmt(povm.weights[idx])}, '
            f'"re": [{re_part}], "im": [{im_part}]}}{comma}'
        )
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def povm_from_json(text: str) -> Povm:
    import json

    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PovmFormatError(f"not valid JSON: {exc}") from None
    try:
        two_j = parse_spin(payload["J"])
        ncopies = int(payload["N"])
        elements = payload["elements"]
        weights = np.array([float(e["weight"]) for e in elements])
        states = np.array(
            [np.asarray(e["re"], dtype=float) + 1j * np.asarray(e["im"], dtype=float) for e in elements]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise PovmFormatError(f"malformed POVM payload: {exc}") from None
    return Povm(two_j=two_j, ncopies=ncopies, weights=weights, states=states)


def save_povm(povm: Povm, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(povm_to_json(povm))


def load_povm(path) -> Povm:
    with open(path, "r", encoding="utf-8") as fh:
        return povm_from_json(fh.read())
