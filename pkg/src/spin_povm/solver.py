"""Nonlinear least-squares search for measurements with a given element count.

The unknowns are raw complex amplitudes per element (normalized inside the
objective, so the search manifold is exactly the pure states) plus one real
parameter per element mapped through a softplus to keep weights positive.
The residual vector stacks the moment equations of orders 0..min(N, 3), the
completeness error on the N-copy symmetric subspace (or a sampled identity
check when that subspace exceeds the materialization guard), and a gauge
row per element pinning the raw-amplitude norm.  Symmetric entries carry
sqrt-multiplicity factors so the summed-square objective is invariant under
a global unitary applied to all element states.

Infeasibility is always reported as "not found within the restart budget",
never as nonexistence.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .bloch import bloch_scale
from .catalog import conjectured_scaling, min_projector_bound
from .errors import SpinPovmError, UnsupportedCopiesError
from .montecarlo import sample_state_block
from .povm_core import (
    DimensionGuardError,
    Povm,
    _sym_guard,
    basiceq_residual,
    completeness_residual,
    moment_residuals,
    symmetric_occupations,
    _occupation_coefs,
    weight_sum,
)
from .spins import format_spin, parse_spin, spin_dim
from .sun_algebra import build_d_tensor, build_generator_basis


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 100
    max_iterations: int = 600  # objective evaluations per restart
    tolerance: float = 1e-8  # max-norm residual accepted as feasible
    seed: int = 0
    enforce_weight_bounds: bool = False  # apply the proven per-weight caps
    workers: int = 1
    stop_at_first_feasible: bool = True
    probe_states: int = 256  # sampled-identity probes past the guard

    def __post_init__(self):
        if self.restarts < 1:
            raise SpinPovmError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise SpinPovmError("tolerance must be positive")


@dataclass(frozen=True, eq=False)
class SearchResult:
    povm: Povm
    residual: float
    feasible: bool
    restarts_used: int
    restart_residuals: tuple[float, ...]
    metadata: dict = field(default_factory=dict)


def _softplus(t: np.ndarray) -> np.ndarray:
    out = np.where(t > 30.0, t, np.log1p(np.exp(np.minimum(t, 30.0))))
    return out


def _sigmoid(t: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(t, -500.0, 500.0)))


def _inv_softplus(w: float) -> float:
    if w > 30.0:
        return w
    return math.log(math.expm1(w))


class MomentSystem:
    """Residuals and analytic Jacobian of the search objective.

    Parameters per element: D real parts, D imaginary parts, one weight
    parameter; packed row-major over elements.
    """

    def __init__(self, two_j: int, ncopies: int, nelements: int, probe_seed=None, probe_states: int = 256):
        self.two_j = two_j
        self.ncopies = ncopies
        self.nelements = nelements
        self.dim = spin_dim(two_j)
        self.adjoint = self.dim**2 - 1
        basis = build_generator_basis(format_spin(two_j))
        self.generators = basis.matrices
        self.kappa = bloch_scale(two_j)
        self.target = float(weight_sum(ncopies, format_spin(two_j)))
        self.order2_coef = self.target / self.adjoint
        self.orders = min(ncopies, 3)
        if self.orders >= 3:
            d = build_d_tensor(basis)
            coef = self.target * math.sqrt(2.0 * (two_j + 1) / two_j) / (
                self.adjoint * (two_j + 3)
            )
            self.order3_target = coef * d.dense()
        else:
            self.order3_target = None

        dim_sym = weight_sum(ncopies, format_spin(two_j))
        self.use_completeness = (
            isinstance(dim_sym, int) and nelements * dim_sym <= _sym_guard()
        )
        if self.use_completeness:
            self.dim_sym = int(dim_sym)
            self.occupations = np.array(symmetric_occupations(self.dim, ncopies))
            self.occ_coefs = _occupation_coefs(self.dim, ncopies)
            self.probes = None
        else:
            rng = np.random.default_rng(probe_seed)
            self.probes = sample_state_block(two_j, probe_states, rng)

        # index bookkeeping for symmetric blocks
        K = self.adjoint
        self.pair_idx = [(a, b) for a in range(K) for b in range(a, K)]
        self.pair_mult = np.array(
            [1.0 if a == b else math.sqrt(2.0) for a, b in self.pair_idx]
        )
        if self.orders >= 3:
            self.triple_idx = [
                (a, b, c)
                for a in range(K)
                for b in range(a, K)
                for c in range(b, K)
            ]
            self.triple_mult = np.array(
                [math.sqrt(len({*map(tuple, _perms3(t))})) for t in self.triple_idx]
            )

        self.nparams = nelements * (2 * self.dim + 1)

    # -- parameter unpacking -------------------------------------------------

    def _unpack(self, params: np.ndarray):
        X = params.reshape(self.nelements, 2 * self.dim + 1)
        x = X[:, : self.dim]
        y = X[:, self.dim : 2 * self.dim]
        t = X[:, 2 * self.dim]
        z = x + 1j * y
        s = (x * x + y * y).sum(axis=1)
        w = _softplus(t)
        return x, y, t, z, s, w

    def states_and_weights(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        _, _, _, z, s, w = self._unpack(params)
        return z / np.sqrt(s)[:, np.newaxis], w

    # -- residuals -----------------------------------------------------------

    def residuals(self, params: np.ndarray) -> np.ndarray:
        x, y, t, z, s, w = self._unpack(params)
        q = np.einsum("aij,ri,rj->ra", self.generators, z.conj(), z, optimize=True).real
        nb = self.kappa * q / s[:, np.newaxis]

        blocks = [np.array([w.sum() - self.target]), nb.T @ w]
        if self.orders >= 2:
            second = np.einsum("r,ra,rb->ab", w, nb, nb)
            second[np.diag_indices_from(second)] -= self.order2_coef
            pa, pb = zip(*self.pair_idx)
            blocks.append(second[list(pa), list(pb)] * self.pair_mult)
        if self.orders >= 3:
            third = np.einsum("r,ra,rb,rc->abc", w, nb, nb, nb) - self.order3_target
            ta, tb, tc = zip(*self.triple_idx)
            blocks.append(third[list(ta), list(tb), list(tc)] * self.triple_mult)
        if self.use_completeness:
            V = self._embed(z, s)
            gram = V.T @ (w[:, np.newaxis] * V.conj())
            E = gram - np.eye(self.dim_sym)
            iu, ju = np.triu_indices(self.dim_sym, k=1)
            blocks.append(E[np.diag_indices(self.dim_sym)].real)
            blocks.append(math.sqrt(2.0) * E[iu, ju].real)
            blocks.append(math.sqrt(2.0) * E[iu, ju].imag)
        else:
            o = self.probes.conj() @ z.T  # (P, n)
            p = (o.real**2 + o.imag**2) / s[np.newaxis, :]
            blocks.append(p**self.ncopies @ w - 1.0)
        blocks.append(s - 1.0)  # gauge: raw amplitudes stay near unit norm
        return np.concatenate(blocks)

    def _embed(self, z: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Symmetric-subspace overlaps of the normalized states."""
        n = z.shape[0]
        powers = np.ones((n, self.dim, self.ncopies + 1), dtype=complex)
        for p in range(1, self.ncopies + 1):
            powers[:, :, p] = powers[:, :, p - 1] * z
        V = np.empty((n, self.dim_sym), dtype=complex)
        for col, k in enumerate(self.occupations):
            mono = np.ones(n, dtype=complex)
            for i, ki in enumerate(k):
                if ki:
                    mono = mono * powers[:, i, ki]
            V[:, col] = self.occ_coefs[col] * mono
        return V / (s[:, np.newaxis] ** (self.ncopies / 2.0))

    # -- Jacobian ------------------------------------------------------------

    def jacobian(self, params: np.ndarray) -> np.ndarray:
        x, y, t, z, s, w = self._unpack(params)
        n, D, K = self.nelements, self.dim, self.adjoint
        sigma = _sigmoid(t)
        ncols = self.nparams

        G = np.einsum("aij,rj->rai", self.generators, z, optimize=True)  # (n,K,D)
        q = np.einsum("ri,rai->ra", z.conj(), G, optimize=True).real
        nb = self.kappa * q / s[:, np.newaxis]
        inv_s = 1.0 / s
        # dn[r,a,i] w.r.t. x and y parts of element r
        dnx = 2.0 * inv_s[:, None, None] * (
            self.kappa * G.real - nb[:, :, None] * x[:, None, :]
        )
        dny = 2.0 * inv_s[:, None, None] * (
            self.kappa * G.imag - nb[:, :, None] * y[:, None, :]
        )

        def cols(r):
            base = r * (2 * D + 1)
            return base, base + D, base + 2 * D  # x offset, y offset, t column

        rows = []

        # order 0
        row = np.zeros(ncols)
        for r in range(n):
            row[cols(r)[2]] = sigma[r]
        rows.append(row[np.newaxis, :])

        # order 1: K rows
        block = np.zeros((K, ncols))
        for r in range(n):
            cx, cy, ct = cols(r)
            block[:, cx : cx + D] = w[r] * dnx[r]
            block[:, cy : cy + D] = w[r] * dny[r]
            block[:, ct] = sigma[r] * nb[r]
        rows.append(block)

        if self.orders >= 2:
            pa = np.array([p[0] for p in self.pair_idx])
            pb = np.array([p[1] for p in self.pair_idx])
            block = np.zeros((len(self.pair_idx), ncols))
            for r in range(n):
                cx, cy, ct = cols(r)
                contrib_x = nb[r, pb, None] * dnx[r, pa] + nb[r, pa, None] * dnx[r, pb]
                contrib_y = nb[r, pb, None] * dny[r, pa] + nb[r, pa, None] * dny[r, pb]
                block[:, cx : cx + D] = w[r] * contrib_x * self.pair_mult[:, None]
                block[:, cy : cy + D] = w[r] * contrib_y * self.pair_mult[:, None]
                block[:, ct] = sigma[r] * nb[r, pa] * nb[r, pb] * self.pair_mult
            rows.append(block)

        if self.orders >= 3:
            ta = np.array([p[0] for p in self.triple_idx])
            tb = np.array([p[1] for p in self.triple_idx])
            tc = np.array([p[2] for p in self.triple_idx])
            block = np.zeros((len(self.triple_idx), ncols))
            for r in range(n):
                cx, cy, ct = cols(r)
                nab = nb[r, ta] * nb[r, tb]
                nbc = nb[r, tb] * nb[r, tc]
                nac = nb[r, ta] * nb[r, tc]
                contrib_x = (
                    nbc[:, None] * dnx[r, ta]
                    + nac[:, None] * dnx[r, tb]
                    + nab[:, None] * dnx[r, tc]
                )
                contrib_y = (
                    nbc[:, None] * dny[r, ta]
                    + nac[:, None] * dny[r, tb]
                    + nab[:, None] * dny[r, tc]
                )
                block[:, cx : cx + D] = w[r] * contrib_x * self.triple_mult[:, None]
                block[:, cy : cy + D] = w[r] * contrib_y * self.triple_mult[:, None]
                block[:, ct] = sigma[r] * nab * nb[r, tc] * self.triple_mult
            rows.append(block)

        if self.use_completeness:
            rows.extend(self._completeness_jacobian(z, s, w, sigma, cols))
        else:
            rows.append(self._probe_jacobian(z, s, w, sigma, cols))

        # gauge rows d(s_r - 1)
        block = np.zeros((n, ncols))
        for r in range(n):
            cx, cy, _ = cols(r)
            block[r, cx : cx + D] = 2.0 * x[r]
            block[r, cy : cy + D] = 2.0 * y[r]
        rows.append(block)

        return np.vstack(rows)

    def _completeness_jacobian(self, z, s, w, sigma, cols):
        n, D, S = self.nelements, self.dim, self.dim_sym
        N = self.ncopies
        powers = np.ones((n, D, N + 1), dtype=complex)
        for p in range(1, N + 1):
            powers[:, :, p] = powers[:, :, p - 1] * z
        P = np.empty((n, S), dtype=complex)
        dP = np.zeros((n, S, D), dtype=complex)  # holomorphic monomial derivative
        for col, k in enumerate(self.occupations):
            mono = np.ones(n, dtype=complex)
            for i, ki in enumerate(k):
                if ki:
                    mono = mono * powers[:, i, ki]
            P[:, col] = mono
            for i, ki in enumerate(k):
                if ki == 0:
                    continue
                part = np.full(n, ki, dtype=complex) * powers[:, i, ki - 1]
                for jdim, kj in enumerate(k):
                    if jdim != i and kj:
                        part = part * powers[:, jdim, kj]
                dP[:, col, i] = part
        s_pow = s ** (N / 2.0)
        V = self.occ_coefs[np.newaxis, :] * P / s_pow[:, np.newaxis]
        x = z.real
        y = z.imag
        base = self.occ_coefs[np.newaxis, :, np.newaxis] * dP / s_pow[:, np.newaxis, np.newaxis]
        ratio = N * V[:, :, np.newaxis] / s[:, np.newaxis, np.newaxis]
        dVx = base - ratio * x[:, np.newaxis, :]
        dVy = 1j * base - ratio * y[:, np.newaxis, :]

        iu, ju = np.triu_indices(S, k=1)
        kk = np.arange(S)
        blocks = [np.zeros((S, self.nparams)), np.zeros((iu.size, self.nparams)), np.zeros((iu.size, self.nparams))]
        for r in range(n):
            cx, cy, ct = cols(r)
            # dM[k,l] for this element: w_r (dV[k] conj(V[l]) + V[k] conj(dV[l]))
            for dV, coff in ((dVx[r], cx), (dVy[r], cy)):
                dm = w[r] * (
                    dV[:, np.newaxis, :] * V[r].conj()[np.newaxis, :, np.newaxis]
                    + V[r][:, np.newaxis, np.newaxis] * dV.conj()[np.newaxis, :, :]
                )
                blocks[0][:, coff : coff + D] = dm[kk, kk].real
                blocks[1][:, coff : coff + D] = math.sqrt(2.0) * dm[iu, ju].real
                blocks[2][:, coff : coff + D] = math.sqrt(2.0) * dm[iu, ju].imag
            mt = sigma[r] * V[r][:, np.newaxis] * V[r].conj()[np.newaxis, :]
            blocks[0][:, ct] = mt[kk, kk].real
            blocks[1][:, ct] = math.sqrt(2.0) * mt[iu, ju].real
            blocks[2][:, ct] = math.sqrt(2.0) * mt[iu, ju].imag
        return blocks

    def _probe_jacobian(self, z, s, w, sigma, cols):
        probes = self.probes
        N = self.ncopies
        o = probes.conj() @ z.T  # (P, n)
        p = (o.real**2 + o.imag**2) / s[np.newaxis, :]
        pn1 = p ** (N - 1) if N > 1 else np.ones_like(p)
        block = np.zeros((probes.shape[0], self.nparams))
        x = z.real
        y = z.imag
        for r in range(self.nelements):
            cx, cy, ct = cols(r)
            # dp/dx_i = (2 Re(conj(o) conj(probe_i)) - 2 p x_i)/s, same with Im for y
            co = o[:, r].conj()[:, np.newaxis]
            dpx = (2.0 * (co * probes.conj()).real - 2.0 * p[:, r][:, np.newaxis] * x[r]) / s[r]
            dpy = (2.0 * (co * (1j * probes.conj())).real - 2.0 * p[:, r][:, np.newaxis] * y[r]) / s[r]
            factor = w[r] * N * pn1[:, r][:, np.newaxis]
            block[:, cx : cx + self.dim] = factor * dpx
            block[:, cy : cy + self.dim] = factor * dpy
            block[:, ct] = sigma[r] * p[:, r] ** N
        return block


def _perms3(t):
    a, b, c = t
    return [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]


def _initial_point(system: MomentSystem, rng: np.random.Generator) -> np.ndarray:
    n, D = system.nelements, system.dim
    X = np.empty((n, 2 * D + 1))
    amps = rng.standard_normal((n, 2 * D))
    amps /= np.linalg.norm(amps, axis=1)[:, np.newaxis]
    X[:, : 2 * D] = amps
    t0 = _inv_softplus(system.target / n)
    X[:, 2 * D] = t0 + 0.25 * rng.standard_normal(n)
    return X.ravel()


def _single_restart(system: MomentSystem, seq, config: SearchConfig):
    rng = np.random.default_rng(seq)
    x0 = _initial_point(system, rng)
    bounds = (-np.inf, np.inf)
    if config.enforce_weight_bounds and system.ncopies <= 3:
        cap = float(
            min_projector_bound(system.ncopies, format_spin(system.two_j)).weight_upper_bound
        )
        ub = np.full(system.nparams, np.inf)
        ub[2 * system.dim :: 2 * system.dim + 1] = _inv_softplus(cap)
        bounds = (np.full(system.nparams, -np.inf), ub)
        x0 = np.minimum(x0, ub - 1e-3)
    fit = least_squares(
        system.residuals,
        x0,
        jac=system.jacobian,
        method="trf",
        ftol=1e-14,
        xtol=1e-14,
        gtol=1e-14,
        max_nfev=config.max_iterations,
        bounds=bounds,
    )
    residual = float(np.abs(system.residuals(fit.x)).max())
    return residual, fit.x


def search_povm(spin, ncopies: int, nelements: int, config: SearchConfig | None = None) -> SearchResult:
    """Randomly restarted least-squares feasibility search.

    Deterministic given config.seed; restarts draw from spawned substreams
    and ties are broken by the lowest restart index.  A result is marked
    feasible only if the independently computed moment and completeness
    residuals also pass at 10x the search tolerance.
    """
    two_j = parse_spin(spin)
    if ncopies < 1:
        raise SpinPovmError("copy count must be >= 1")
    if nelements < 1:
        raise SpinPovmError("element count must be >= 1")
    config = config or SearchConfig()
    root = np.random.SeedSequence(config.seed)
    children = root.spawn(config.restarts + 1)
    system = MomentSystem(
        two_j,
        ncopies,
        nelements,
        probe_seed=children[config.restarts],
        probe_states=config.probe_states,
    )

    best_res = math.inf
    best_x = None
    trace: list[float] = []
    used = 0
    workers = max(1, config.workers)
    idx = 0
    while idx < config.restarts:
        chunk = list(range(idx, min(idx + workers, config.restarts)))
        if workers == 1:
            outcomes = [_single_restart(system, children[i], config) for i in chunk]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                futures = [
                    pool.submit(_single_restart, system, children[i], config)
                    for i in chunk
                ]
                outcomes = [f.result() for f in futures]
        for residual, xvec in outcomes:  # merged in restart order
            trace.append(residual)
            used += 1
            if residual < best_res:
                best_res = residual
                best_x = xvec
        idx = chunk[-1] + 1
        if config.stop_at_first_feasible and best_res < config.tolerance:
            break

    states, weights = system.states_and_weights(best_x)
    povm = Povm(two_j=two_j, ncopies=ncopies, weights=weights, states=states)
    feasible = best_res < config.tolerance
    verification = None
    if feasible:
        verification = _independent_check(povm, config)
        feasible = verification <= 10.0 * config.tolerance
    return SearchResult(
        povm=povm,
        residual=best_res,
        feasible=feasible,
        restarts_used=used,
        restart_residuals=tuple(trace),
        metadata={
            "method": "trf",
            "gradient": "analytic",
            "objective": "moments+completeness"
            if system.use_completeness
            else "moments+sampled-identity",
            "independent_check_residual": verification,
        },
    )


def _independent_check(povm: Povm, config: SearchConfig) -> float:
    basis = build_generator_basis(format_spin(povm.two_j))
    d = build_d_tensor(basis)
    report = moment_residuals(povm, basis, d)
    worst = report.max_defined()
    try:
        worst = max(worst, completeness_residual(povm))
    except DimensionGuardError:
        worst = max(worst, basiceq_residual(povm, samples=2000, seed=config.seed))
    return worst


def scan_min_n(spin, ncopies: int, n_values, config: SearchConfig | None = None) -> dict:
    """Run search_povm over a range of element counts.

    Entries that never reach the tolerance are labelled "not found" -- a
    statement about the restart budget, not a nonexistence proof.
    """
    two_j = parse_spin(spin)
    config = config or SearchConfig()
    n_values = sorted(set(int(v) for v in n_values))
    rows = []
    for n in n_values:
        result = search_povm(format_spin(two_j), ncopies, n, config)
        rows.append(
            {
                "n": n,
                "best_residual": result.residual,
                "feasible": result.feasible,
                "status": "feasible" if result.feasible else "not found",
                "restarts_used": result.restarts_used,
            }
        )
    feasible_ns = [row["n"] for row in rows if row["feasible"]]
    try:
        bound = min_projector_bound(ncopies, format_spin(two_j)).n_lower_bound
    except UnsupportedCopiesError:
        bound = None
    return {
        "J": format_spin(two_j),
        "N": ncopies,
        "rows": rows,
        "smallest_feasible_n": min(feasible_ns) if feasible_ns else None,
        "analytic_lower_bound": bound,
        "conjectured_scaling": conjectured_scaling(ncopies, format_spin(two_j)),
    }
