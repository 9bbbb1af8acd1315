"""Uniform pure-state sampling, measure checks, and fidelity estimation.

Sampling draws 2D independent standard normals per state and normalizes;
the induced distribution is exactly the unitarily invariant measure whose
polar form (an angle phi against the first axis times a round sphere) is
retained only for the quadrature cross-check in volume_check.

All estimators are deterministic given (seed, workers): each worker owns a
SeedSequence-spawned substream and partial sums are merged in worker order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bloch import Spinor
from .errors import PovmValidationError, SpinPovmError
from .povm_core import (
    DimensionGuardError,
    Povm,
    analytic_fidelity,
    basiceq_residual,
    completeness_residual,
)
from .spins import parse_spin, spin_dim

RNG_ALGORITHM = "numpy PCG64 via SeedSequence"

_BLOCK = 65536
_VALIDITY_TOL = 1e-8


@dataclass(frozen=True)
class FidelityEstimate:
    """Monte Carlo mean with standard error and the closed-form target."""

    mean: float
    stderr: float
    samples: int
    analytic: float

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stderr": self.stderr,
            "samples": self.samples,
            "analytic": self.analytic,
        }


def sample_state_block(two_j: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """(count, D) amplitudes uniform under the invariant measure."""
    dim = spin_dim(two_j)
    raw = rng.standard_normal((count, 2 * dim))
    z = raw[:, :dim] + 1j * raw[:, dim:]
    norms = np.sqrt((z.real**2 + z.imag**2).sum(axis=1))
    return z / norms[:, np.newaxis]


def sample_pure_state(spin, rng: np.random.Generator) -> Spinor:
    """One uniformly random spin-J pure state."""
    two_j = parse_spin(spin)
    return Spinor(two_j, sample_state_block(two_j, 1, rng)[0])


def volume_check(dim: int, points: int = 200) -> tuple[float, float]:
    """Quadrature of the polar volume element against 4 pi^(D-1)/(D-1)!.

    The element is 4 sin^(2D-3)(phi) cos(phi) dphi times the area of the
    unit (2D-3)-sphere, integrated over phi in [0, pi/2].
    """
    if not 2 <= dim <= 6:
        raise SpinPovmError("volume check supports dimensions 2..6")
    nodes, weights = np.polynomial.legendre.leggauss(points)
    # map from [-1, 1] to [0, pi/2]
    phi = 0.25 * math.pi * (nodes + 1.0)
    jac = 0.25 * math.pi
    sphere_area = 2.0 * math.pi ** (dim - 1) / math.gamma(dim - 1)
    integrand = 4.0 * np.sin(phi) ** (2 * dim - 3) * np.cos(phi)
    numeric = float(sphere_area * jac * (weights @ integrand))
    analytic = 4.0 * math.pi ** (dim - 1) / math.factorial(dim - 1)
    return numeric, analytic


def _validate_povm(povm: Povm, seed) -> None:
    try:
        residual = completeness_residual(povm)
    except DimensionGuardError:
        residual = basiceq_residual(povm, samples=2000, seed=seed)
    if residual > _VALIDITY_TOL:
        raise PovmValidationError(
            f"completeness residual {residual:.3e} exceeds {_VALIDITY_TOL:.0e}",
            code="completeness_failed",
        )


def _worker_moments(povm: Povm, count: int, seq: np.random.SeedSequence):
    from .kernels import povm_moments_block

    rng = np.random.default_rng(seq)
    total = 0.0
    total_sq = 0.0
    for take in _chunks(count, _BLOCK):
        block = sample_state_block(povm.two_j, take, rng)
        fid, _ = povm_moments_block(block, povm.states, povm.weights, povm.ncopies)
        total += float(fid.sum())
        total_sq += float((fid * fid).sum())
    return total, total_sq


def _chunks(total: int, block: int):
    remaining = total
    while remaining > 0:
        take = min(block, remaining)
        yield take
        remaining -= take


def estimate_average_fidelity(
    povm: Povm, samples: int, seed, workers: int = 1
) -> FidelityEstimate:
    """Monte Carlo average of sum_r w_r |<psi|psi_r>|^(2N) |<psi|psi_r>|^2.

    The POVM is validated up front (completeness within 1e-8).  Converges
    to (N+1)/(N+2J+1) for optimal measurements.
    """
    if samples < 1000:
        raise SpinPovmError("fidelity estimation needs at least 1000 samples")
    if workers < 1:
        raise SpinPovmError("workers must be >= 1")
    _validate_povm(povm, seed)
    counts = [samples // workers + (1 if i < samples % workers else 0) for i in range(workers)]
    streams = np.random.SeedSequence(seed).spawn(workers)
    if workers == 1:
        partials = [_worker_moments(povm, counts[0], streams[0])]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_worker_moments, povm, counts[i], streams[i])
                for i in range(workers)
            ]
            partials = [f.result() for f in futures]  # merged in worker order
    total = 0.0
    total_sq = 0.0
    for t, tsq in partials:
        total += t
        total_sq += tsq
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0) * samples / max(samples - 1, 1)
    stderr = math.sqrt(var / samples)
    return FidelityEstimate(
        mean=mean,
        stderr=stderr,
        samples=samples,
        analytic=analytic_fidelity(povm.ncopies, Fraction(povm.two_j, 2)),
    )


def outcome_probabilities(povm: Povm, psi: Spinor) -> np.ndarray:
    """Outcome distribution w_r |<psi|psi_r>|^(2N) for one input state."""
    from .kernels import povm_probability_block

    if psi.two_j != povm.two_j:
        raise SpinPovmError("state spin does not match POVM spin")
    probs = povm_probability_block(
        psi.amplitudes[np.newaxis, :], povm.states, povm.weights, povm.ncopies
    )[0]
    deviation = abs(float(probs.sum()) - 1.0)
    if deviation > 1e-6:
        raise PovmValidationError(
            f"outcome probabilities sum to 1 {deviation:.3e} off; invalid POVM",
            code="completeness_failed",
        )
    return probs


def simulate_measurement(povm: Povm, psi: Spinor, rng: np.random.Generator) -> int:
    """Sample one outcome index; the guess state is the matching element."""
    probs = outcome_probabilities(povm, psi)
    u = rng.random() * probs.sum()
    return int(np.searchsorted(np.cumsum(probs), u, side="right").clip(0, probs.size - 1))


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """Aggregated (state, outcome) draws over uniformly random inputs."""

    counts: np.ndarray  # per-outcome histogram
    trials: int
    empirical_fidelity: float
    fidelity_stderr: float

    def as_dict(self) -> dict:
        return {
            "histogram": [int(c) for c in self.counts],
            "trials": self.trials,
            "empirical_fidelity": self.empirical_fidelity,
            "fidelity_stderr": self.fidelity_stderr,
        }


def run_simulation(povm: Povm, trials: int, seed) -> SimulationResult:
    """Draw random states, measure each once, and score the guesses.

    The per-trial score is |<psi|psi_r>|^2 for the triggered outcome r, so
    the mean is a second, independent estimator of the average fidelity.
    """
    from .kernels import povm_probability_block

    if trials < 1:
        raise SpinPovmError("trials must be >= 1")
    _validate_povm(povm, seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    counts = np.zeros(povm.n_elements, dtype=np.int64)
    total = 0.0
    total_sq = 0.0
    for take in _chunks(trials, _BLOCK):
        block = sample_state_block(povm.two_j, take, rng)
        probs = povm_probability_block(block, povm.states, povm.weights, povm.ncopies)
        sums = probs.sum(axis=1)
        if float(np.abs(sums - 1.0).max()) > 1e-6:
            raise PovmValidationError(
                "outcome probabilities do not sum to 1", code="completeness_failed"
            )
        cdf = np.cumsum(probs, axis=1)
        u = rng.random(take) * cdf[:, -1]
        outcomes = (u[:, np.newaxis] >= cdf).sum(axis=1).clip(0, povm.n_elements - 1)
        counts += np.bincount(outcomes, minlength=povm.n_elements)
        ov = block @ povm.states.conj().T
        p = ov.real**2 + ov.imag**2
        scores = p[np.arange(take), outcomes]
        total += float(scores.sum())
        total_sq += float((scores * scores).sum())
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0) * trials / max(trials - 1, 1)
    return SimulationResult(
        counts=counts,
        trials=trials,
        empirical_fidelity=mean,
        fidelity_stderr=math.sqrt(var / trials),
    )
