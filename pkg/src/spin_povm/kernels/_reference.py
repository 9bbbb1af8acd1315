"""Pure-numpy kernels for per-sample POVM statistics.

Semantically identical to the compiled backend; integer powers are done by
repeated squaring so large copy counts never hit libm pow.
"""

from __future__ import annotations

import numpy as np


def _ipow(p: np.ndarray, n: int) -> np.ndarray:
    """Elementwise p**n for integer n >= 0 via binary exponentiation."""
    out = np.ones_like(p)
    base = p
    k = n
    while k > 0:
        if k & 1:
            out = out * base
        k >>= 1
        if k:
            base = base * base
    return out


def povm_moments_block(
    states: np.ndarray, elements: np.ndarray, weights: np.ndarray, ncopies: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample fidelity and unity sums of a POVM.

    states (B, D) and elements (n, D) are normalized complex amplitude rows;
    with p_r = |<state|element_r>|^2 the returns are

        fidelity[i] = sum_r w_r p_r^(ncopies+1)
        unity[i]    = sum_r w_r p_r^ncopies

    unity is the resolution-of-identity check value (1 for a valid POVM).
    """
    ov = states @ elements.conj().T
    p = ov.real**2 + ov.imag**2
    pn = _ipow(p, ncopies)
    unity = pn @ weights
    fidelity = (pn * p) @ weights
    return fidelity, unity


def povm_probability_block(
    states: np.ndarray, elements: np.ndarray, weights: np.ndarray, ncopies: int
) -> np.ndarray:
    """(B, n) outcome probabilities w_r |<state|element_r>|^(2 ncopies)."""
    ov = states @ elements.conj().T
    p = ov.real**2 + ov.imag**2
    return _ipow(p, ncopies) * weights
