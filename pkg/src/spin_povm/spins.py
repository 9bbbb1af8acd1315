"""Half-integer spin bookkeeping.

Spins are carried around as twice their value (``two_j``, an int) so that
J = 1/2, 1, 3/2, ... never rely on float equality.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import SpinValueError


def parse_spin(value) -> int:
    """Normalize a spin given as "1/2", "0.5", 1, 1.5 or Fraction to 2J.

    Returns twice the spin as a positive integer; raises SpinValueError for
    anything that is not a positive half-integer.
    """
    if isinstance(value, bool):
        raise SpinValueError(f"invalid spin: {value!r}")
    if isinstance(value, str):
        try:
            frac = Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise SpinValueError(f"cannot parse spin {value!r}") from None
    elif isinstance(value, (int, Fraction)):
        frac = Fraction(value)
    elif isinstance(value, float):
        frac = Fraction(value).limit_denominator(2)
        if abs(float(frac) - value) > 1e-9:
            raise SpinValueError(f"spin {value!r} is not a half-integer")
    else:
        raise SpinValueError(f"unsupported spin type: {type(value).__name__}")
    two_j = 2 * frac
    if two_j.denominator != 1:
        raise SpinValueError(f"spin {value!r} is not a half-integer")
    two_j = int(two_j)
    if two_j <= 0:
        raise SpinValueError("spin must be positive")
    return two_j


def format_spin(two_j: int) -> str:
    """Render 2J as "1/2", "1", "3/2", ..."""
    if two_j % 2 == 0:
        return str(two_j // 2)
    return f"{two_j}/2"


def spin_dim(two_j: int) -> int:
    """Hilbert-space dimension D = 2J + 1."""
    return two_j + 1
