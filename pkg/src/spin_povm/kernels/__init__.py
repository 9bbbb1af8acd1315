"""Hot-loop kernels with a compiled core and a pure-numpy fallback.

The compiled extension is preferred when present; set SPIN_POVM_KERNEL to
"native" or "reference" to force a backend (forcing "native" raises if the
extension was not built).  The active backend name is reported in every CLI
run manifest, since summation order (and hence last-bit rounding) differs
between backends.
"""

from __future__ import annotations

import os

from . import _reference

_requested = os.environ.get("SPIN_POVM_KERNEL", "").strip().lower()

if _requested in ("", "native"):
    try:
        from . import _native as _impl

        BACKEND = "native"
    except ImportError:
        if _requested == "native":
            raise
        _impl = _reference
        BACKEND = "reference"
elif _requested in ("reference", "python"):
    _impl = _reference
    BACKEND = "reference"
else:
    raise RuntimeError(
        f"SPIN_POVM_KERNEL={_requested!r} is not one of 'native', 'reference'"
    )

povm_moments_block = _impl.povm_moments_block
povm_probability_block = _impl.povm_probability_block


def backend_name() -> str:
    return BACKEND
