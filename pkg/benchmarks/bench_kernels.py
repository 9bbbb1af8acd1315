"""Benchmark the compiled POVM kernels against the numpy fallback.

Times povm_moments_block over a grid of (samples, elements, dim, copies)
shapes and prints a JSON table with per-backend throughput.  Run from the
repository root:

    python benchmarks/bench_kernels.py [--repeats 5] [--samples 200000]
"""

from __future__ import annotations

import argparse
import json
import time

import numpy as np

from spin_povm.kernels import _reference
from spin_povm.montecarlo import sample_state_block

try:
    from spin_povm.kernels import _native
except ImportError:
    _native = None


def time_call(fn, *args, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(7)
    shapes = [
        # (elements, dim, copies): the catalog measurements plus larger probes
        (2, 2, 1),
        (4, 2, 2),
        (9, 3, 2),
        (18, 3, 3),
        (40, 4, 3),
    ]
    rows = []
    for nel, dim, ncopies in shapes:
        states = sample_state_block(dim - 1, args.samples, rng)
        elements = sample_state_block(dim - 1, nel, rng)
        weights = rng.uniform(0.1, 1.0, nel)
        t_ref = time_call(
            _reference.povm_moments_block, states, elements, weights, ncopies,
            repeats=args.repeats,
        )
        row = {
            "samples": args.samples,
            "elements": nel,
            "dim": dim,
            "copies": ncopies,
            "reference_seconds": round(t_ref, 6),
            "reference_msamples_per_s": round(args.samples / t_ref / 1e6, 2),
        }
        if _native is not None:
            t_nat = time_call(
                _native.povm_moments_block, states, elements, weights, ncopies,
                repeats=args.repeats,
            )
            ref_out = _reference.povm_moments_block(states, elements, weights, ncopies)
            nat_out = _native.povm_moments_block(states, elements, weights, ncopies)
            agreement = max(
                float(np.abs(a - b).max()) for a, b in zip(ref_out, nat_out)
            )
            row.update(
                {
                    "native_seconds": round(t_nat, 6),
                    "native_msamples_per_s": round(args.samples / t_nat / 1e6, 2),
                    "native_speedup": round(t_ref / t_nat, 2),
                    "max_abs_disagreement": agreement,
                }
            )
        rows.append(row)

    print(
        json.dumps(
            {
                "native_available": _native is not None,
                "rows": rows,
            },
            indent=2,
        )
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
