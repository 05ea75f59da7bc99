"""Time the hot kernels under both backends and print a comparison table.

Backend selection happens at import, so each backend runs in its own
subprocess with PLATFORM_AUCTIONS_BACKEND set; the parent collects the
per-kernel timings and reports numpy time, numba time, and the speedup.

    python3 scripts/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import importlib.util
import json
import os
import subprocess
import sys
import time


def _cases(kern, rng):
    import numpy as np

    V8 = np.ascontiguousarray(rng.exponential(1.0, (200_000, 8)))
    V8d = np.ascontiguousarray(np.sort(V8[:20_000], axis=1)[:, ::-1])
    V8d_big = np.ascontiguousarray(np.sort(V8, axis=1)[:, ::-1])
    V2 = np.ascontiguousarray(rng.uniform(0.0, 4.0, (500_000, 2)))
    flags = rng.integers(0, 2, (200_000, 64), dtype=np.uint8)
    pflags = rng.integers(0, 2, (100_000, 24), dtype=np.uint8)
    pvals = rng.exponential(1.0, 24)
    return [
        ("two_level_values",
         lambda: kern.two_level_values(V8, 1.0, 0.3, 2, 1.0, -1.0)),
        ("benchmark_values",
         lambda: kern.benchmark_values(V8d, 2, 1.0, -1.0)),
        ("vickrey_values",
         lambda: kern.vickrey_values(V8d_big, 2, 1.0, -1.0)),
        ("ratio_auction_values",
         lambda: kern.ratio_auction_values(V2, 2.0, 0.75, 1.0, -1.0)),
        ("count_balanced",
         lambda: kern.count_balanced(flags)),
        ("rsol_partition_values",
         lambda: kern.rsol_partition_values(pvals, 2, pflags, 1.0, -1.0)),
        ("rsol_exact_outcome_n14",
         lambda: kern.rsol_exact_outcome(pvals[:14], 2)),
    ]


def _worker(repeat: int) -> None:
    import numpy as np

    from platform_auctions import _kernels as kern

    rng = np.random.default_rng(2024)
    out = {"backend": kern.BACKEND, "times": {}}
    for name, fn in _cases(kern, rng):
        fn()    # warm up (jit compile on the numba side)
        best = min(_timed(fn) for _ in range(repeat))
        out["times"][name] = best
    json.dump(out, sys.stdout)


def _timed(fn) -> float:
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def _spawn(backend: str, repeat: int) -> dict:
    env = dict(os.environ, PLATFORM_AUCTIONS_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--worker",
         "--repeat", str(repeat)],
        env=env, capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        _worker(args.repeat)
        return 0

    results = {"numpy": _spawn("numpy", args.repeat)}
    if importlib.util.find_spec("numba") is not None:
        results["numba"] = _spawn("numba", args.repeat)
    else:
        print("numba not installed; timing the numpy backend only\n")

    names = list(results["numpy"]["times"])
    width = max(len(n) for n in names)
    if "numba" in results:
        print(f"{'kernel':<{width}}  {'numpy':>9}  {'numba':>9}  {'speedup':>7}")
        for n in names:
            a = results["numpy"]["times"][n]
            b = results["numba"]["times"][n]
            print(f"{n:<{width}}  {a * 1e3:>7.1f}ms  {b * 1e3:>7.1f}ms  "
                  f"{a / b:>6.1f}x")
    else:
        print(f"{'kernel':<{width}}  {'numpy':>9}")
        for n in names:
            print(f"{n:<{width}}  {results['numpy']['times'][n] * 1e3:>7.1f}ms")
    return 0


if __name__ == "__main__":
    sys.exit(main())
