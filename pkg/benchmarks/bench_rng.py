"""Benchmark the compiled Gaussian fill kernel against the numpy fallback.

Usage:
    python3 benchmarks/bench_rng.py [N ...]

Both backends produce identical streams (same counter-based words, same
Box-Muller pairing); this measures throughput only.  The compiled kernel
wins on scalar loop overhead; the fallback pays for temporaries but
vectorizes, so the gap narrows at large N.
"""

import sys
import time

from lrtransfer import _gaussfill_py

try:
    from lrtransfer import _gaussfill  # compiled

    BACKENDS = [("compiled", _gaussfill), ("python", _gaussfill_py)]
except ImportError:
    print("compiled kernel not built; benchmarking fallback only")
    BACKENDS = [("python", _gaussfill_py)]

KEY = 0x243F6A8885A308D3


def bench(mod, n: int, reps: int) -> float:
    best = float("inf")
    counter = 0
    for _ in range(reps):
        t0 = time.perf_counter()
        _, used = mod.fill_gaussian(KEY, counter, n)
        best = min(best, time.perf_counter() - t0)
        counter += used
    return best


def main() -> None:
    sizes = [int(a) for a in sys.argv[1:]] or [1_000, 100_000, 10_000_000]
    print(f"{'N':>12}  " + "".join(f"{name:>18}" for name, _ in BACKENDS) + "  ratio")
    for n in sizes:
        reps = max(3, min(20, 10_000_000 // max(n, 1)))
        times = [bench(mod, n, reps) for _, mod in BACKENDS]
        rate = ["%8.1f M/s" % (n / t / 1e6) for t in times]
        ratio = f"{times[-1] / times[0]:6.2f}x" if len(times) == 2 else ""
        print(f"{n:>12}  " + "".join(f"{r:>18}" for r in rate) + f"  {ratio}")


if __name__ == "__main__":
    main()
