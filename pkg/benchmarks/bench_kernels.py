"""Compare the compiled grid-sweep kernel against the numpy fallback.

Workload mirrors the heaviest acceptance check: the bound sweep (three
pair-factor extrema over a 100,001-point shift grid) and the shared-shift
effect trace, each over a batch of random predictor bundles.

Run: python benchmarks/bench_kernels.py [n_bundles]
"""

import sys
import time

import numpy as np

from medbounds._kernels import _grid_py

try:
    from medbounds._kernels import _grid as _grid_c
except ImportError:
    _grid_c = None

GRID_POINTS = 100_001
TRACE_POINTS = 100_001


def bench_sweep(mod, thetas):
    t0 = time.perf_counter()
    sink = 0.0
    for th in thetas:
        b_x0, b_xs0, b_x1, b_xs1, g_x, g_xs = th
        for args in ((b_x0, b_x1, g_xs), (b_x0, b_x1, g_x), (b_xs0, b_xs1, g_xs)):
            lo, hi = mod.pair_factor_extrema(*args, -30.0, 30.0, GRID_POINTS)
            sink += lo + hi
    return time.perf_counter() - t0, sink


def bench_trace(mod, thetas, shifts):
    t0 = time.perf_counter()
    sink = 0.0
    for th in thetas:
        nde, nie = mod.effects_trace(th, shifts)
        sink += float(nde[0] + nie[-1])
    return time.perf_counter() - t0, sink


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 200
    rng = np.random.default_rng(0)
    thetas = rng.uniform(-4, 4, size=(n, 6))
    shifts = np.linspace(-30, 30, TRACE_POINTS)

    backends = [("numpy", _grid_py)]
    if _grid_c is not None:
        backends.append(("compiled", _grid_c))
    else:
        print("compiled kernel not available; benchmarking numpy only")

    print(f"{n} bundles, {GRID_POINTS:,} grid points per sweep\n")
    print(f"{'workload':<14}{'backend':<10}{'seconds':>9}{'per bundle':>13}")
    results = {}
    for label, fn in (("bound sweep", bench_sweep), ("effect trace", bench_trace)):
        for name, mod in backends:
            if fn is bench_trace:
                secs, sink = fn(mod, thetas, shifts)
            else:
                secs, sink = fn(mod, thetas)
            results[(label, name)] = secs
            print(f"{label:<14}{name:<10}{secs:>9.3f}{secs / n * 1e3:>11.2f}ms")
        if len(backends) == 2:
            speedup = results[(label, "numpy")] / results[(label, "compiled")]
            print(f"{'':<14}compiled is {speedup:.1f}x faster\n")
        else:
            print()


if __name__ == "__main__":
    main()
