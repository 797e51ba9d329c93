"""Compare the compiled kernel-sum core against the numpy fallback.

Usage: python benchmarks/bench_core.py [--repeats N]
"""

import argparse
import time

import numpy as np

from ubk import _core_numpy as npcore

try:
    from ubk import _core_cy as cycore
except ImportError:  # pragma: no cover - fallback-only build
    cycore = None

CASES = [
    ("density n=2^15 G=257", "density_sums",
     lambda x, y, g, t: (2, x, g, 0.01)),
    ("density n=2^17 G=513", "density_sums",
     lambda x, y, g, t: (2, x[: 2**17], np.linspace(-1, 1, 513), 0.003)),
    ("regression n=2^15 G=257", "weighted_sums",
     lambda x, y, g, t: (2, x, y, g, 0.01)),
    ("cond-ecdf n=2^15 G=257 T=21", "indicator_sums",
     lambda x, y, g, t: (2, x, y, g, 0.01, t)),
    ("pair sum n=2^15", "pair_sum",
     lambda x, y, g, t: (2, x, 0.05)),
]


def bench(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    opts = parser.parse_args()

    rng = np.random.default_rng(0)
    n = 2**17
    x = np.sort(rng.uniform(-1, 1, n))
    y = rng.normal(size=n)
    grid = np.linspace(-1, 1, 257)
    ts = np.linspace(-2, 2, 21)

    print(f"{'case':30s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}")
    for label, name, build in CASES:
        args = build(x[: 2**15] if "2^15" in label else x, y[: 2**15], grid, ts)
        t_np = bench(getattr(npcore, name), args, opts.repeats)
        if cycore is None:
            print(f"{label:30s} {t_np*1e3:9.2f}ms {'n/a':>10s}")
            continue
        t_cy = bench(getattr(cycore, name), args, opts.repeats)
        print(f"{label:30s} {t_np*1e3:9.2f}ms {t_cy*1e3:9.2f}ms {t_np/t_cy:7.1f}x")


if __name__ == "__main__":
    main()
