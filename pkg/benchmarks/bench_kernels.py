"""Time the compiled kernels against the pure-Python fallback.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``. Each row reports
the best-of-N wall time per call for both backends and the speed-up.
"""
import argparse
import timeit

import numpy as np

from hypwave import _pykernels as py

try:
    from hypwave import _ckernels as ck
except ImportError:
    ck = None

EMPTY = np.zeros(0)
Y0 = np.array([1.0, 0.0, 0.0, 1.0])
TAU, DELTA, ETA, NN = (np.array(v, dtype=float) for v in ([8.0, 64.0], [1.0, 8.0], [1.0, 1.0], [3.0, 8.0]))

CASES = {
    "bessel_series(0.25, 3.5)": lambda m: m.bessel_series(0.25, 3.5, 200, 1e-18),
    "miller_j(0.3, 12, 3)": lambda m: m.miller_j(0.3, 12.0, 3),
    "kummer_series(1.3, 2.6, 7i)": lambda m: m.kummer_series(1.3 + 0j, 2.6 + 0j, 7j, 500, 1e-17),
    "kummer_walk(6i -> 30i)": lambda m: m.kummer_walk(0.7 + 0j, 1.4 + 0j, 6j, 1.0 + 0.5j, 0.2 - 0.1j, 30j, 2.0, 80),
    "coefficient_value x100": lambda m: [m.coefficient_value(t, 1, 0.5, 0.5, 0.5, TAU, DELTA, ETA, NN)
                                         for t in np.linspace(0.0, 100.0, 100)],
    "hill_propagate one cell": lambda m: m.hill_propagate(3.1, 0.0, 1.0, Y0, 0, 0.2, 0.5, 0.5, EMPTY, EMPTY,
                                                          EMPTY, EMPTY, 1e-12, 1e-14, 1e300),
    "hill_propagate resonant t<100": lambda m: m.hill_propagate(2 * np.pi, 0.0, 100.0, Y0, 1, 0.5, 0.5, 0.5,
                                                                TAU, DELTA, ETA, NN, 1e-10, 1e-12, 1e300),
}


def best_time(fn, repeat):
    number = max(1, int(0.2 / max(timeit.timeit(fn, number=1), 1e-7)))
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':34s} {'python':>12s} {'cython':>12s} {'speed-up':>9s}")
    for name, case in CASES.items():
        tp = best_time(lambda: case(py), args.repeat)
        if ck is None:
            print(f"{name:34s} {tp * 1e6:10.1f}us {'n/a':>12s} {'n/a':>9s}")
            continue
        tc = best_time(lambda: case(ck), args.repeat)
        print(f"{name:34s} {tp * 1e6:10.1f}us {tc * 1e6:10.1f}us {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
