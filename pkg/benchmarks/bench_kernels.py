"""Times the compiled kernels against the pure-numpy fallback.

Run:  python benchmarks/bench_kernels.py
The fallback numbers come from the same process (both modules are
importable side by side); the active backend for the package itself is
reported first.
"""

import time

import numpy as np

from hebbflow import _fallback
from hebbflow.backend import ACTIVE

try:
    from hebbflow import _kernels
except ImportError:
    _kernels = None


def timeit(fn, *args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def row(name, compiled_t, fallback_t):
    speedup = fallback_t / compiled_t if compiled_t else float("nan")
    print(f"{name:28s} compiled {compiled_t * 1e3:9.3f} ms   fallback {fallback_t * 1e3:9.3f} ms   x{speedup:6.1f}")


def main():
    print(f"active backend: {ACTIVE}")
    if _kernels is None:
        print("compiled extension unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)

    cases = []
    cases.append(("rng normal fill (1e6)", lambda m: m.fill_normal(42, 0, 1_000_000)))
    cases.append(("rng uniform fill (1e6)", lambda m: m.fill_uniform(42, 0, 1_000_000)))

    A = rng.standard_normal((96, 96))
    A = A + A.T
    cases.append(("jacobi eig 96x96", lambda m: m.jacobi_eig(A)))

    W = rng.standard_normal((4, 64))
    X = rng.standard_normal((2000, 64))
    cases.append(("hebb trace 2000x64 m=4", lambda m: m.hebb_trace(W, X)))
    cases.append(("hebb ordered 2000x64 m=4", lambda m: m.hebb_ordered(W, X)))

    P = rng.standard_normal((1500, 3))
    cases.append(("pairwise dist 1500x3", lambda m: m.pairwise_dist(P)))

    p2d = rng.uniform(-14, 14, (5000, 2))
    cases.append(("spiral project 5000 pts", lambda m: m.spiral_project(p2d, 4.71, 14.14, 128, 5)))

    for name, fn in cases:
        row(name, timeit(fn, _kernels), timeit(fn, _fallback))


if __name__ == "__main__":
    main()
