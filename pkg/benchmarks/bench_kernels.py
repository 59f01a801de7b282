"""Compare the compiled and numpy ADMM kernels.

Usage: python3 benchmarks/bench_kernels.py [--iters N] [--repeat R]

Times ``run_chunk`` and ``project_cone`` on a block layout matching a
see-saw measurement step, then a full discrimination solve with each backend.
"""

import argparse
import time

import numpy as np

from antidegrade import _admm_py, _kernel, sdp
from antidegrade.matkernel import random_density


def layout(n_blocks, dim):
    sizes = np.array([dim] * n_blocks + [1], dtype=np.int64)
    kinds = np.array([_kernel.KIND_PSD] * n_blocks + [_kernel.KIND_FREE], dtype=np.int64)
    offsets = np.concatenate([[0], np.cumsum(sizes**2)[:-1]]).astype(np.int64)
    return offsets, sizes, kinds, int(np.sum(sizes**2))


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def bench_chunk(kern, iters, repeat, rng):
    offsets, sizes, kinds, n = layout(4, 6)
    r = 36
    U = rng.normal(size=(n, r)) / n
    V = rng.normal(size=(n, r)) / n
    h = rng.normal(size=n)
    x0, z0, u0 = (rng.normal(size=n) for _ in range(3))

    def run():
        x, z, u = x0.copy(), z0.copy(), u0.copy()
        kern.run_chunk(x, z, u, 1.0, U, V, h, offsets, sizes, kinds, 1.5, iters)

    return best_of(run, repeat)


def bench_project(kern, repeat, rng):
    offsets, sizes, kinds, n = layout(4, 6)
    w0 = rng.normal(size=n)

    def run():
        for _ in range(200):
            kern.project_cone(w0.copy(), offsets, sizes, kinds)

    return best_of(run, repeat)


def bench_solve(backend, repeat, rng):
    ops = [0.25 * random_density(6, rng) for _ in range(4)]
    cfg = sdp.SolverConfig(backend=backend)
    return best_of(lambda: sdp.discriminate(ops, cfg), repeat)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iters", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {"python": _admm_py}
    if _kernel.BACKEND == "cython":
        backends["cython"] = _kernel.get("cython")
    else:
        print("compiled kernel not built; timing the numpy fallback only")
    rows = []
    for name, kern in backends.items():
        rng = np.random.default_rng(0)
        rows.append((name, bench_chunk(kern, args.iters, args.repeat, rng), bench_project(kern, args.repeat, rng),
                     bench_solve(name, args.repeat, rng)))
    print(f"{'backend':<8} {'run_chunk (s)':>14} {'200x project (s)':>17} {'discriminate (s)':>17}")
    for name, a, b, c in rows:
        print(f"{name:<8} {a:>14.4f} {b:>17.4f} {c:>17.4f}")
    if len(rows) == 2:
        (_, a0, b0, c0), (_, a1, b1, c1) = rows
        print(f"{'speedup':<8} {a0 / a1:>14.1f} {b0 / b1:>17.1f} {c0 / c1:>17.1f}")


if __name__ == "__main__":
    main()
