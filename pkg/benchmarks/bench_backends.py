"""Wall-time comparison of the numba and numpy kernels.

Run with ``python benchmarks/bench_backends.py``.  Each kernel is warmed up once
so numba compilation is excluded, then timed as the best of a few repeats.
"""

import argparse
import timeit

import numpy as np

from switchtrap import oracle, single_well as sw
from switchtrap.specfun import faddeeva


def bench_faddeeva(n, repeat):
    rng = np.random.default_rng(0)
    z = rng.uniform(-30, 30, n) + 1j * rng.uniform(-5, 30, n)
    out = {}
    for backend in ("numba", "numpy"):
        faddeeva(z[:10], backend=backend)
        out[backend] = min(timeit.repeat(lambda: faddeeva(z, backend=backend), number=1, repeat=repeat))
    return out


def bench_cn(half, dx, steps, repeat):
    grid = oracle.Grid.symmetric(half, dx, 2.5e-4)
    psi = sw.initial_state(grid.nodes, 1.0).astype(complex)
    v = oracle.potential(grid, ((0.0, 3.0),))
    out = {}
    for backend in ("numba", "numpy"):
        oracle.cn_propagate(psi, v, grid.dx, grid.dt, 2, backend)
        out[backend] = min(
            timeit.repeat(lambda: oracle.cn_propagate(psi, v, grid.dx, grid.dt, steps, backend), number=1, repeat=repeat)
        )
    return grid.size, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000, help="Faddeeva evaluation points")
    ap.add_argument("--steps", type=int, default=2000, help="Crank-Nicolson steps")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    f = bench_faddeeva(args.points, args.repeat)
    print(f"faddeeva, {args.points} points")
    for k, t in f.items():
        print(f"  {k:6s} {t * 1e3:9.1f} ms  ({t / args.points * 1e9:.0f} ns/point)")
    print(f"  speed-up {f['numpy'] / f['numba']:.1f}x")

    size, c = bench_cn(60.0, 0.005, args.steps, args.repeat)
    print(f"crank-nicolson, {size} nodes x {args.steps} steps")
    for k, t in c.items():
        print(f"  {k:6s} {t * 1e3:9.1f} ms  ({t / (size * args.steps) * 1e9:.1f} ns/node-step)")
    print(f"  speed-up {c['numpy'] / c['numba']:.1f}x")


if __name__ == "__main__":
    main()
