"""Compare the compiled RK4 kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--steps 2560]
"""
import argparse
import timeit

import numpy as np

from vessel_lab import _kernels_py

try:
    from vessel_lab import _kernels as _compiled
except ImportError:
    _compiled = None


def _rand(rng, *shape):
    return np.ascontiguousarray(rng.normal(size=shape) + 1j * rng.normal(size=shape))


def cases(steps, rng):
    for n, m in ((1, 2), (8, 2), (16, 4)):
        A = _rand(rng, n, n) * 0.1
        M, N, S = (_rand(rng, 2 * steps + 1, m, m) * 0.1 for _ in range(3))
        B0, X0 = _rand(rng, n, m), _rand(rng, n, n)
        h = 1.0 / 256
        yield (f"rk4_sweep n={n:2d} m={m}",
               lambda mod, a=(A, M, N, S, B0, X0, h, steps): mod.rk4_sweep(*a))
    for d in (2, 4):
        C = _rand(rng, 2 * steps + 1, d, d) * 0.1
        Y0 = np.eye(d, dtype=np.complex128)
        yield (f"rk4_linear d={d}      ", lambda mod, a=(C, Y0, 1.0 / 256, steps): mod.rk4_linear(*a))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--steps", type=int, default=2560)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'case':24s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases(args.steps, rng):
        t_py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _compiled is None:
            print(f"{name:24s} {t_py:12.2f} {'n/a':>12s} {'n/a':>8s}")
            continue
        t_cy = min(timeit.repeat(lambda: fn(_compiled), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:24s} {t_py:12.2f} {t_cy:12.2f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
