"""Compare the compiled stencil kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--sizes 64 256 1024] [--repeat 5]

Prints one row per (kernel, grid size) with the best wall time of each
backend and the speed-up.  The compiled column reads ``n/a`` when the
extension is not built.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from b1classes import _kernels_py

try:
    from b1classes import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _cases(n, rng):
    u = rng.standard_normal((n + 1, n + 1))
    h = 1.0 / n
    kx = rng.uniform(0.5, 2.0, (n + 1, n))
    ky = rng.uniform(0.5, 2.0, (n, n + 1))
    return {
        "edge_grad_norms": lambda mod: mod.edge_grad_norms(u, h, h),
        "net_flux": lambda mod: mod.net_flux(u, kx, ky, h, h),
    }


def best_time(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def run(sizes, repeat: int = 5, seed: int = 0):
    """Rows ``(kernel, n, python_seconds, compiled_seconds or None)``."""
    rng = np.random.default_rng(seed)
    rows = []
    for n in sizes:
        for name, call in _cases(n, rng).items():
            t_py = best_time(lambda: call(_kernels_py), repeat)
            t_c = best_time(lambda: call(_compiled), repeat) if _compiled is not None else None
            rows.append((name, n, t_py, t_c))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"{'kernel':<16} {'n':>6} {'numpy [ms]':>12} {'compiled [ms]':>14} {'speed-up':>9}")
    for name, n, t_py, t_c in run(args.sizes, args.repeat):
        c = f"{1e3 * t_c:14.3f}" if t_c is not None else f"{'n/a':>14}"
        s = f"{t_py / t_c:9.2f}" if t_c else f"{'n/a':>9}"
        print(f"{name:<16} {n:>6} {1e3 * t_py:12.3f} {c} {s}")


if __name__ == "__main__":
    main()
