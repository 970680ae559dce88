"""Timing of the compiled and pure-Python kernels and of a full manufactured solve.

Run: python3 benchmarks/bench_kernels.py [--n 2000] [--repeat 20]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from jangbench import kernels
from jangbench.operator import OperatorParams
from jangbench.schwarzschild import schwarzschild_data, schwarzschild_grid
from jangbench.solver import _kernel_args, _node_data, solve_regularized


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    case = schwarzschild_data(1.0, "inv_r")
    grid = schwarzschild_grid(case, args.n)
    params = OperatorParams()
    nd = _node_data(case.data, grid, params)
    psi = case.exact.psi(grid.nodes)
    kargs = _kernel_args(grid, psi, nd, (psi[0], psi[-1]))

    names = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
    print(f"N = {args.n}, default backend: {kernels.BACKEND}")
    for name in names:
        k = kernels.get_backend(name)
        res, lo, di, up = k.assemble(*kargs)
        rhs = -np.asarray(res)
        t_a = best_of(lambda: k.assemble(*kargs), args.repeat)
        t_t = best_of(lambda: k.thomas(lo, di, up, rhs), args.repeat)
        t_s = best_of(lambda: solve_regularized(case.data, params, (psi[0], psi[-1]), grid, init="zero",
                                                backend=name), max(1, args.repeat // 5))
        print(f"{name:>7}: assemble {1e6 * t_a:9.1f} us   tridiagonal solve {1e6 * t_t:9.1f} us   "
              f"full solve {1e3 * t_s:8.2f} ms")


if __name__ == "__main__":
    main()
