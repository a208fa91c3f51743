#!/usr/bin/env python3
"""Benchmark: numba kernel vs numpy/scipy fallback for the grid metric.

Runs single-source Dijkstra over warped strip grids of increasing size
with both implementations and reports wall times and agreement.  The
numba path additionally shows the early-exit (single target) mode that
the pair queries use.

Usage:
    python benchmarks/bench_kernels.py [--sources N] [--grid-step H]

The fallback can also be forced globally via HNNGEO_NO_NUMBA=1; this
script imports both paths directly, so no environment toggling is
needed here.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from hnngeo import _kernels
from hnngeo.presentation import preset
from hnngeo.y_space import YModel


def bench_grid(x_half: float, s_half: float, h: float, n_sources: int, seed: int):
    pres = preset("bs:1:2")
    grid = YModel(pres, h, (-x_half, x_half), (-s_half, s_half)).grid
    rng = np.random.default_rng(seed)
    sources = rng.integers(0, grid.n_nodes, size=n_sources)
    targets = rng.integers(0, grid.n_nodes, size=n_sources)

    rows = {}
    if _kernels.USE_NUMBA:
        # warm the JIT outside the timed region
        _kernels.dijkstra_numba(grid.sizes, grid.strides, grid.hcost_by_row,
                                grid.vcost, 0, -1)
        t0 = time.perf_counter()
        full = []
        for s in sources:
            d, _ = _kernels.dijkstra_numba(grid.sizes, grid.strides,
                                           grid.hcost_by_row, grid.vcost, int(s), -1)
            full.append(d)
        rows["numba full"] = time.perf_counter() - t0
        t0 = time.perf_counter()
        for s, t in zip(sources, targets):
            _kernels.dijkstra_numba(grid.sizes, grid.strides,
                                    grid.hcost_by_row, grid.vcost, int(s), int(t))
        rows["numba early-exit"] = time.perf_counter() - t0
    else:
        full = None

    t0 = time.perf_counter()
    csr = _kernels.build_csr(grid.sizes, grid.strides, grid.hcost_by_row, grid.vcost)
    rows["numpy csr build"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    agree = True
    for i, s in enumerate(sources):
        d, _ = _kernels.dijkstra_numpy(csr, int(s), False)
        if full is not None:
            agree = agree and np.allclose(d, full[i], rtol=0, atol=1e-9)
    rows["numpy full"] = time.perf_counter() - t0
    return grid.n_nodes, rows, agree


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sources", type=int, default=5)
    ap.add_argument("--grid-step", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"kernel default: {_kernels.kernel_name()}")
    print(f"{'nodes':>9}  {'variant':<18} {'total s':>9} {'per run ms':>11}")
    for x_half, s_half in [(4.0, 2.0), (10.0, 4.0), (20.0, 6.0)]:
        n, rows, agree = bench_grid(x_half, s_half, args.grid_step,
                                    args.sources, args.seed)
        for name, t in rows.items():
            per = 1000.0 * t / args.sources if "build" not in name else float("nan")
            print(f"{n:>9}  {name:<18} {t:>9.3f} {per:>11.2f}")
        print(f"{'':>9}  distances agree: {agree}")


if __name__ == "__main__":
    main()
