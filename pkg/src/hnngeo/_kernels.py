"""Shortest-path kernels for the anisotropic strip grid.

The warped-space metric is evaluated by Dijkstra runs over a lattice
of (x, s) samples whose horizontal step cost depends on the strip
(the integer part of s).  This is the only hot numeric loop in the
package, so it ships in two interchangeable implementations:

* a numba @njit kernel over an implicit grid (no adjacency storage,
  early exit at the target), used by default;
* a numpy/scipy fallback that materializes the grid as a CSR matrix
  once and calls scipy.sparse.csgraph.dijkstra.

Set the environment variable HNNGEO_NO_NUMBA=1 to force the fallback;
it is also selected automatically when numba is not importable.  Both
paths return identical distances up to float summation order; the
benchmark in benchmarks/bench_kernels.py compares them.

Grid layout: sizes = [ns, nx_1, ..., nx_n] in C order, axis 0 is the
height axis with uniform step cost vcost, axis a >= 1 is a horizontal
axis whose step cost from a node in row r is hcost_by_row[r, a-1].
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = "HNNGEO_NO_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(_ENV_FLAG, "").strip().lower() not in ("1", "true", "yes")


def _load_numba_kernel():
    from numba import njit

    @njit(cache=True)
    def _dijkstra(sizes, strides, hcost_by_row, vcost, src, dst):
        n_axes = sizes.shape[0]
        n = 1
        for a in range(n_axes):
            n *= sizes[a]
        dist = np.full(n, np.inf)
        pred = np.full(n, -1, np.int64)
        cap = 2 * (n_axes + 1) * n + 16
        heap_key = np.empty(cap, np.float64)
        heap_val = np.empty(cap, np.int64)
        m = 0
        dist[src] = 0.0
        heap_key[0] = 0.0
        heap_val[0] = src
        m = 1
        while m > 0:
            top_k = heap_key[0]
            top_v = heap_val[0]
            m -= 1
            heap_key[0] = heap_key[m]
            heap_val[0] = heap_val[m]
            i = 0
            while True:
                left = 2 * i + 1
                right = left + 1
                smallest = i
                if left < m and heap_key[left] < heap_key[smallest]:
                    smallest = left
                if right < m and heap_key[right] < heap_key[smallest]:
                    smallest = right
                if smallest == i:
                    break
                heap_key[i], heap_key[smallest] = heap_key[smallest], heap_key[i]
                heap_val[i], heap_val[smallest] = heap_val[smallest], heap_val[i]
                i = smallest
            if top_k > dist[top_v]:
                continue
            if top_v == dst:
                break
            row = top_v // strides[0]
            for a in range(n_axes):
                coord = (top_v // strides[a]) % sizes[a]
                if a == 0:
                    w = vcost
                else:
                    w = hcost_by_row[row, a - 1]
                for direction in range(2):
                    if direction == 0:
                        if coord + 1 >= sizes[a]:
                            continue
                        nb = top_v + strides[a]
                    else:
                        if coord == 0:
                            continue
                        nb = top_v - strides[a]
                    nd = top_k + w
                    if nd < dist[nb]:
                        dist[nb] = nd
                        pred[nb] = top_v
                        j = m
                        heap_key[j] = nd
                        heap_val[j] = nb
                        m += 1
                        while j > 0:
                            parent = (j - 1) // 2
                            if heap_key[parent] <= heap_key[j]:
                                break
                            heap_key[parent], heap_key[j] = heap_key[j], heap_key[parent]
                            heap_val[parent], heap_val[j] = heap_val[j], heap_val[parent]
                            j = parent
        return dist, pred

    return _dijkstra


_NUMBA_KERNEL = None
if _numba_requested():
    try:
        _NUMBA_KERNEL = _load_numba_kernel()
    except ImportError:  # pragma: no cover - exercised only without numba
        _NUMBA_KERNEL = None

USE_NUMBA = _NUMBA_KERNEL is not None


def kernel_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def build_csr(sizes: np.ndarray, strides: np.ndarray, hcost_by_row: np.ndarray, vcost: float):
    """Materialize the implicit grid as a symmetric CSR graph (fallback path)."""
    from scipy.sparse import csr_matrix

    n = int(np.prod(sizes))
    idx = np.arange(n, dtype=np.int64)
    rows_of = idx // strides[0]
    src_all = []
    dst_all = []
    w_all = []
    for a in range(len(sizes)):
        coord = (idx // strides[a]) % sizes[a]
        mask = coord < sizes[a] - 1
        s = idx[mask]
        d = s + strides[a]
        if a == 0:
            w = np.full(len(s), vcost)
        else:
            w = hcost_by_row[rows_of[mask], a - 1]
        src_all.append(s)
        dst_all.append(d)
        w_all.append(w)
        # symmetric direction
        src_all.append(d)
        dst_all.append(s)
        w_all.append(w)
    src_cat = np.concatenate(src_all)
    dst_cat = np.concatenate(dst_all)
    w_cat = np.concatenate(w_all)
    return csr_matrix((w_cat, (src_cat, dst_cat)), shape=(n, n))


def dijkstra_numpy(csr, src: int, need_pred: bool):
    from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

    if need_pred:
        dist, pred = _sp_dijkstra(csr, directed=True, indices=src, return_predecessors=True)
        return dist, pred.astype(np.int64)
    dist = _sp_dijkstra(csr, directed=True, indices=src)
    return dist, None


def dijkstra_numba(sizes, strides, hcost_by_row, vcost, src: int, dst: int = -1):
    """dst = -1 runs to exhaustion; otherwise stops once dst is settled.

    Distances for nodes not yet settled when the early exit fires are
    upper estimates only; callers must not cache partial runs.
    """
    return _NUMBA_KERNEL(sizes, strides, hcost_by_row, vcost, np.int64(src), np.int64(dst))
