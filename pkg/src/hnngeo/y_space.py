"""Computable model of the warped strip space over R^n.

The space is R^n x R carrying a piecewise product metric: on the strip
s in [i, i+1) a horizontal displacement dx costs |phi^{-i} dx| in the
chosen base inner product and vertical motion costs |ds|.  This is the
left-invariant picture of the semidirect product R^n x| Z thickened by
unit-height strips, and the group acts through its semidirect image by
(v, k) . (x, s) = (v + phi^k x, k + s), shifting strips by k.

Distances are bracketed through an axis-move grid at spacing h:

* upper: exact cost of an explicit axis-aligned continuous path (snap
  legs to the nearest node plus a grid shortest path), hence a true
  upper bound for the continuous metric;
* lower: upper / (1 + kappa) with kappa = h * Lambda the reported
  discretization slack (Lambda = largest single-strip stretch of phi
  or its inverse on an axis direction), floored by the certified
  height gap |s_a - s_b|.

kappa is reported, never assumed small; every consumer inequality in
the fibre-product module carries it explicitly.  Grid queries go
through the kernels module (numba or numpy path, see _kernels).
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import BudgetExceeded, DegenerateGrid, OutsideWindow
from .group_core import GroupElement, j_N
from .presentation import Presentation


@dataclass(frozen=True)
class YPoint:
    x: tuple[float, ...]
    s: float

    @staticmethod
    def of(x, s) -> "YPoint":
        if np.isscalar(x):
            x = (float(x),)
        return YPoint(tuple(float(v) for v in x), float(s))

    def x_array(self) -> np.ndarray:
        return np.asarray(self.x, dtype=np.float64)


def height_b(p: YPoint) -> float:
    return p.s


def vertical_ray_alpha(p: YPoint, u: float) -> YPoint:
    """Unit-speed vertical geodesic through p: height moves by u."""
    return YPoint(p.x, p.s + float(u))


def act_y(g: GroupElement, p: YPoint) -> YPoint:
    """Semidirect action: with (v, k) = j_N(g), p maps to (v + phi^k x, k + s)."""
    v, k = j_N(g)
    phi_k = _phi_float(g.pres, k)
    x = phi_k @ p.x_array() + np.array([float(c) for c in v])
    return YPoint(tuple(float(t) for t in x), p.s + k)


def _phi_float(pres: Presentation, k: int) -> np.ndarray:
    return np.array([[float(c) for c in row] for row in pres.phi_power(k)], dtype=np.float64)


class YModel:
    """Strip metric model plus discretization parameters.

    window is ((x_lo,...), (x_hi,...), s_lo, s_hi); base_metric is a
    symmetric positive-definite matrix on the level-0 copy of R^n
    (identity by default).  Immutable after construction; the grid is
    built lazily and shared by all queries.
    """

    def __init__(self, pres: Presentation, grid_step: float,
                 x_window, s_window, base_metric=None,
                 max_nodes: int = 4_000_000, cache_slots: int = 48):
        self.pres = pres
        self.h = float(grid_step)
        if self.h <= 0:
            raise ValueError("grid_step must be positive")
        x_lo, x_hi = x_window
        if np.isscalar(x_lo):
            x_lo = (float(x_lo),) * pres.n
        if np.isscalar(x_hi):
            x_hi = (float(x_hi),) * pres.n
        self.x_lo = tuple(float(v) for v in x_lo)
        self.x_hi = tuple(float(v) for v in x_hi)
        self.s_lo, self.s_hi = float(s_window[0]), float(s_window[1])
        if base_metric is None:
            base_metric = np.eye(pres.n)
        q = np.asarray([[float(Fraction(v)) if not isinstance(v, float) else v for v in row]
                        for row in np.asarray(base_metric)], dtype=np.float64)
        if q.shape != (pres.n, pres.n) or not np.allclose(q, q.T):
            raise ValueError("base_metric must be symmetric n x n")
        try:
            np.linalg.cholesky(q)
        except np.linalg.LinAlgError:
            raise ValueError("base_metric must be positive definite")
        self.base_metric = q
        self.max_nodes = int(max_nodes)
        self.cache_slots = int(cache_slots)
        self._grid = None

    # strip i covers heights [i, i+1); horizontal cost there is
    # |phi^{-i} dx|_Q per unit of dx
    def unit_cost(self, strip: int, axis: int) -> float:
        col = _phi_float(self.pres, -strip)[:, axis]
        return float(math.sqrt(col @ self.base_metric @ col))

    @property
    def anisotropy(self) -> float:
        """Largest per-strip stretch of phi or its inverse on an axis."""
        out = 1.0
        for mat in (_phi_float(self.pres, 1), _phi_float(self.pres, -1)):
            for k in range(self.pres.n):
                col = mat[:, k]
                num = math.sqrt(col @ self.base_metric @ col)
                den = math.sqrt(self.base_metric[k, k])
                out = max(out, num / den)
        return out

    @property
    def kappa(self) -> float:
        """Reported discretization slack for the lower bracket."""
        return self.h * self.anisotropy

    @property
    def grid(self) -> "YGrid":
        if self._grid is None:
            self._grid = YGrid(self)
        return self._grid

    def contains(self, p: YPoint, tol: float = 1e-9) -> bool:
        if not (self.s_lo - tol <= p.s <= self.s_hi + tol):
            return False
        return all(lo - tol <= v <= hi + tol
                   for v, lo, hi in zip(p.x, self.x_lo, self.x_hi))

    def require(self, p: YPoint) -> None:
        if not self.contains(p):
            raise OutsideWindow(f"point {p} outside model window")


class YGrid:
    """Axis-move lattice realizing the strip metric; immutable."""

    def __init__(self, model: YModel):
        self.model = model
        h = model.h
        n = model.pres.n
        self.ns = int(math.floor((model.s_hi - model.s_lo) / h + 1e-9)) + 1
        self.nx = tuple(int(math.floor((hi - lo) / h + 1e-9)) + 1
                        for lo, hi in zip(model.x_lo, model.x_hi))
        if self.ns < 2 or any(c < 2 for c in self.nx):
            raise DegenerateGrid("grid step too large for the window")
        sizes = [self.ns, *self.nx]
        total = 1
        for c in sizes:
            total *= c
        if total > model.max_nodes:
            raise BudgetExceeded(f"grid would need {total} nodes (cap {model.max_nodes})")
        self.n_nodes = total
        self.sizes = np.array(sizes, dtype=np.int64)
        strides = np.ones(len(sizes), dtype=np.int64)
        for a in range(len(sizes) - 2, -1, -1):
            strides[a] = strides[a + 1] * sizes[a + 1]
        self.strides = strides
        self.s_values = model.s_lo + h * np.arange(self.ns)
        self.strip_of_row = np.floor(self.s_values + 1e-12).astype(np.int64)
        strips = np.unique(self.strip_of_row)
        unit = {int(i): np.array([model.unit_cost(int(i), k) for k in range(n)])
                for i in strips}
        self.hcost_by_row = np.array(
            [h * unit[int(i)] for i in self.strip_of_row], dtype=np.float64)
        self.unit_by_row = self.hcost_by_row / h
        self.vcost = h
        self._csr = None
        self._full_cache: OrderedDict[int, np.ndarray] = OrderedDict()

    # -- node addressing ------------------------------------------------------
    def node_index(self, row: int, cols) -> int:
        idx = row * self.strides[0]
        for a, c in enumerate(cols):
            idx += c * self.strides[a + 1]
        return int(idx)

    def node_point(self, idx: int) -> YPoint:
        row = idx // self.strides[0]
        rest = idx % self.strides[0]
        coords = []
        for a in range(1, len(self.sizes)):
            c = rest // self.strides[a]
            rest = rest % self.strides[a]
            coords.append(self.model.x_lo[a - 1] + self.model.h * int(c))
        return YPoint(tuple(coords), float(self.s_values[int(row)]))

    def snap(self, p: YPoint) -> tuple[int, float]:
        """Nearest node and the exact cost of the two-leg snap path
        (vertical to the node height, then horizontal in that strip)."""
        self.model.require(p)
        h = self.model.h
        row = int(round((p.s - self.model.s_lo) / h))
        row = min(max(row, 0), self.ns - 1)
        cols = []
        for a in range(self.model.pres.n):
            c = int(round((p.x[a] - self.model.x_lo[a]) / h))
            cols.append(min(max(c, 0), self.nx[a] - 1))
        idx = self.node_index(row, cols)
        node = self.node_point(idx)
        cost = abs(p.s - node.s)
        for a in range(self.model.pres.n):
            cost += abs(p.x[a] - node.x[a]) * self.unit_by_row[row, a]
        return idx, cost

    # -- shortest paths ---------------------------------------------------------
    def _full_run(self, src: int, need_pred: bool = False):
        if _kernels.USE_NUMBA:
            dist, pred = _kernels.dijkstra_numba(
                self.sizes, self.strides, self.hcost_by_row, self.vcost, src, -1)
        else:
            if self._csr is None:
                self._csr = _kernels.build_csr(
                    self.sizes, self.strides, self.hcost_by_row, self.vcost)
            dist, pred = _kernels.dijkstra_numpy(self._csr, src, True)
        return dist, pred

    def full_dists(self, src: int) -> np.ndarray:
        if src in self._full_cache:
            self._full_cache.move_to_end(src)
            return self._full_cache[src]
        dist, _ = self._full_run(src)
        self._full_cache[src] = dist
        if len(self._full_cache) > self.model.cache_slots:
            self._full_cache.popitem(last=False)
        return dist

    def dist_between(self, na: int, nb: int, cache: bool = False) -> float:
        if na == nb:
            return 0.0
        if na in self._full_cache:
            return float(self._full_cache[na][nb])
        if nb in self._full_cache:
            return float(self._full_cache[nb][na])
        if cache or not _kernels.USE_NUMBA:
            return float(self.full_dists(na)[nb])
        dist, _ = _kernels.dijkstra_numba(
            self.sizes, self.strides, self.hcost_by_row, self.vcost, na, nb)
        return float(dist[nb])

    def node_path(self, na: int, nb: int) -> tuple[float, list[int]]:
        """Shortest node sequence from na to nb with its exact cost."""
        if na == nb:
            return 0.0, [na]
        if _kernels.USE_NUMBA:
            dist, pred = _kernels.dijkstra_numba(
                self.sizes, self.strides, self.hcost_by_row, self.vcost, na, nb)
        else:
            dist, pred = self._full_run(na, need_pred=True)
        if not np.isfinite(dist[nb]):
            raise OutsideWindow("no grid path inside the window")
        chain = [nb]
        v = nb
        while v != na:
            v = int(pred[v])
            if v < 0:
                raise AssertionError("broken predecessor chain")
            chain.append(v)
        chain.reverse()
        return float(dist[nb]), chain


class YPath:
    """Piecewise axis-aligned path with exact strip-metric arc length."""

    def __init__(self, points: list[YPoint], seg_costs: list[float]):
        assert len(seg_costs) == max(0, len(points) - 1)
        self.points = points
        self.seg_costs = seg_costs
        self.cum = [0.0]
        for c in seg_costs:
            self.cum.append(self.cum[-1] + c)
        self.length = self.cum[-1] if points else 0.0

    def is_empty(self) -> bool:
        return len(self.points) <= 1

    def point_at(self, t: float) -> YPoint:
        if not self.points:
            raise ValueError("empty path")
        if t <= 0:
            return self.points[0]
        if t >= self.length:
            return self.points[-1]
        for i in range(len(self.seg_costs)):
            if t <= self.cum[i + 1] or i == len(self.seg_costs) - 1:
                c = self.seg_costs[i]
                frac = 0.0 if c == 0 else (t - self.cum[i]) / c
                a, b = self.points[i], self.points[i + 1]
                x = tuple(xa + frac * (xb - xa) for xa, xb in zip(a.x, b.x))
                return YPoint(x, a.s + frac * (b.s - a.s))
        return self.points[-1]

    def vertical_variation(self) -> float:
        return sum(abs(b.s - a.s) for a, b in zip(self.points, self.points[1:]))


def _snap_leg(grid: YGrid, p: YPoint, idx: int) -> tuple[list[YPoint], list[float]]:
    """p -> (p.x, node height) -> node, with exact per-leg costs."""
    node = grid.node_point(idx)
    pts = [p]
    costs = []
    if p.s != node.s:
        pts.append(YPoint(p.x, node.s))
        costs.append(abs(p.s - node.s))
    if p.x != node.x:
        row = idx // grid.strides[0]
        c = sum(abs(a - b) * grid.unit_by_row[row, k]
                for k, (a, b) in enumerate(zip(p.x, node.x)))
        pts.append(node)
        costs.append(c)
    elif pts[-1] != node:
        pts.append(node)
        costs.append(0.0)
    return pts, costs


def y_distance(a: YPoint, b: YPoint, model: YModel, cache: bool = False) -> tuple[float, float]:
    """(lower, upper) bracket for the strip-metric distance.

    upper is the exact length of a realizable path (certified upper
    bound); lower is upper / (1 + kappa), floored by the height gap
    which every path must climb.
    """
    if a == b:
        return 0.0, 0.0
    grid = model.grid
    na, ca = grid.snap(a)
    nb, cb = grid.snap(b)
    d = grid.dist_between(na, nb, cache=cache)
    upper = ca + d + cb
    lower = max(upper / (1.0 + model.kappa), abs(a.s - b.s))
    return min(lower, upper), upper


def y_geodesic(a: YPoint, b: YPoint, model: YModel) -> YPath:
    """Grid shortest path from a to b including snap legs; its length
    equals y_distance(a, b).upper exactly."""
    if a == b:
        return YPath([], [])
    grid = model.grid
    na, _ = grid.snap(a)
    nb, _ = grid.snap(b)
    pts, costs = _snap_leg(grid, a, na)
    _, chain = grid.node_path(na, nb)
    for u, v in zip(chain, chain[1:]):
        q = grid.node_point(v)
        step = abs(u - v)
        if step == grid.strides[0]:
            w = grid.vcost
        else:
            row = u // grid.strides[0]
            axis = next(k for k in range(1, len(grid.sizes)) if step == grid.strides[k])
            w = grid.hcost_by_row[row, axis - 1]
        pts.append(q)
        costs.append(float(w))
    leg_pts, leg_costs = _snap_leg(grid, b, nb)
    pts.extend(reversed(leg_pts[:-1]))
    costs.extend(reversed(leg_costs))
    return YPath(pts, costs)
