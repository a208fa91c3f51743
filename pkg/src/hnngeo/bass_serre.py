"""Finite pieces of the Bass-Serre tree of the HNN extension.

Vertices are left cosets g * Z^n, keyed by the syllable part of the
reduced form (the trailing lattice factor is exactly what right
multiplication by the base group changes, so dropping it is the coset
projection).  Edges are left cosets of the first embedded sublattice,
keyed by the syllable part plus the head reduced mod m1 Z^n; the edge
keyed by g runs from the vertex of g t^-1 up to the vertex of g, and
the integer height (sum of syllable signs) increases by one along it.

Everything here is exact: heights are integers on vertices and become
affine along unit-length edges only through the TreePoint abstraction.
A TreeBall is an immutable BFS patch; all path queries refuse to leave
it rather than growing it silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import OutsideBall
from .group_core import (
    GroupElement,
    Syllable,
    generators,
    multiply,
)
from .presentation import Presentation


@dataclass(frozen=True)
class TreeVertex:
    key: tuple[Syllable, ...]

    def height(self) -> int:
        return sum(eps for _, eps in self.key)


@dataclass(frozen=True)
class TreeEdge:
    key: tuple[tuple[Syllable, ...], tuple[int, ...]]
    source: TreeVertex
    target: TreeVertex


def base_vertex(pres: Presentation) -> TreeVertex:
    return TreeVertex(())


def vertex_of(g: GroupElement) -> TreeVertex:
    return TreeVertex(g.syllables)


def vertex_element(pres: Presentation, v: TreeVertex) -> GroupElement:
    """Canonical coset representative: the key with zero head."""
    return GroupElement(pres, v.key, (0,) * pres.n)


def _t_step(pres: Presentation, eps: int) -> GroupElement:
    gens = generators(pres)
    return gens[-2] if eps == 1 else gens[-1]


def edge_of(g: GroupElement) -> TreeEdge:
    """Edge coset of g, keyed by (syllables, head mod m1 Z^n)."""
    pres = g.pres
    rep = pres.table1.rep(g.head)
    canon = GroupElement(pres, g.syllables, rep)
    target = TreeVertex(g.syllables)
    source = vertex_of(multiply(canon, _t_step(pres, -1)))
    return TreeEdge((g.syllables, rep), source, target)


def neighbors(pres: Presentation, v: TreeVertex) -> list[TreeEdge]:
    """All incident edges: |det m1| incoming below, |det m2| outgoing above."""
    out: list[TreeEdge] = []
    for r in pres.table1.reps:
        out.append(edge_of(GroupElement(pres, v.key, r)))
    t_up = _t_step(pres, 1)
    for r in pres.table2.reps:
        out.append(edge_of(multiply(GroupElement(pres, v.key, r), t_up)))
    return out


def act_vertex(g: GroupElement, v: TreeVertex) -> TreeVertex:
    return vertex_of(multiply(g, vertex_element(g.pres, v)))


def act_edge(g: GroupElement, e: TreeEdge) -> TreeEdge:
    pres = g.pres
    canon = GroupElement(pres, e.key[0], e.key[1])
    return edge_of(multiply(g, canon))


# -- points and heights --------------------------------------------------------


@dataclass(frozen=True)
class TreePoint:
    """A vertex, or an interior position u in (0,1) along an edge.

    Positions are measured from the edge source, so the height is
    source height + u.  u = 0 and u = 1 are normalized away to the
    vertex form at construction.
    """

    vertex: Optional[TreeVertex]
    edge: Optional[TreeEdge]
    u: float

    @staticmethod
    def at_vertex(v: TreeVertex) -> "TreePoint":
        return TreePoint(v, None, 0.0)

    @staticmethod
    def on_edge(e: TreeEdge, u: float) -> "TreePoint":
        if u <= 0.0:
            if u < 0.0:
                raise ValueError("edge parameter must lie in [0, 1]")
            return TreePoint.at_vertex(e.source)
        if u >= 1.0:
            if u > 1.0:
                raise ValueError("edge parameter must lie in [0, 1]")
            return TreePoint.at_vertex(e.target)
        return TreePoint(None, e, u)

    def is_vertex(self) -> bool:
        return self.vertex is not None


def height_c(p: TreePoint) -> float:
    if p.vertex is not None:
        return float(p.vertex.height())
    return p.edge.source.height() + p.u


def act_point(g: GroupElement, p: TreePoint) -> TreePoint:
    if p.vertex is not None:
        return TreePoint.at_vertex(act_vertex(g, p.vertex))
    return TreePoint(None, act_edge(g, p.edge), p.u)


# -- finite balls ----------------------------------------------------------------


class TreeBall:
    """Immutable BFS patch of the tree around a center vertex.

    Stores vertex distances from the center, the incident-edge lists,
    and the edge set; checks the tree identity |E| = |V| - 1 on
    construction.  All path queries below operate within one ball.
    """

    def __init__(self, pres: Presentation, radius: int, center: TreeVertex | None = None):
        self.pres = pres
        self.radius = radius
        self.center = center if center is not None else base_vertex(pres)
        dist = {self.center: 0}
        adjacency: dict[TreeVertex, list[TreeEdge]] = {self.center: []}
        edges: dict = {}
        frontier = [self.center]
        for r in range(1, radius + 1):
            nxt = []
            for v in frontier:
                for e in neighbors(pres, v):
                    other = e.target if e.source == v else e.source
                    if e.key not in edges:
                        edges[e.key] = e
                        adjacency.setdefault(e.source, []).append(e)
                        adjacency.setdefault(e.target, []).append(e)
                    if other not in dist:
                        dist[other] = r
                        nxt.append(other)
            frontier = nxt
        # drop edges that lead out of the vertex set (frontier overhang)
        kept = {}
        for k, e in edges.items():
            if e.source in dist and e.target in dist:
                kept[k] = e
        self.edges = kept
        self.adjacency = {
            v: [e for e in adj if e.key in kept] for v, adj in adjacency.items() if v in dist
        }
        self.vertex_dist = dist
        if len(self.edges) != len(self.vertex_dist) - 1:
            raise AssertionError("ball is not a tree: |E| != |V| - 1")
        self._parents_cache: dict = {}

    def __contains__(self, v: TreeVertex) -> bool:
        return v in self.vertex_dist

    def contains_point(self, p: TreePoint) -> bool:
        if p.vertex is not None:
            return p.vertex in self.vertex_dist
        return p.edge.source in self.vertex_dist and p.edge.target in self.vertex_dist

    def require_point(self, p: TreePoint) -> None:
        if not self.contains_point(p):
            raise OutsideBall("tree point outside the constructed ball")

    def degree(self, v: TreeVertex) -> int:
        return len(self.adjacency[v])

    def interior_vertices(self) -> list[TreeVertex]:
        return [v for v, d in self.vertex_dist.items() if d < self.radius]

    def vertex_paths_from(self, start: TreeVertex) -> dict[TreeVertex, TreeEdge]:
        """BFS parent-edge map; the unique path to any vertex follows it back.

        A handful of maps are kept cached: path queries hit the same
        few start vertices repeatedly.
        """
        if start in self._parents_cache:
            return self._parents_cache[start]
        if start not in self.vertex_dist:
            raise OutsideBall("start vertex outside ball")
        parent: dict[TreeVertex, TreeEdge] = {}
        seen = {start}
        queue = [start]
        while queue:
            nxt = []
            for v in queue:
                for e in self.adjacency[v]:
                    other = e.target if e.source == v else e.source
                    if other not in seen:
                        seen.add(other)
                        parent[other] = e
                        nxt.append(other)
            queue = nxt
        if len(self._parents_cache) >= 8:
            self._parents_cache.pop(next(iter(self._parents_cache)))
        self._parents_cache[start] = parent
        return parent

    def vertex_distance(self, a: TreeVertex, b: TreeVertex) -> int:
        if a not in self.vertex_dist or b not in self.vertex_dist:
            raise OutsideBall("vertex outside ball")
        if a == b:
            return 0
        parent = self.vertex_paths_from(a)
        d = 0
        v = b
        while v != a:
            e = parent[v]
            v = e.source if e.target == v else e.target
            d += 1
        return d

    def export_edge_rows(self) -> list[tuple[str, str, int]]:
        """(source_key, target_key, c_source) rows for CSV export."""
        from .group_core import to_string

        rows = []
        for e in self.edges.values():
            s = to_string(vertex_element(self.pres, e.source))
            t = to_string(vertex_element(self.pres, e.target))
            rows.append((s, t, e.source.height()))
        return sorted(rows)


# -- paths ------------------------------------------------------------------------


class TreePath:
    """Unit-speed polygonal path given as (edge, u_from, u_to) segments."""

    def __init__(self, segments: list[tuple[TreeEdge, float, float]]):
        self.segments = [(e, u0, u1) for (e, u0, u1) in segments if u0 != u1]
        self.lengths = [abs(u1 - u0) for (_, u0, u1) in self.segments]
        self.length = sum(self.lengths)

    def point_at(self, s: float) -> TreePoint:
        if not self.segments:
            raise ValueError("empty path has no points")
        if s <= 0:
            e, u0, _ = self.segments[0]
            return TreePoint.on_edge(e, u0)
        acc = 0.0
        for (e, u0, u1), ln in zip(self.segments, self.lengths):
            if s <= acc + ln or (e, u0, u1) == self.segments[-1]:
                frac = min(1.0, max(0.0, (s - acc) / ln))
                return TreePoint.on_edge(e, u0 + (u1 - u0) * frac)
            acc += ln
        e, _, u1 = self.segments[-1]
        return TreePoint.on_edge(e, u1)

    def endpoint(self) -> TreePoint:
        e, _, u1 = self.segments[-1]
        return TreePoint.on_edge(e, u1)

    def height_change(self) -> float:
        """Signed height difference end - start (each edge has slope 1)."""
        return sum(u1 - u0 for (_, u0, u1) in self.segments)


def _entry_costs(p: TreePoint) -> list[tuple[TreeVertex, float, list[tuple[TreeEdge, float, float]]]]:
    """Ways to leave p toward a vertex: (gate vertex, cost, prefix segments)."""
    if p.vertex is not None:
        return [(p.vertex, 0.0, [])]
    e, u = p.edge, p.u
    return [
        (e.source, u, [(e, u, 0.0)]),
        (e.target, 1.0 - u, [(e, u, 1.0)]),
    ]


def tree_distance(a: TreePoint, b: TreePoint, ball: TreeBall) -> float:
    """Length of the unique arc between two in-ball points."""
    ball.require_point(a)
    ball.require_point(b)
    if a == b:
        return 0.0
    if a.edge is not None and b.edge is not None and a.edge.key == b.edge.key:
        return abs(a.u - b.u)
    if a.vertex is not None and b.vertex is not None:
        return float(ball.vertex_distance(a.vertex, b.vertex))
    best = None
    for va, ca, _ in _entry_costs(a):
        for vb, cb, _ in _entry_costs(b):
            d = ca + ball.vertex_distance(va, vb) + cb
            if best is None or d < best:
                best = d
    return best


def geodesic_sigma(a: TreePoint, b: TreePoint, ball: TreeBall) -> TreePath:
    """Unit-speed geodesic from a to b as a TreePath (empty when a == b)."""
    ball.require_point(a)
    ball.require_point(b)
    if a == b:
        return TreePath([])
    if a.edge is not None and b.edge is not None and a.edge.key == b.edge.key:
        return TreePath([(a.edge, a.u, b.u)])
    if a.vertex is not None and b.vertex is not None and a.vertex == b.vertex:
        return TreePath([])
    best = None
    for va, ca, pre in _entry_costs(a):
        for vb, cb, post in _entry_costs(b):
            d = ca + ball.vertex_distance(va, vb) + cb
            if best is None or d < best[0]:
                best = (d, va, vb, pre, post)
    _, va, vb, pre, post = best
    parent = ball.vertex_paths_from(va)
    chain: list[tuple[TreeEdge, float, float]] = []
    v = vb
    while v != va:
        e = parent[v]
        if e.target == v:
            chain.append((e, 0.0, 1.0))
            v = e.source
        else:
            chain.append((e, 1.0, 0.0))
            v = e.target
    chain.reverse()
    # post was built "from b toward its gate"; traverse it gate-to-b
    post = [(e, u1, u0) for (e, u0, u1) in reversed(post)]
    segs = pre + chain + post
    # trim an immediate double-back where the partial entry segment
    # retraces the first chain edge (possible when the gate choice ties)
    cleaned: list[tuple[TreeEdge, float, float]] = []
    for seg in segs:
        if cleaned and cleaned[-1][0].key == seg[0].key and cleaned[-1][2] == seg[1]:
            prev = cleaned.pop()
            merged = (prev[0], prev[1], seg[2])
            if merged[1] != merged[2]:
                cleaned.append(merged)
        else:
            cleaned.append(seg)
    return TreePath(cleaned)


# -- height-monotone rays ------------------------------------------------------------


def _canonical_up_edge(pres: Presentation, v: TreeVertex) -> TreeEdge:
    return edge_of(multiply(vertex_element(pres, v), _t_step(pres, 1)))


def _canonical_down_edge(pres: Presentation, v: TreeVertex) -> TreeEdge:
    return edge_of(vertex_element(pres, v))


def ascending_ray_beta(x: TreePoint, lo: float, hi: float, ball: TreeBall) -> "AscendingRay":
    """Geodesic through x whose height is height(x) + u for u in [lo, hi].

    Descending steps follow the edge of the zero representative into
    the vertex below; ascending steps follow the zero-representative
    outgoing edge.  Any such choice produces a geodesic because the
    height is strictly monotone along it.
    """
    if lo > 0 or hi < 0:
        raise ValueError("span must contain 0")
    return AscendingRay(x, lo, hi, ball)


class AscendingRay:
    """Chain of edges covering height offsets [lo, hi] around x.

    Each chain entry (a, edge) covers offsets u in [a, a + 1], where a
    is the source height relative to x; point_at(u) is the position
    u - a along that edge.
    """

    def __init__(self, x: TreePoint, lo: float, hi: float, ball: TreeBall):
        ball.require_point(x)
        self.x = x
        self.lo = lo
        self.hi = hi
        pres = ball.pres
        chain: list[tuple[float, TreeEdge]] = []
        if x.vertex is None:
            chain.append((-x.u, x.edge))
            top, bottom = x.edge.target, x.edge.source
            top_a, bottom_a = -x.u, -x.u
        else:
            top, bottom = x.vertex, x.vertex
            top_a, bottom_a = -1.0, 0.0  # next up edge starts at 0, next down at -1

        def check(e: TreeEdge):
            if e.source not in ball.vertex_dist or e.target not in ball.vertex_dist:
                raise OutsideBall("height-monotone ray leaves the tree ball")

        while top_a + 1.0 < hi:
            e = _canonical_up_edge(pres, top)
            check(e)
            top_a += 1.0
            chain.append((top_a, e))
            top = e.target
        while bottom_a > lo:
            e = _canonical_down_edge(pres, bottom)
            check(e)
            bottom_a -= 1.0
            chain.append((bottom_a, e))
            bottom = e.source
        self._chain = sorted(chain, key=lambda t: t[0])

    def point_at(self, u: float) -> TreePoint:
        """Point at height height(x) + u for u inside the span."""
        if u < self.lo - 1e-9 or u > self.hi + 1e-9:
            raise ValueError("parameter outside ray span")
        if not self._chain:
            return self.x
        for a, e in self._chain:
            if a - 1e-12 <= u <= a + 1.0 + 1e-12:
                return TreePoint.on_edge(e, min(1.0, max(0.0, u - a)))
        # u coincides with the extreme endpoint of the chain
        a, e = self._chain[-1] if u > 0 else self._chain[0]
        return TreePoint.on_edge(e, min(1.0, max(0.0, u - a)))
