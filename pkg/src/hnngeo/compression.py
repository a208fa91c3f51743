"""Explicit l^p embeddings and empirical compression exponents.

Two embedding families for rooted tree balls:

* edge_indicator: a vertex maps to the 0/1 vector of the edges on its
  root geodesic.  Symmetric differences of root geodesics are exactly
  the connecting geodesics, so |f(u) - f(v)|_p^p equals the tree
  distance and the family realizes image distance d^(1/p) on the nose.
* weighted_geodesic(beta): the same support, but an edge e on the root
  geodesic of v weighs (1 + d(v, far end of e))^beta.  Larger beta
  pushes mass toward the root and raises the measured exponent.

Group elements embed by concatenating the tree image of their coset
vertex with their semidirect coordinates (scaled x-part and the
stable-letter exponent); the pair (coset vertex, semidirect image)
already separates reduced forms, so the map is injective.

The exponent of a pair cloud {(d_i, y_i)} is estimated by log-log
lower-envelope regression: bucket distances into octaves, take the
minimal image distance per octave, and fit the least-squares slope
through those envelope points in log-log coordinates, snapped to a
0.01 grid and clipped to [0, 1].  Bare feasibility of y >= C d^a - D
cannot select an exponent on a finite sample (every alpha admits a
valid envelope once C may shrink), so the regression picks alpha and
a small LP then certifies constants at it: C is maximized over valid
envelopes whose offset D is the least one making the envelope 0.9-
tight at the largest-distance envelope point.  Both the lower
envelope and the Lipschitz upper bound are checked against 100% of
the input pairs before an estimate is returned, and the construction
is invariant under rescaling the image distances (constants scale,
alpha does not; exact power laws are recovered exactly).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bass_serre import TreeBall, TreeVertex
from .errors import InsufficientRange, NoValidEnvelope, OutsideBall
from .group_core import GroupElement, j_N

ALPHA_GRID_STEP = 0.01
ANCHOR_TIGHTNESS = 0.9


@dataclass(frozen=True)
class EmbeddingSpec:
    kind: str                      # "edge_indicator" | "weighted_geodesic" | "orbit_concat"
    p: float
    beta: Optional[float] = None   # weighted_geodesic only, in (0, 1)
    root: Optional[TreeVertex] = None

    def __post_init__(self):
        if self.p <= 1:
            raise ValueError("target exponent p must exceed 1")
        if self.kind == "weighted_geodesic":
            if self.beta is None or not (0.0 < self.beta < 1.0):
                raise ValueError("weighted_geodesic needs beta in (0, 1)")


@dataclass(frozen=True)
class ExponentEstimate:
    alpha_hat: float
    C_hat: float
    D_hat: float
    A_hat: float
    B_hat: float
    pair_count: int
    distance_range: tuple[float, float]

    def as_dict(self) -> dict:
        return {
            "alpha_hat": self.alpha_hat,
            "C": self.C_hat,
            "D": self.D_hat,
            "A": self.A_hat,
            "B": self.B_hat,
            "pairs": self.pair_count,
            "d_min": self.distance_range[0],
            "d_max": self.distance_range[1],
        }


# -- tree embeddings ---------------------------------------------------------------


class TreeEmbedding:
    """Root-geodesic embedding of a tree ball.

    Stores the root chain of every vertex, so a pair query costs one
    common-prefix walk plus table lookups: both families depend only
    on the two depths and the meet depth.  The explicit coordinate
    dict (image / image_distance_explicit) is kept as the slow
    reference used by the brute-force equivalence tests.
    """

    def __init__(self, spec: EmbeddingSpec, ball: TreeBall):
        root = spec.root if spec.root is not None else ball.center
        if root not in ball.vertex_dist:
            raise OutsideBall("embedding root outside ball")
        self.spec = spec
        self.ball = ball
        self.root = root
        parent = ball.vertex_paths_from(root)
        self.parent = parent
        chains: dict[TreeVertex, tuple] = {root: (root,)}
        order = sorted(ball.vertex_dist, key=lambda v: (ball.vertex_dist[v], v.key))
        for v in order:
            if v == root:
                continue
            e = parent[v]
            w = e.source if e.target == v else e.target
            chains[v] = chains[w] + (v,)
        self.chain = chains
        self.depth = {v: len(c) - 1 for v, c in chains.items()}
        r_max = max(self.depth.values())
        p, beta = spec.p, spec.beta
        if spec.kind == "weighted_geodesic":
            # S[k] = sum_{m=2..k} m^(p beta): below-meet mass of one branch
            self._below = [0.0] * (r_max + 3)
            for k in range(2, r_max + 3):
                self._below[k] = self._below[k - 1] + float(k) ** (p * beta)
            # G[delta][a] = sum_{a'=delta+1..a} |(1+a')^b - (1+a'-delta)^b|^p:
            # shared-prefix mass along the diagonal of depth offset delta
            self._shared = []
            for delta in range(r_max + 2):
                row = [0.0] * (r_max + 2)
                for a in range(delta + 1, r_max + 2):
                    step = abs((1.0 + a) ** beta - (1.0 + a - delta) ** beta) ** p
                    row[a] = row[a - 1] + step
                self._shared.append(row)

    def meet_depth(self, u: TreeVertex, v: TreeVertex) -> int:
        cu, cv = self.chain[u], self.chain[v]
        n = min(len(cu), len(cv))
        i = 0
        while i < n and cu[i] == cv[i]:
            i += 1
        return i - 1

    def tree_distance(self, u: TreeVertex, v: TreeVertex) -> int:
        return self.depth[u] + self.depth[v] - 2 * self.meet_depth(u, v)

    def pair(self, u: TreeVertex, v: TreeVertex) -> tuple[float, float]:
        """(tree distance, image distance) in one prefix walk."""
        du, dv, ell = self.depth[u], self.depth[v], self.meet_depth(u, v)
        d = du + dv - 2 * ell
        p = self.spec.p
        if self.spec.kind == "edge_indicator":
            return float(d), float(d) ** (1.0 / p)
        if du < dv:
            du, dv = dv, du
        delta = du - dv
        acc = self._below[du - ell + 1] + self._below[dv - ell + 1]
        acc += self._shared[delta][du] - self._shared[delta][du - ell]
        return float(d), acc ** (1.0 / p)

    def image_distance(self, u: TreeVertex, v: TreeVertex) -> float:
        return self.pair(u, v)[1]

    # -- explicit coordinates (reference path) ------------------------------
    def path_edges(self, v: TreeVertex) -> list:
        """Edge keys on the root geodesic, root side first."""
        out = []
        while v != self.root:
            e = self.parent[v]
            out.append(e.key)
            v = e.source if e.target == v else e.target
        out.reverse()
        return out

    def image(self, v: TreeVertex) -> dict:
        edges = self.path_edges(v)
        if self.spec.kind == "edge_indicator":
            return {k: 1.0 for k in edges}
        if self.spec.kind == "weighted_geodesic":
            depth = len(edges)
            beta = self.spec.beta
            # edge j connects depth j to depth j+1; its far end (from v)
            # sits at depth j, at distance depth - j from v
            return {k: (1.0 + depth - j) ** beta for j, k in enumerate(edges)}
        raise ValueError(f"not a tree embedding kind: {self.spec.kind}")

    def image_distance_explicit(self, u: TreeVertex, v: TreeVertex) -> float:
        fu, fv = self.image(u), self.image(v)
        acc = 0.0
        p = self.spec.p
        for k, w in fu.items():
            acc += abs(w - fv.get(k, 0.0)) ** p
        for k, w in fv.items():
            if k not in fu:
                acc += w ** p
        return acc ** (1.0 / p)


def embed_tree(spec: EmbeddingSpec, ball: TreeBall) -> TreeEmbedding:
    return TreeEmbedding(spec, ball)


def sample_vertex_pairs(ball: TreeBall, rng=None, max_pairs: int = 100_000,
                        all_pairs_limit: int = 2000) -> list[tuple[TreeVertex, TreeVertex]]:
    """All vertex pairs when the ball is small, otherwise max_pairs
    uniform draws.  Sample once and reuse across embedding families so
    family comparisons (the beta sweep) are paired, not re-sampled.
    """
    vertices = sorted(ball.vertex_dist, key=lambda v: (ball.vertex_dist[v], v.key))
    n = len(vertices)
    out: list[tuple[TreeVertex, TreeVertex]] = []
    if n <= all_pairs_limit:
        for i in range(n):
            for j in range(i + 1, n):
                out.append((vertices[i], vertices[j]))
        return out
    if rng is None:
        raise ValueError("sampling requires an rng for balls this large")
    while len(out) < max_pairs:
        i = rng.randrange(n)
        j = rng.randrange(n)
        if i != j:
            out.append((vertices[i], vertices[j]))
    return out


def pair_cloud(emb: TreeEmbedding, vertex_pairs) -> tuple[np.ndarray, np.ndarray]:
    ds: list[float] = []
    ys: list[float] = []
    for u, v in vertex_pairs:
        d, y = emb.pair(u, v)
        ds.append(d)
        ys.append(y)
    return np.asarray(ds, dtype=np.float64), np.asarray(ys, dtype=np.float64)


def tree_pair_cloud(emb: TreeEmbedding, rng=None, max_pairs: int = 100_000,
                    all_pairs_limit: int = 2000) -> tuple[np.ndarray, np.ndarray]:
    """(distance, image distance) arrays over vertex pairs."""
    return pair_cloud(emb, sample_vertex_pairs(emb.ball, rng, max_pairs, all_pairs_limit))


# -- group embedding -----------------------------------------------------------------


class GroupEmbedding:
    """Tree image of the coset vertex, concatenated with the semidirect
    coordinates: F(g) = f_tree(gZ^n) + scale * x-part + one slot for
    the stable-letter exponent, summed in l^p."""

    def __init__(self, p: float, tree_spec: EmbeddingSpec, ball: TreeBall,
                 x_scale: float = 1.0):
        self.p = p
        self.tree = TreeEmbedding(tree_spec, ball)
        self.x_scale = x_scale

    def exact_signature(self, g: GroupElement):
        v, k = j_N(g)
        return (g.syllables, v, k)

    def image_distance(self, g: GroupElement, h: GroupElement) -> float:
        from .bass_serre import vertex_of

        tu, tv = vertex_of(g), vertex_of(h)
        acc = self.tree.image_distance(tu, tv) ** self.p
        (vg, kg), (vh, kh) = j_N(g), j_N(h)
        for a, b in zip(vg, vh):
            acc += (self.x_scale * abs(float(a) - float(b))) ** self.p
        acc += abs(kg - kh) ** self.p
        return acc ** (1.0 / self.p)


def embed_group(p: float, tree_spec: EmbeddingSpec, ball: TreeBall,
                x_scale: float = 1.0) -> GroupEmbedding:
    return GroupEmbedding(p, tree_spec, ball, x_scale)


def group_pair_cloud(emb: GroupEmbedding, quotients: dict[GroupElement, int],
                     anchors: list[GroupElement], rng,
                     max_pairs: int = 20_000) -> tuple[np.ndarray, np.ndarray]:
    """(word distance, image distance) over translated element pairs.

    Pairs are (g, g q) for anchors g and ball elements q, so the word
    distance is the exact table length |q| and spans the full ball
    radius.  The embedding ball must contain the coset vertices of
    both factors (anchor radius + quotient radius).
    """
    from .group_core import multiply

    items = sorted(quotients, key=lambda g: (quotients[g], str(g.syllables), g.head))
    items = [g for g in items if quotients[g] > 0]
    n = len(items)
    ds: list[float] = []
    ys: list[float] = []
    while len(ds) < max_pairs:
        q = items[rng.randrange(n)]
        g = anchors[rng.randrange(len(anchors))]
        h = multiply(g, q)
        ds.append(quotients[q])
        ys.append(emb.image_distance(g, h))
    return np.asarray(ds, dtype=np.float64), np.asarray(ys, dtype=np.float64)


# -- exponent estimation ----------------------------------------------------------------


def _envelope_points(d: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per distinct distance, the minimal image distance."""
    order = np.lexsort((y, d))
    d_s, y_s = d[order], y[order]
    keep_first = np.ones(len(d_s), dtype=bool)
    keep_first[1:] = d_s[1:] != d_s[:-1]
    return d_s[keep_first], y_s[keep_first]


def _lower_hull(a: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lower convex hull of (a, y), a strictly increasing."""
    hx: list[float] = []
    hy: list[float] = []
    for xi, yi in zip(a, y):
        while len(hx) >= 2:
            cross = (hx[-1] - hx[-2]) * (yi - hy[-2]) - (xi - hx[-2]) * (hy[-1] - hy[-2])
            if cross <= 0:
                hx.pop()
                hy.pop()
            else:
                break
        hx.append(float(xi))
        hy.append(float(yi))
    return np.asarray(hx), np.asarray(hy)


def _octave_envelope(d_env: np.ndarray, y_env: np.ndarray,
                     d_min: float) -> tuple[np.ndarray, np.ndarray]:
    """One envelope point per distance octave: the minimal image
    distance in [d_min 2^j, d_min 2^(j+1)) with the d where it occurs."""
    octave = np.floor(np.log2(d_env / d_min) + 1e-12).astype(np.int64)
    pts_d: list[float] = []
    pts_y: list[float] = []
    for j in np.unique(octave):
        sel = octave == j
        i = int(np.argmin(np.where(sel, y_env, np.inf)))
        pts_d.append(float(d_env[i]))
        pts_y.append(float(y_env[i]))
    return np.asarray(pts_d), np.asarray(pts_y)


def estimate_exponent(pairs, alpha_step: float = ALPHA_GRID_STEP,
                      theta: float = ANCHOR_TIGHTNESS,
                      min_pairs: int = 50, min_span: float = 8.0) -> ExponentEstimate:
    """Log-log lower-envelope regression over a pair cloud.

    pairs: iterable of (distance, image_distance) or a pair of arrays.
    alpha_hat is the least-squares slope through the octave envelope
    in log-log coordinates, snapped to the alpha grid and clipped to
    [0, 1]; (C_hat, D_hat) is the maximal valid envelope at that
    exponent whose offset is the least one achieving theta-tightness
    at the largest-distance envelope point.
    """
    if isinstance(pairs, tuple) and len(pairs) == 2:
        d = np.asarray(pairs[0], dtype=np.float64)
        y = np.asarray(pairs[1], dtype=np.float64)
    else:
        arr = np.asarray(list(pairs), dtype=np.float64)
        if arr.size == 0:
            raise InsufficientRange("no pairs given")
        d, y = arr[:, 0], arr[:, 1]
    mask = d > 0
    d, y = d[mask], y[mask]
    if len(d) < min_pairs:
        raise InsufficientRange(f"need at least {min_pairs} pairs with positive distance")
    d_min, d_max = float(np.min(d)), float(np.max(d))
    if d_max / d_min < min_span:
        raise InsufficientRange(f"distance span {d_max / d_min:.2f} below {min_span}")
    if np.max(y) <= 0:
        raise NoValidEnvelope("all image distances vanish")

    d_env, y_env = _envelope_points(d, y)
    oct_d, oct_y = _octave_envelope(d_env, y_env, d_min)
    pos = oct_y > 0
    if int(np.sum(pos)) < 2:
        raise NoValidEnvelope("envelope vanishes on all but one octave")
    lx, ly = np.log(oct_d[pos]), np.log(oct_y[pos])
    lx = lx - lx.mean()
    slope = float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))
    alpha_hat = min(1.0, max(0.0, round(slope / alpha_step) * alpha_step))

    # constants at alpha_hat: C max over valid envelopes, D the least
    # offset making C d^a - D reach theta * y at the far envelope point
    a_env = d_env ** alpha_hat
    hx, hy = _lower_hull(a_env, y_env)

    def c_max(D: float) -> float:
        return float(np.min((hy + D) / hx))

    a_last, y_last = float(a_env[-1]), float(y_env[-1])

    def tight(D: float) -> float:
        # nondecreasing in D: the binding hull slope never exceeds a_last
        return c_max(D) * a_last - D - theta * y_last

    if tight(0.0) >= 0:
        D_hat = 0.0
    else:
        hi = 1.0 + float(np.max(y_env))
        for _ in range(60):
            if tight(hi) >= 0:
                break
            hi *= 2.0
        lo = 0.0
        for _ in range(100):
            mid = (lo + hi) / 2.0
            if tight(mid) >= 0:
                hi = mid
            else:
                lo = mid
        D_hat = hi
    C_hat = c_max(D_hat)
    if C_hat <= 0:
        raise NoValidEnvelope("no positive envelope constant at the fitted exponent")
    # numerical guard, then hard validity on every pair
    C_hat *= 1.0 - 1e-12
    assert np.all(C_hat * d ** alpha_hat - D_hat <= y + 1e-9), "envelope violates a pair"
    A_hat = float(np.max(y / d))
    B_hat = 0.0
    assert np.all(y <= A_hat * d + B_hat + 1e-9)
    return ExponentEstimate(
        alpha_hat=float(alpha_hat),
        C_hat=float(C_hat),
        D_hat=float(D_hat),
        A_hat=A_hat,
        B_hat=B_hat,
        pair_count=int(len(d)),
        distance_range=(d_min, d_max),
    )


def compose_min(a1, a2):
    """Compression of a product is the minimum of the factors."""
    return min(a1, a2)
