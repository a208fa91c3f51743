"""Fibre product of the tree with the warped space, and its two metrics.

M is the set of pairs (tree point, warped point) whose heights agree.
It carries the restriction d of the product metric (tree distance plus
strip distance) and the induced shortest-path metric d_M >= d.  The
bilipschitz comparison is witnessed constructively: between any two
fibre points we build the explicit two-stage path

  stage 1: run the tree geodesic while the warped component rides the
           vertical line above the start projection (stays in M since
           both heights follow the tree height);
  stage 2: run a warped-space geodesic while the tree component rides
           a height-monotone ray through the far tree endpoint.

Stage 1 costs exactly twice the tree distance and stage 2 at most
twice the warped distance of its endpoints, which assembles into the
factor-4 comparison checked by the verification suite.

The module also hosts the group side of the story: the diagonal
action, the fundamental-domain normalization behind cocompactness, a
finite injectivity/displacement certificate for properness, and the
orbit fit that extracts explicit quasi-isometry constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .bass_serre import (
    AscendingRay,
    TreeBall,
    TreePoint,
    act_point,
    act_vertex,
    base_vertex,
    geodesic_sigma,
    height_c,
    tree_distance,
    vertex_element,
    vertex_of,
)
from .errors import FibreMismatch, OutsideBall, PathEscapesWindow
from .group_core import (
    GroupElement,
    ball as group_ball,
    from_vector,
    inverse,
    j_N,
    multiply,
)
from .presentation import Presentation
from .y_space import YModel, YPoint, act_y, height_b, y_distance, y_geodesic

FIBRE_TOL = 1e-9


@dataclass(frozen=True)
class MPoint:
    tree: TreePoint
    y: YPoint


def make_mpoint(tree: TreePoint, y: YPoint, tol: float = FIBRE_TOL) -> MPoint:
    gap = abs(height_c(tree) - height_b(y))
    if gap > tol:
        raise FibreMismatch(f"height gap {gap} exceeds {tol}")
    return MPoint(tree, y)


def base_mpoint(pres: Presentation) -> MPoint:
    return MPoint(TreePoint.at_vertex(base_vertex(pres)),
                  YPoint((0.0,) * pres.n, 0.0))


def act_m(g: GroupElement, m: MPoint,
          ball: Optional[TreeBall] = None, model: Optional[YModel] = None) -> MPoint:
    """Diagonal action; the fibre constraint is preserved exactly since
    both heights shift by the t-exponent of g."""
    tree = act_point(g, m.tree)
    y = act_y(g, m.y)
    if ball is not None:
        ball.require_point(tree)
    if model is not None:
        model.require(y)
    return MPoint(tree, y)


def product_distance(m0: MPoint, m1: MPoint, ball: TreeBall, model: YModel,
                     cache: bool = False) -> tuple[float, float]:
    """(lower, upper) for d = d_T + d_Y; the bracket is the warped one."""
    dt = tree_distance(m0.tree, m1.tree, ball)
    ylo, yup = y_distance(m0.y, m1.y, model, cache=cache)
    return dt + ylo, dt + yup


# -- the two-stage connecting path ------------------------------------------------


@dataclass
class MArc:
    """One parametrized arc of a fibre path.

    point_at takes the arc's own parameter in [0, param_hi]; length is
    measured in the product metric (tree speed plus warped speed).
    """

    name: str
    length: float
    param_hi: float
    point_at: Optional[Callable[[float], MPoint]]

    def sample(self, k: int) -> list[MPoint]:
        if self.point_at is None or self.param_hi == 0:
            return []
        return [self.point_at(self.param_hi * i / k) for i in range(k + 1)]


class MPath:
    def __init__(self, arcs: list[MArc], y2: Optional[YPoint]):
        self.arcs = arcs
        self.y2 = y2
        self.total_length = sum(a.length for a in arcs)

    @property
    def theta1_length(self) -> float:
        return self.arcs[0].length if self.arcs else 0.0

    @property
    def theta2_length(self) -> float:
        return self.arcs[1].length if len(self.arcs) > 1 else 0.0

    def max_fibre_gap(self, samples_per_arc: int = 32) -> float:
        gap = 0.0
        for arc in self.arcs:
            for p in arc.sample(samples_per_arc):
                gap = max(gap, abs(height_c(p.tree) - height_b(p.y)))
        return gap


def connect_theta(m0: MPoint, m1: MPoint, ball: TreeBall, model: YModel,
                  realize: bool = True) -> MPath:
    """Explicit fibre path from m0 to m1.

    Stage 1 follows the tree geodesic sigma and lifts its height to the
    vertical line over m0's warped projection, ending above the point
    y2 = (x-projection of y0, height of x1).  Stage 2 follows a warped
    geodesic from y2 to y1 and drags the tree component along a
    height-monotone ray through x1.

    realize=False skips building the stage-2 tree ray (lengths are
    unchanged; per-point sampling of stage 2 becomes unavailable).
    Raises PathEscapesWindow when the ray needs vertices outside the
    ball.
    """
    if m0.tree == m1.tree and m0.y == m1.y:
        return MPath([], None)
    sigma = geodesic_sigma(m0.tree, m1.tree, ball)
    d_t = sigma.length
    y0 = m0.y
    c1 = height_c(m1.tree)
    y2 = YPoint(y0.x, c1)

    def theta1_at(u: float) -> MPoint:
        tp = sigma.point_at(u) if d_t > 0 else m0.tree
        return MPoint(tp, YPoint(y0.x, height_c(tp)))

    arc1 = MArc("theta1", 2.0 * d_t, d_t, theta1_at if d_t > 0 else None)

    tilde = y_geodesic(y2, m1.y, model)
    tv = tilde.vertical_variation()
    length2 = tilde.length + tv
    if realize and not tilde.is_empty():
        lo = min(p.s for p in tilde.points) - c1
        hi = max(p.s for p in tilde.points) - c1
        try:
            ray = AscendingRay(m1.tree, min(lo, 0.0), max(hi, 0.0), ball)
        except OutsideBall as exc:
            raise PathEscapesWindow(str(exc)) from exc

        def theta2_at(t: float) -> MPoint:
            yp = tilde.point_at(t)
            return MPoint(ray.point_at(yp.s - c1), yp)

        arc2 = MArc("theta2", length2, tilde.length, theta2_at)
    else:
        arc2 = MArc("theta2", length2, tilde.length, None)
    return MPath([arc1, arc2], y2)


def dM_upper(m0: MPoint, m1: MPoint, ball: TreeBall, model: YModel,
             realize: bool = False) -> float:
    """Length of the explicit fibre path: an upper bound for the induced
    shortest-path metric, never below the product-metric lower bound."""
    return connect_theta(m0, m1, ball, model, realize=realize).total_length


# -- cocompactness: fundamental-domain normalization -----------------------------


def normalize_to_fundamental_domain(m: MPoint, ball: TreeBall) -> tuple[GroupElement, MPoint]:
    """Translate m into the compact window over the star of the base vertex.

    Output m' = g . m satisfies: the tree component is the base vertex
    or an interior point of an edge leaving the base vertex; the warped
    height lies in [0, 1]; the warped x-coordinate lies in [0, 1)^n.
    Vertex inputs land on the base vertex itself.  When m is already in
    the window, g is the identity.

    The edge cannot be pinned down further: the full stabilizer of one
    edge translates x only by the image sublattice of the stable
    letter, so a unit x-cell forces the edge to range over the whole
    outgoing star.
    """
    pres = ball.pres
    if m.tree.vertex is not None:
        g1 = inverse(vertex_element(pres, m.tree.vertex))
    else:
        e = m.tree.edge
        g_e = GroupElement(pres, e.key[0], e.key[1])
        t_el = _stable_letter(pres)
        g1 = multiply(t_el, inverse(g_e))
    y1 = act_y(g1, m.y)
    shift = tuple(-int(math.floor(v)) for v in y1.x)
    g = multiply(from_vector(pres, shift), g1)
    m2 = act_m(g, m, ball=ball)
    # window checks are exact: floor arithmetic puts x in [0,1)^n
    if not all(0.0 <= v < 1.0 for v in m2.y.x):
        raise AssertionError("normalization missed the unit cell")
    if not (-FIBRE_TOL <= height_b(m2.y) <= 1.0 + FIBRE_TOL):
        raise AssertionError("normalized height outside [0,1]")
    if m2.tree.vertex is None and m2.tree.edge.source != base_vertex(pres):
        raise AssertionError("normalized edge does not leave the base vertex")
    return g, m2


def _stable_letter(pres: Presentation) -> GroupElement:
    from .group_core import generators

    return generators(pres)[-2]


# -- properness certificate --------------------------------------------------------


def properness_probe(radius: int, pres: Presentation, ball: TreeBall, model: YModel,
                     signature_radius: int = 2) -> dict:
    """Finite certificate for properness of the diagonal action.

    (i) injectivity: the pair (semidirect image, tree action restricted
    to a small vertex ball) separates all group elements of the ball;
    (ii) displacement growth: the smallest product-metric displacement
    of the base fibre point among elements of word length r does not
    decrease with r.
    """
    elements = group_ball(pres, radius)
    sig_ball = TreeBall(pres, signature_radius)
    sig_vertices = sorted(sig_ball.vertex_dist, key=lambda v: v.key)
    seen: dict = {}
    collisions = 0
    for g in elements:
        jn = j_N(g)
        action = tuple(act_vertex(g, v).key for v in sig_vertices)
        key = (jn, action)
        if key in seen:
            collisions += 1
        else:
            seen[key] = g
    base_m = base_mpoint(pres)
    min_disp: dict[int, float] = {}
    for g, r in elements.items():
        if r == 0:
            continue
        mg = act_m(g, base_m, ball=ball, model=model)
        lo, _ = product_distance(base_m, mg, ball, model, cache=True)
        if r not in min_disp or lo < min_disp[r]:
            min_disp[r] = float(lo)
    by_length = [round(min_disp[r], 12) for r in sorted(min_disp)]
    monotone = all(a <= b + 1e-9 for a, b in zip(by_length, by_length[1:]))
    return {
        "radius": radius,
        "elements": len(elements),
        "collisions": collisions,
        "min_displacement_by_length": by_length,
        "displacement_nondecreasing": monotone,
    }


# -- quasi-isometry constants from the orbit map -----------------------------------


@dataclass(frozen=True)
class QIFit:
    """Affine two-sided comparison between word length and fibre metrics.

    Valid on every enumerated sample:
      dM_upper  <= A_upper * |g| + B_upper
      d_lower   >= a_lower * |g| + b_lower
    Intercepts are pinned to zero so the identity sample (0, 0) is
    admitted and the slopes are the extremal ratios; a_lower > 0 is
    the success signal.
    """

    A_upper: float
    B_upper: float
    a_lower: float
    b_lower: float
    sample_count: int


def orbit_qi_fit(radius: int, pres: Presentation, ball: TreeBall, model: YModel) -> QIFit:
    elements = group_ball(pres, radius)
    base_m = base_mpoint(pres)
    a_low = math.inf
    a_up = 0.0
    count = 0
    for g, r in elements.items():
        count += 1
        if r == 0:
            continue
        mg = act_m(g, base_m, ball=ball, model=model)
        lo, _ = product_distance(base_m, mg, ball, model, cache=True)
        dm = dM_upper(base_m, mg, ball, model)
        a_up = max(a_up, float(dm) / r)
        a_low = min(a_low, float(lo) / r)
    if not math.isfinite(a_low):
        a_low = 0.0
    return QIFit(A_upper=a_up, B_upper=0.0, a_lower=a_low, b_lower=0.0,
                 sample_count=count)


# -- sampling and the lemma experiment ---------------------------------------------


def orbit_x_bound(elements) -> float:
    """Largest |x|-coordinate of the semidirect images of the elements."""
    out = 0.0
    for g in elements:
        v, _ = j_N(g)
        for c in v:
            out = max(out, abs(float(c)))
    return out


def sample_m_point(pres: Presentation, ball: TreeBall, model: YModel, rng,
                   elements: list, u_step: float = 0.25, x_jitter: float = 1.0) -> MPoint:
    """Random fibre point anchored at an orbit vertex.

    Tree part: a vertex of the sample set or an interior point of an
    incident edge at a u_step-aligned offset.  Warped part: the exact
    tree height over an x-coordinate drawn from the grid lattice, so
    every sampled point snaps to a node with zero cost and all the
    verification inequalities hold without snapping slack.
    """
    h = model.h
    for _ in range(256):
        g = rng.choice(elements)
        v = vertex_of(g)
        if v not in ball.vertex_dist:
            continue
        if rng.random() < 0.3:
            tree = TreePoint.at_vertex(v)
        else:
            edges = ball.adjacency.get(v)
            if not edges:
                continue
            e = rng.choice(sorted(edges, key=lambda ed: str(ed.key)))
            u = rng.randrange(0, int(round(1.0 / u_step))) * u_step
            tree = TreePoint.on_edge(e, u)
        c = height_c(tree)
        # exact-height rows need c to be a grid multiple
        if abs(round(c / h) * h - c) > 1e-9:
            continue
        jx, _ = j_N(g)
        x = []
        ok = True
        for a in range(pres.n):
            base = round(float(jx[a]) / h) * h
            jit = rng.randrange(-int(x_jitter / h), int(x_jitter / h) + 1) * h
            val = base + jit
            if not (model.x_lo[a] + h <= val <= model.x_hi[a] - h):
                ok = False
                break
            x.append(val)
        if not ok:
            continue
        p = YPoint(tuple(x), c)
        if not model.contains(p) or not (model.s_lo + h <= c <= model.s_hi - h):
            continue
        return MPoint(tree, p)
    raise RuntimeError("could not sample an in-window fibre point")


def mpoint_from_fields(pres: Presentation, ball: TreeBall, word: str, u: float, x) -> MPoint:
    """Inverse of the CSV serialization used by the batch interface."""
    from .group_core import reduce_string
    from .bass_serre import edge_of

    g = reduce_string(pres, word if word != "e" else "")
    u = float(u)
    if u == 0.0:
        tree = TreePoint.at_vertex(vertex_of(g))
    else:
        tree = TreePoint.on_edge(edge_of(g), u)
    y = YPoint(tuple(float(v) for v in x), height_c(tree))
    ball.require_point(tree)
    return make_mpoint(tree, y)


def _mpoint_fields(pres: Presentation, m: MPoint) -> tuple:
    from .group_core import to_string

    if m.tree.vertex is not None:
        word = to_string(GroupElement(pres, m.tree.vertex.key, (0,) * pres.n))
        u = 0.0
    else:
        e = m.tree.edge
        word = to_string(GroupElement(pres, e.key[0], e.key[1]))
        u = m.tree.u
    return (word, u, *m.y.x)


def lemma_experiment(pres: Presentation, tree_radius: int, grid_step: float,
                     s_max: float, n_pairs: int, seed: int,
                     x_margin: float = 2.0, fibre_samples: int = 24,
                     pairs: Optional[list[tuple[MPoint, MPoint]]] = None) -> dict:
    """Sample fibre pairs and verify the two-metric comparison.

    Checks, per pair: product lower <= path length; path length <=
    4 (1 + kappa) * product upper; stage-1 length <= 2 d_T; stage-2
    length <= 2 * warped distance of its endpoints; every sampled path
    point closes the fibre constraint.  Returns the report dict (with
    per-pair records under "pairs_detail"); a nonzero violation count
    is the caller's exit signal.  Explicit pairs replace sampling.
    """
    import random

    rng = random.Random(seed)
    ball, model, elements = _lemma_setup(pres, tree_radius, grid_step, s_max, x_margin)
    kappa = model.kappa
    u_step = grid_step * max(1, round(0.25 / grid_step))

    ratios = []
    violations = {"d_le_dM": 0, "four_bound": 0, "theta1": 0, "theta2": 0, "fibre": 0}
    informative = 0
    pairs_done = 0
    records = []
    supplied = iter(pairs) if pairs is not None else None
    total = n_pairs if pairs is None else len(pairs)
    while pairs_done < total:
        if supplied is None:
            m0 = sample_m_point(pres, ball, model, rng, elements, u_step=u_step)
            m1 = sample_m_point(pres, ball, model, rng, elements, u_step=u_step)
        else:
            m0, m1 = next(supplied)
        pairs_done += 1
        lo, up = product_distance(m0, m1, ball, model)
        path = connect_theta(m0, m1, ball, model, realize=True)
        dm = path.total_length
        if dm < lo - 1e-9:
            violations["d_le_dM"] += 1
        if dm > 4.0 * (1.0 + kappa) * up + 1e-9:
            violations["four_bound"] += 1
        d_t = tree_distance(m0.tree, m1.tree, ball)
        if path.theta1_length > 2.0 * d_t + 1e-9:
            violations["theta1"] += 1
        if path.y2 is not None:
            _, yup22 = y_distance(path.y2, m1.y, model)
            if path.theta2_length > 2.0 * yup22 + 1e-9:
                violations["theta2"] += 1
        if path.max_fibre_gap(fibre_samples) > FIBRE_TOL:
            violations["fibre"] += 1
        if up > 1e-9:
            ratios.append(dm / up)
            informative += 1
        records.append((*_mpoint_fields(pres, m0), *_mpoint_fields(pres, m1),
                        d_t, float(lo), float(up), float(dm),
                        float(dm / up) if up > 1e-9 else ""))
    report = {
        "pairs": pairs_done,
        "informative_pairs": informative,
        "kappa": kappa,
        "grid_step": grid_step,
        "tree_radius": tree_radius,
        "seed": seed,
        "violations": violations,
        "ratio_min": min(ratios) if ratios else None,
        "ratio_max": max(ratios) if ratios else None,
        "ratio_mean": sum(ratios) / len(ratios) if ratios else None,
        "bound_4_1pk": 4.0 * (1.0 + kappa),
        "pairs_detail": records,
    }
    report["ok"] = all(v == 0 for v in violations.values())
    return report


def _lemma_setup(pres: Presentation, tree_radius: int, grid_step: float,
                 s_max: float, x_margin: float = 2.0):
    work_radius = int(tree_radius + math.ceil(s_max) + 2)
    ball = TreeBall(pres, work_radius)
    elements = sorted(group_ball(pres, tree_radius),
                      key=lambda g: (len(g.syllables), str(g.syllables), g.head))
    xb = orbit_x_bound(elements) + x_margin
    model = YModel(pres, grid_step, (-xb, xb), (-s_max, s_max))
    return ball, model, elements


def lemma_scene(pres: Presentation, tree_radius: int, grid_step: float,
                s_max: float, x_margin: float = 2.0) -> tuple[TreeBall, YModel]:
    """The (ball, model) pair used by lemma_experiment, for callers that
    deserialize explicit pairs against the same window."""
    ball, model, _ = _lemma_setup(pres, tree_radius, grid_step, s_max, x_margin)
    return ball, model
