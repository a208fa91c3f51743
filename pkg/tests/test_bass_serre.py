import random

import pytest

from hnngeo.bass_serre import (
    TreeBall,
    TreePoint,
    act_edge,
    act_point,
    act_vertex,
    ascending_ray_beta,
    base_vertex,
    edge_of,
    geodesic_sigma,
    height_c,
    neighbors,
    tree_distance,
    vertex_element,
    vertex_of,
)
from hnngeo.errors import OutsideBall
from hnngeo.group_core import random_element, reduce_string, t_exponent

from oracles import lattice_index


def test_vertex_of_cosets(bs12):
    assert vertex_of(reduce_string(bs12, "x^7")) == base_vertex(bs12)
    assert vertex_of(reduce_string(bs12, "x t")) == vertex_of(reduce_string(bs12, "x t x^5"))
    assert vertex_of(reduce_string(bs12, "t")) != base_vertex(bs12)


def test_degrees_against_coset_census(bs12, bs23, abc):
    """Interior degree must match the independent lattice census."""
    for pres in (bs12, bs23, abc):
        expected = lattice_index(pres.m1) + lattice_index(pres.m2)
        edges = neighbors(pres, base_vertex(pres))
        assert len(edges) == expected
        incoming = [e for e in edges if e.target == base_vertex(pres)]
        outgoing = [e for e in edges if e.source == base_vertex(pres)]
        assert len(incoming) == lattice_index(pres.m1)
        assert len(outgoing) == lattice_index(pres.m2)


def test_edge_orientation_heights(bs23):
    for e in neighbors(bs23, base_vertex(bs23)):
        assert e.target.height() == e.source.height() + 1


def test_ball_is_tree(bs12, bs23, abc):
    for pres, radius in ((bs12, 5), (bs23, 4), (abc, 5)):
        ball = TreeBall(pres, radius)
        assert len(ball.edges) == len(ball.vertex_dist) - 1
        expected = pres.index1() + pres.index2()
        for v in ball.interior_vertices():
            assert ball.degree(v) == expected


def test_heights(bs12, ball12):
    base = base_vertex(bs12)
    assert height_c(TreePoint.at_vertex(base)) == 0.0
    vt = vertex_of(reduce_string(bs12, "t"))
    assert height_c(TreePoint.at_vertex(vt)) == 1.0
    e = edge_of(reduce_string(bs12, "t"))
    assert height_c(TreePoint.on_edge(e, 0.5)) == 0.5


def test_height_equivariance(bs12, ball12):
    rng = random.Random(7)
    verts = sorted(ball12.vertex_dist, key=lambda v: v.key)
    edges = sorted(ball12.edges.values(), key=lambda e: str(e.key))
    for _ in range(300):
        g = random_element(bs12, 5, rng)
        v = rng.choice(verts)
        assert act_vertex(g, v).height() == v.height() + t_exponent(g)
        e = rng.choice(edges)
        p = TreePoint.on_edge(e, rng.choice((0.25, 0.5, 0.75)))
        assert height_c(act_point(g, p)) == height_c(p) + t_exponent(g)


def test_action_is_graph_morphism(bs12, ball12):
    rng = random.Random(8)
    edges = sorted(ball12.edges.values(), key=lambda e: str(e.key))
    for _ in range(200):
        g = random_element(bs12, 4, rng)
        e = rng.choice(edges)
        e2 = act_edge(g, e)
        assert e2.source == act_vertex(g, e.source)
        assert e2.target == act_vertex(g, e.target)


def test_action_composes(bs12, ball12):
    rng = random.Random(9)
    from hnngeo.group_core import multiply

    verts = sorted(ball12.vertex_dist, key=lambda v: v.key)
    for _ in range(200):
        g = random_element(bs12, 4, rng)
        h = random_element(bs12, 4, rng)
        v = rng.choice(verts)
        assert act_vertex(multiply(g, h), v) == act_vertex(g, act_vertex(h, v))
    assert act_vertex(reduce_string(bs12, ""), verts[0]) == verts[0]


def test_tree_distance_examples(bs12, ball12):
    base = TreePoint.at_vertex(base_vertex(bs12))
    assert tree_distance(base, base, ball12) == 0.0
    vt = TreePoint.at_vertex(vertex_of(reduce_string(bs12, "t")))
    assert tree_distance(base, vt, ball12) == 1.0
    a = TreePoint.at_vertex(vertex_of(reduce_string(bs12, "t x t")))
    b = TreePoint.at_vertex(vertex_of(reduce_string(bs12, "t t")))
    assert tree_distance(a, b, ball12) == 2.0  # frozen from BFS on the ball


def test_distance_is_metric(bs12, ball12):
    rng = random.Random(10)
    verts = sorted(ball12.vertex_dist, key=lambda v: v.key)
    pts = []
    edges = sorted(ball12.edges.values(), key=lambda e: str(e.key))
    for _ in range(25):
        pts.append(TreePoint.at_vertex(rng.choice(verts)))
        pts.append(TreePoint.on_edge(rng.choice(edges), rng.uniform(0.1, 0.9)))
    for a in pts[:12]:
        for b in pts[:12]:
            dab = tree_distance(a, b, ball12)
            assert abs(dab - tree_distance(b, a, ball12)) < 1e-12
            assert (dab == 0) == (a == b)
            for c in pts[:8]:
                assert dab <= tree_distance(a, c, ball12) + tree_distance(c, b, ball12) + 1e-9


def test_geodesic_matches_distance(bs12, ball12):
    rng = random.Random(11)
    verts = sorted(ball12.vertex_dist, key=lambda v: v.key)
    edges = sorted(ball12.edges.values(), key=lambda e: str(e.key))
    for _ in range(150):
        if rng.random() < 0.5:
            a = TreePoint.at_vertex(rng.choice(verts))
        else:
            a = TreePoint.on_edge(rng.choice(edges), rng.uniform(0.05, 0.95))
        if rng.random() < 0.5:
            b = TreePoint.at_vertex(rng.choice(verts))
        else:
            b = TreePoint.on_edge(rng.choice(edges), rng.uniform(0.05, 0.95))
        path = geodesic_sigma(a, b, ball12)
        d = tree_distance(a, b, ball12)
        assert abs(path.length - d) < 1e-9
        if path.length > 0:
            # unit speed
            s1, s2 = 0.3 * path.length, 0.8 * path.length
            dd = tree_distance(path.point_at(s1), path.point_at(s2), ball12)
            assert abs(dd - (s2 - s1)) < 1e-9


def test_geodesic_trivial_cases(bs12, ball12):
    base = TreePoint.at_vertex(base_vertex(bs12))
    assert geodesic_sigma(base, base, ball12).length == 0.0
    vt = TreePoint.at_vertex(vertex_of(reduce_string(bs12, "t")))
    path = geodesic_sigma(base, vt, ball12)
    assert path.length == 1.0 and len(path.segments) == 1


def test_action_is_isometry(bs12, ball12):
    rng = random.Random(12)
    verts = [v for v, d in ball12.vertex_dist.items() if d <= 4]
    verts.sort(key=lambda v: v.key)
    for _ in range(100):
        g = random_element(bs12, 3, rng)
        a, b = rng.choice(verts), rng.choice(verts)
        ga, gb = act_vertex(g, a), act_vertex(g, b)
        if ga in ball12.vertex_dist and gb in ball12.vertex_dist:
            assert ball12.vertex_distance(ga, gb) == ball12.vertex_distance(a, b)


def test_ascending_ray(bs12, ball12):
    base = TreePoint.at_vertex(base_vertex(bs12))
    ray = ascending_ray_beta(base, -2.0, 2.0, ball12)
    assert vertex_element(bs12, ray.point_at(1.0).vertex) == reduce_string(bs12, "t")
    assert vertex_element(bs12, ray.point_at(-1.0).vertex) == reduce_string(bs12, "t^-1")
    for k in range(101):
        u = -2.0 + 4.0 * k / 100
        assert abs(height_c(ray.point_at(u)) - u) < 1e-9
    e = edge_of(reduce_string(bs12, "t"))
    mid = TreePoint.on_edge(e, 0.5)
    ray2 = ascending_ray_beta(mid, -1.5, 1.5, ball12)
    for u in (-1.5, -0.5, 0.0, 0.25, 1.5):
        assert abs(height_c(ray2.point_at(u)) - (0.5 + u)) < 1e-9


def test_ray_escapes_ball(bs12):
    small = TreeBall(bs12, 1)
    base = TreePoint.at_vertex(base_vertex(bs12))
    with pytest.raises(OutsideBall):
        ascending_ray_beta(base, -3.0, 3.0, small)


def test_outside_ball_checks(bs12, ball12):
    far = vertex_of(reduce_string(bs12, "t^20"))
    with pytest.raises(OutsideBall):
        tree_distance(TreePoint.at_vertex(far),
                      TreePoint.at_vertex(base_vertex(bs12)), ball12)


def test_export_rows(bs12):
    ball = TreeBall(bs12, 2)
    rows = ball.export_edge_rows()
    assert len(rows) == len(ball.edges)
    assert all(len(r) == 3 for r in rows)
    assert rows == sorted(rows)
    # keys parse back through the word parser
    from hnngeo.group_core import reduce_string as rs

    for s, t, c in rows[:5]:
        ta = rs(bs12, s if s != "e" else "")
        tb = rs(bs12, t if t != "e" else "")
        assert vertex_of(tb).height() == c + 1 or vertex_of(ta).height() == c
