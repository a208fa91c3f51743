"""Acceptance suite: one test per verification criterion.

Each criterion prints a [PASS]/[FAIL] line with its runtime and is
held to an explicit wall-clock budget.  Tolerances are fixed here,
not tuned: exact equality where the arithmetic is exact (group laws,
heights, fibre constraints), stated numeric tolerances for the
discretized metric comparisons and exponent estimates.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines.
"""

import random
import time
from contextlib import contextmanager

import numpy as np

from hnngeo.bass_serre import TreeBall, TreePoint, act_point, base_vertex
from hnngeo.compression import (
    EmbeddingSpec,
    compose_min,
    embed_tree,
    estimate_exponent,
    pair_cloud,
    sample_vertex_pairs,
)
from hnngeo.group_core import (
    affine_of_word,
    affine_oracle,
    ball as group_ball,
    britton_reduce,
    identity,
    inverse,
    multiply,
    random_element,
    random_word,
    t_exponent,
)
from hnngeo.millefeuille import (
    act_m,
    lemma_experiment,
    make_mpoint,
    normalize_to_fundamental_domain,
    orbit_qi_fit,
    orbit_x_bound,
    properness_probe,
    sample_m_point,
)
from hnngeo.presentation import preset
from hnngeo.y_space import YModel, YPoint, act_y, height_b, y_distance

from oracles import lattice_index


@contextmanager
def criterion(number: int, label: str, budget_s: float):
    t0 = time.time()
    try:
        yield
    except BaseException:
        print(f"[FAIL] criterion {number}: {label} ({time.time() - t0:.1f}s)")
        raise
    elapsed = time.time() - t0
    verdict = "PASS" if elapsed < budget_s else "FAIL"
    print(f"[{verdict}] criterion {number}: {label} "
          f"({elapsed:.1f}s < {budget_s:.0f}s budget)")
    assert elapsed < budget_s, f"runtime {elapsed:.1f}s exceeds {budget_s}s"


def test_criterion_1_normal_forms():
    with criterion(1, "Britton normal forms vs affine oracle", 10.0):
        for name in ("bs:1:2", "bs:1:3"):
            pres = preset(name)
            rng = random.Random(101)
            by_image = {}
            for _ in range(1000):
                w = random_word(pres, rng.randrange(1, 13), rng)
                g = britton_reduce(pres, w)
                img = affine_of_word(pres, w)
                assert affine_oracle(g) == img
                if img in by_image:
                    assert by_image[img] == g, "equal oracle image, distinct forms"
                else:
                    by_image[img] = g
            forms = set(by_image.values())
            assert len(forms) == len(by_image), "distinct images, equal forms"
            # group axioms, exact
            for _ in range(200):
                a = random_element(pres, 8, rng)
                b = random_element(pres, 8, rng)
                c = random_element(pres, 8, rng)
                assert multiply(multiply(a, b), c) == multiply(a, multiply(b, c))
                assert multiply(a, inverse(a)) == identity(pres)
                assert multiply(identity(pres), a) == a


def test_criterion_2_bass_serre_structure():
    with criterion(2, "tree balls and vertex degrees", 30.0):
        cases = [("bs:1:2", 3), ("bs:2:3", 5), ("abc:2:2,1;1,1", 2)]
        for name, expected_degree in cases:
            pres = preset(name)
            # independent census before asserting
            oracle_degree = lattice_index(pres.m1) + lattice_index(pres.m2)
            assert oracle_degree == expected_degree
            for radius in range(1, 6):
                ball = TreeBall(pres, radius)
                assert len(ball.edges) == len(ball.vertex_dist) - 1
                # connected: BFS from the center reaches every vertex
                parents = ball.vertex_paths_from(ball.center)
                assert len(parents) == len(ball.vertex_dist) - 1
                for v in ball.interior_vertices():
                    assert ball.degree(v) == oracle_degree


def test_criterion_3_equivariance_exact():
    with criterion(3, "height equivariance and fibre preservation", 60.0):
        pres = preset("bs:1:2")
        ball = TreeBall(pres, 8)
        rng = random.Random(103)
        verts = sorted(ball.vertex_dist, key=lambda v: v.key)
        edges = sorted(ball.edges.values(), key=lambda e: str(e.key))
        for _ in range(1000):
            g = random_element(pres, 5, rng)
            if rng.random() < 0.5:
                p = TreePoint.at_vertex(rng.choice(verts))
            else:
                p = TreePoint.on_edge(rng.choice(edges), rng.choice((0.25, 0.5, 0.75)))
            from hnngeo.bass_serre import height_c

            assert height_c(act_point(g, p)) == height_c(p) + t_exponent(g)
        for _ in range(1000):
            g = random_element(pres, 6, rng)
            y = YPoint.of(rng.uniform(-5, 5), rng.uniform(-3, 3))
            assert height_b(act_y(g, y)) == height_b(y) + t_exponent(g)
        model = YModel(pres, 0.1, (-40.0, 40.0), (-9.0, 9.0))
        elements = sorted(group_ball(pres, 4),
                          key=lambda g: (len(g.syllables), str(g.syllables), g.head))
        checked = 0
        while checked < 500:
            m = sample_m_point(pres, ball, model, rng, elements)
            g = rng.choice(elements)
            try:
                out = act_m(g, m, ball=ball, model=model)
            except Exception:
                continue
            make_mpoint(out.tree, out.y, tol=0.0)
            checked += 1


def test_criterion_4_lemma_discretized():
    with criterion(4, "two-metric comparison at radius 5, h = 0.05", 300.0):
        pres = preset("bs:1:2")
        report = lemma_experiment(pres, tree_radius=5, grid_step=0.05,
                                  s_max=6.0, n_pairs=300, seed=104)
        assert report["kappa"] <= 0.15
        assert report["pairs"] >= 300
        v = report["violations"]
        assert v["d_le_dM"] == 0, "product lower exceeded the path length"
        assert v["four_bound"] == 0, "path length exceeded 4(1+kappa) product"
        assert v["theta1"] == 0, "stage 1 exceeded twice the tree distance"
        assert v["theta2"] == 0, "stage 2 exceeded twice its warped distance"
        assert v["fibre"] == 0, "a sampled path point left the fibre"
        assert report["ratio_max"] <= 4 * (1 + report["kappa"]) + 1e-9


def test_criterion_5_y_metric_sanity():
    with criterion(5, "vertical convergence and action near-isometry", 120.0):
        pres = preset("bs:1:2")
        uppers = []
        for h in (0.2, 0.1, 0.05):
            model = YModel(pres, h, (-2.0, 2.0), (-3.0, 3.0))
            _, up = y_distance(YPoint.of(0.0, 0.0), YPoint.of(0.0, 2.0), model)
            uppers.append(up)
            assert abs(up - 2.0) <= 0.02  # within 1 percent
        # grid-commensurable samples at nonnegative heights: the action
        # (both signs of the stable-letter exponent, up to 2) then maps
        # them within the window and the reported slack bound holds
        model = YModel(pres, 0.1, (-24.0, 24.0), (-4.5, 4.5))
        h, kappa = model.h, model.kappa
        elements = [g for g in group_ball(pres, 3) if abs(t_exponent(g)) <= 2]
        elements.sort(key=lambda g: (len(g.syllables), str(g.syllables), g.head))
        rng = random.Random(105)
        checked = 0
        assert any(t_exponent(g) == -2 for g in elements)
        assert any(t_exponent(g) == 2 for g in elements)
        while checked < 200:
            g = rng.choice(elements)
            a = YPoint.of(rng.randrange(-20, 21) * h, rng.randrange(0, 16) * h)
            b = YPoint.of(rng.randrange(-20, 21) * h, rng.randrange(0, 16) * h)
            ga, gb = act_y(g, a), act_y(g, b)
            if not (model.contains(ga) and model.contains(gb)):
                continue
            up = y_distance(a, b, model)[1]
            up_g = y_distance(ga, gb, model)[1]
            assert abs(up_g - up) <= 2 * kappa * up + 4 * h
            checked += 1


def test_criterion_6_properness_and_normalization():
    with criterion(6, "injectivity certificate and window normalization", 60.0):
        pres = preset("bs:1:2")
        elements = group_ball(pres, 5)
        ball = TreeBall(pres, 7)
        xb = orbit_x_bound(elements) + 2.5
        model = YModel(pres, 0.1, (-xb, xb), (-6.5, 6.5))
        report = properness_probe(5, pres, ball, model)
        assert report["collisions"] == 0
        assert report["displacement_nondecreasing"]
        rng = random.Random(106)
        el_list = sorted(elements, key=lambda g: (len(g.syllables), str(g.syllables), g.head))
        for _ in range(300):
            m = sample_m_point(pres, ball, model, rng, el_list)
            g, m2 = normalize_to_fundamental_domain(m, ball)
            assert all(0.0 <= v < 1.0 for v in m2.y.x)
            assert -1e-9 <= m2.y.s <= 1.0 + 1e-9
            if m2.tree.vertex is not None:
                assert m2.tree.vertex == base_vertex(pres)
            else:
                assert m2.tree.edge.source == base_vertex(pres)
            assert act_point(g, m.tree) == m2.tree


def test_criterion_7_svarc_milnor_probe():
    with criterion(7, "orbit quasi-isometry fit and stability", 120.0):
        pres = preset("bs:1:2")
        elements6 = group_ball(pres, 6)
        ball = TreeBall(pres, 8)
        xb = orbit_x_bound(elements6) + 2.5
        model = YModel(pres, 0.1, (-xb, xb), (-7.5, 7.5))
        fit6 = orbit_qi_fit(6, pres, ball, model)
        fit4 = orbit_qi_fit(4, pres, ball, model)
        assert fit6.a_lower > 0
        assert fit6.a_lower >= 0.5 * fit4.a_lower
        assert fit6.A_upper >= fit6.a_lower


def test_criterion_8_compression_calibration():
    with criterion(8, "exponent estimator and embedding families", 180.0):
        # exact power laws
        k = np.arange(1, 257, dtype=float)
        for gamma in (0.25, 0.5, 1.0):
            est = estimate_exponent((k, k ** gamma))
            assert abs(est.alpha_hat - gamma) <= 0.01
        pres = preset("bs:1:2")
        # brute-force law verification on a small ball first
        small = TreeBall(pres, 6)
        vertices = sorted(small.vertex_dist, key=lambda v: (small.vertex_dist[v], v.key))
        assert len(vertices) >= 100
        for p in (2.0, 4.0):
            emb = embed_tree(EmbeddingSpec("edge_indicator", p), small)
            for i in range(len(vertices)):
                for j in range(i + 1, len(vertices), 5):
                    u, v = vertices[i], vertices[j]
                    y = emb.image_distance_explicit(u, v)
                    assert abs(y ** p - small.vertex_distance(u, v)) < 1e-9
        # estimates on a thousand-vertex ball
        big = TreeBall(pres, 10)
        assert len(big.vertex_dist) >= 1000
        pairs = sample_vertex_pairs(big, rng=random.Random(108), max_pairs=100_000)
        for p in (2.0, 4.0):
            emb = embed_tree(EmbeddingSpec("edge_indicator", p), big)
            est = estimate_exponent(pair_cloud(emb, pairs))
            assert abs(est.alpha_hat - 1.0 / p) <= 0.05
        prev = -1.0
        for beta in [round(0.1 * i, 1) for i in range(1, 10)]:
            emb = embed_tree(EmbeddingSpec("weighted_geodesic", 2.0, beta=beta), big)
            est = estimate_exponent(pair_cloud(emb, pairs))
            assert est.alpha_hat >= prev - 0.011
            prev = est.alpha_hat


def test_criterion_9_composition_rule():
    with criterion(9, "product composition of exponents", 5.0):
        assert compose_min(1, 1) == 1
        assert compose_min(0.5, 1) == 0.5
        assert compose_min(1, 0.5) == 0.5
        for a in (0.0, 0.25, 0.5, 0.77, 1.0):
            assert compose_min(a, a) == a
        # proof-shaped assembly: both factor estimates at one gives one
        tree_alpha, fibre_alpha = 1.0, 1.0
        assert compose_min(tree_alpha, fibre_alpha) == 1.0
        from fractions import Fraction

        assert compose_min(Fraction(2, 3), Fraction(1, 2)) == Fraction(1, 2)
