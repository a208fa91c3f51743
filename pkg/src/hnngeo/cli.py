"""Batch command-line front end.

Subcommands wire the library into reproducible experiments: each one
reads a presentation (preset string, JSON file, or --config document),
runs a computation, writes CSV/JSON artifacts into --out, and uses the
exit code as the verification verdict (0 = all checked bounds hold,
2 = some bound violated, 1 = usage or input error).  Identical config
and seed produce identical outputs under one kernel selection (see
HNNGEO_NO_NUMBA in hnngeo._kernels).

    hnngeo normal-form --preset bs:1:2 --word "t^-1 x^2 t"
    hnngeo verify-lemma --preset bs:1:2 --radius 5 --grid-step 0.05 --pairs 300
    hnngeo probe --preset bs:1:2 --radius 5
    hnngeo estimate-compression --preset bs:1:2 --radius 8 --p 2 --p 4
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
import time

from . import _kernels
from .bass_serre import TreeBall, base_vertex
from .compression import (
    EmbeddingSpec,
    compose_min,
    embed_tree,
    estimate_exponent,
    group_pair_cloud,
    embed_group,
    pair_cloud,
    sample_vertex_pairs,
)
from .errors import HnnGeoError
from .group_core import ball as group_ball
from .group_core import britton_reduce, t_exponent, to_string, word_length
from .millefeuille import (
    lemma_experiment,
    lemma_scene,
    mpoint_from_fields,
    normalize_to_fundamental_domain,
    orbit_qi_fit,
    orbit_x_bound,
    properness_probe,
    sample_m_point,
)
from .presentation import Presentation, from_json_dict, parse_word, preset as load_preset
from .y_space import YModel, YPoint, y_distance

FLOAT_FMT = "%.12g"


def _fmt(x) -> str:
    if isinstance(x, float):
        return FLOAT_FMT % x
    return str(x)


def _write_csv(path: str, header: list[str], rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path: str, doc: dict) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load_presentation(args) -> Presentation:
    cfg = getattr(args, "_config", {})
    if getattr(args, "preset", None):
        return load_preset(args.preset)
    if "preset" in cfg:
        return load_preset(cfg["preset"])
    if "presentation" in cfg:
        return from_json_dict(cfg["presentation"])
    raise HnnGeoError("no presentation given: use --preset or a config file")


def _cfg_value(args, key, flag_value, default):
    if flag_value is not None:
        return flag_value
    return getattr(args, "_config", {}).get(key, default)


def _echo(args, pres: Presentation, **extra) -> dict:
    doc = {
        "presentation": pres.label or {"n": pres.n, "m1": pres.m1, "m2": pres.m2,
                                       "phi": [[str(v) for v in row] for row in pres.phi]},
        "kernel": _kernels.kernel_name(),
    }
    doc.update(extra)
    return doc


# -- subcommands ---------------------------------------------------------------


def cmd_normal_form(args) -> int:
    pres = _load_presentation(args)
    word = parse_word(pres, args.word)
    g = britton_reduce(pres, word)
    print(to_string(g))
    print(f"t-exponent: {t_exponent(g)}")
    return 0


def cmd_word_length(args) -> int:
    pres = _load_presentation(args)
    g = britton_reduce(pres, parse_word(pres, args.word))
    n = word_length(g, args.budget)
    print(n)
    return 0


def cmd_ball_growth(args) -> int:
    pres = _load_presentation(args)
    radius = _cfg_value(args, "tree_radius", args.radius, 5)
    out = _cfg_value(args, "out", args.out, "hnngeo_out")
    elements = group_ball(pres, radius)
    sizes = {}
    for _, r in elements.items():
        sizes[r] = sizes.get(r, 0) + 1
    rows = []
    total = 0
    for r in range(radius + 1):
        total += sizes.get(r, 0)
        rows.append((r, sizes.get(r, 0), total))
    _write_csv(os.path.join(out, "ball_growth.csv"), ["radius", "sphere", "ball"], rows)
    _write_json(os.path.join(out, "ball_growth.json"),
                _echo(args, pres, radius=radius, ball=total))
    print(f"ball({radius}) has {total} elements")
    return 0


def cmd_tree_ball(args) -> int:
    pres = _load_presentation(args)
    radius = _cfg_value(args, "tree_radius", args.radius, 4)
    out = _cfg_value(args, "out", args.out, "hnngeo_out")
    ball = TreeBall(pres, radius)
    rows = ball.export_edge_rows()
    _write_csv(os.path.join(out, "tree_edges.csv"),
               ["source_key", "target_key", "c_source"], rows)
    degrees = sorted({ball.degree(v) for v in ball.interior_vertices()})
    doc = _echo(args, pres, radius=radius,
                vertices=len(ball.vertex_dist), edges=len(ball.edges),
                interior_degrees=degrees,
                expected_degree=pres.index1() + pres.index2())
    _write_json(os.path.join(out, "tree_ball.json"), doc)
    print(f"tree ball radius {radius}: {len(ball.vertex_dist)} vertices, "
          f"{len(ball.edges)} edges, interior degrees {degrees}")
    return 0


def cmd_y_dist(args) -> int:
    pres = _load_presentation(args)
    h = _cfg_value(args, "grid_step", args.grid_step, 0.1)
    s_max = _cfg_value(args, "s_max", args.s_max, 4.0)
    xw = _cfg_value(args, "x_window", args.x_window, 8.0)
    seed = _cfg_value(args, "seed", args.seed, 0)
    out = _cfg_value(args, "out", args.out, "hnngeo_out")
    model = YModel(pres, h, (-xw, xw), (-s_max, s_max))
    pairs = []
    if args.pairs_csv:
        with open(args.pairs_csv) as fh:
            rd = csv.reader(fh)
            header = next(rd)
            n = pres.n
            for row in rd:
                vals = [float(v) for v in row]
                a = YPoint(tuple(vals[:n]), vals[n])
                b = YPoint(tuple(vals[n + 1:2 * n + 1]), vals[2 * n + 1])
                pairs.append((a, b))
    else:
        rng = random.Random(seed)
        count = _cfg_value(args, "pairs", args.pairs, 20)
        for _ in range(count):
            a = YPoint(tuple(rng.uniform(-xw + h, xw - h) for _ in range(pres.n)),
                       rng.uniform(-s_max + h, s_max - h))
            b = YPoint(tuple(rng.uniform(-xw + h, xw - h) for _ in range(pres.n)),
                       rng.uniform(-s_max + h, s_max - h))
            pairs.append((a, b))
    rows = []
    for a, b in pairs:
        lo, up = y_distance(a, b, model)
        rows.append((*a.x, a.s, *b.x, b.s, lo, up))
    xcols = [f"ax{i+1}" for i in range(pres.n)] + ["as"] + \
            [f"bx{i+1}" for i in range(pres.n)] + ["bs"]
    _write_csv(os.path.join(out, "y_distances.csv"), xcols + ["lower", "upper"], rows)
    if args.export_grid:
        grid = model.grid
        grid_rows = []
        for idx in range(grid.n_nodes):
            p = grid.node_point(idx)
            strip = int(grid.strip_of_row[idx // grid.strides[0]])
            grid_rows.append((*p.x, p.s, strip))
        _write_csv(os.path.join(out, "y_grid.csv"),
                   [f"x{i+1}" for i in range(pres.n)] + ["s", "strip_index"],
                   grid_rows)
    _write_json(os.path.join(out, "y_distances.json"),
                _echo(args, pres, grid_step=h, s_max=s_max, x_window=xw,
                      kappa=model.kappa, pairs=len(rows), seed=seed))
    print(f"wrote {len(rows)} distance brackets (kappa={model.kappa:.4g})")
    return 0


def cmd_verify_lemma(args) -> int:
    pres = _load_presentation(args)
    radius = _cfg_value(args, "tree_radius", args.radius, 5)
    h = _cfg_value(args, "grid_step", args.grid_step, 0.05)
    s_max = _cfg_value(args, "s_max", args.s_max, 6.0)
    n_pairs = _cfg_value(args, "pairs", args.pairs, 300)
    seed = _cfg_value(args, "seed", args.seed, 1)
    out = _cfg_value(args, "out", args.out, "hnngeo_out")
    t0 = time.time()
    explicit = None
    if getattr(args, "pairs_csv", None):
        ball, _ = lemma_scene(pres, radius, h, s_max)
        n = pres.n
        explicit = []
        with open(args.pairs_csv) as fh:
            rd = csv.reader(fh)
            next(rd)
            for row in rd:
                a = mpoint_from_fields(pres, ball, row[0], row[1], row[2:2 + n])
                off = 2 + n
                b = mpoint_from_fields(pres, ball, row[off], row[off + 1],
                                       row[off + 2:off + 2 + n])
                explicit.append((a, b))
    report = lemma_experiment(pres, radius, h, s_max, n_pairs, seed, pairs=explicit)
    detail = report.pop("pairs_detail")
    xcols = [f"{side}x{i+1}" for side in ("a", "b") for i in range(pres.n)]
    header = (["a_word", "a_u"] + xcols[:pres.n]
              + ["b_word", "b_u"] + xcols[pres.n:]
              + ["d_tree", "product_lower", "product_upper", "path_length", "ratio"])
    _write_csv(os.path.join(out, "lemma_pairs.csv"), header, detail)
    doc = _echo(args, pres, **report)
    _write_json(os.path.join(out, "verify_lemma.json"), doc)
    print(json.dumps(doc, indent=2, sort_keys=True))
    print(f"runtime: {time.time() - t0:.2f}s", file=sys.stderr)
    return 0 if report["ok"] else 2


def cmd_probe(args) -> int:
    pres = _load_presentation(args)
    radius = _cfg_value(args, "tree_radius", args.radius, 5)
    h = _cfg_value(args, "grid_step", args.grid_step, 0.1)
    n_samples = _cfg_value(args, "pairs", args.pairs, 300)
    seed = _cfg_value(args, "seed", args.seed, 1)
    out = _cfg_value(args, "out", args.out, "hnngeo_out")
    t0 = time.time()
    elements = group_ball(pres, radius)
    s_max = radius + 1.5
    xb = orbit_x_bound(elements) + 2.5
    ball = TreeBall(pres, radius + 2)
    model = YModel(pres, h, (-xb, xb), (-s_max, s_max))
    probe = properness_probe(radius, pres, ball, model)
    # normalization sweep: random orbit translates of sampled window points
    rng = random.Random(seed)
    el_list = sorted(elements, key=lambda g: (len(g.syllables), str(g.syllables), g.head))
    successes = 0
    for _ in range(n_samples):
        m0 = sample_m_point(pres, ball, model, rng, el_list,
                            u_step=h * max(1, round(0.25 / h)), x_jitter=1.0)
        g, m1 = normalize_to_fundamental_domain(m0, ball)
        ok = all(0.0 <= v < 1.0 for v in m1.y.x) and -1e-9 <= m1.y.s <= 1.0 + 1e-9
        if m1.tree.vertex is not None:
            ok = ok and m1.tree.vertex == base_vertex(pres)
        else:
            ok = ok and m1.tree.edge.source == base_vertex(pres)
        successes += bool(ok)
    fit = orbit_qi_fit(radius, pres, ball, model)
    doc = _echo(args, pres,
                radius=radius, seed=seed,
                collisions=probe["collisions"],
                elements=probe["elements"],
                min_displacement_by_length=probe["min_displacement_by_length"],
                displacement_nondecreasing=probe["displacement_nondecreasing"],
                normalization={"samples": n_samples, "successes": successes},
                qi_fit={"A_upper": fit.A_upper, "B_upper": fit.B_upper,
                        "a_lower": fit.a_lower, "b_lower": fit.b_lower,
                        "samples": fit.sample_count})
    _write_json(os.path.join(out, "probe.json"), doc)
    print(json.dumps(doc, indent=2, sort_keys=True))
    print(f"runtime: {time.time() - t0:.2f}s", file=sys.stderr)
    ok = (probe["collisions"] == 0 and successes == n_samples
          and probe["displacement_nondecreasing"] and fit.a_lower > 0)
    return 0 if ok else 2


def cmd_estimate_compression(args) -> int:
    pres = _load_presentation(args)
    radius = _cfg_value(args, "tree_radius", args.radius, 8)
    p_values = args.p or getattr(args, "_config", {}).get("p_values") or [2.0]
    seed = _cfg_value(args, "seed", args.seed, 1)
    budget = _cfg_value(args, "pairs", args.pairs, 20000)
    out = _cfg_value(args, "out", args.out, "hnngeo_out")
    betas = [round(0.1 * i, 1) for i in range(1, 10)]
    anchor_radius = 2
    t0 = time.time()
    ball = TreeBall(pres, radius + anchor_radius)
    rng = random.Random(seed)
    quotients = group_ball(pres, radius)
    anchors = sorted(group_ball(pres, anchor_radius),
                     key=lambda g: (len(g.syllables), str(g.syllables), g.head))
    vertex_pairs = sample_vertex_pairs(ball, rng=rng, max_pairs=budget)
    rows = []
    dump_rows = []

    def dump(p, family, beta, d, y):
        if args.dump_pairs:
            dump_rows.extend(
                (p, family, beta, float(dd), float(yy)) for dd, yy in zip(d, y))

    summary: dict = {"p": {}}
    for p in p_values:
        section: dict = {}
        spec = EmbeddingSpec("edge_indicator", p)
        d, y = pair_cloud(embed_tree(spec, ball), vertex_pairs)
        dump(p, "edge_indicator", "", d, y)
        est = estimate_exponent((d, y))
        section["edge_indicator"] = est.as_dict()
        rows.append((p, "edge_indicator", "", *est.as_dict().values()))
        best_tree = est.alpha_hat
        section["weighted_geodesic"] = {}
        for beta in betas:
            spec = EmbeddingSpec("weighted_geodesic", p, beta=beta)
            d, y = pair_cloud(embed_tree(spec, ball), vertex_pairs)
            dump(p, "weighted_geodesic", beta, d, y)
            est_b = estimate_exponent((d, y))
            section["weighted_geodesic"][str(beta)] = est_b.as_dict()
            rows.append((p, "weighted_geodesic", beta, *est_b.as_dict().values()))
            best_tree = max(best_tree, est_b.alpha_hat)
        gemb = embed_group(p, EmbeddingSpec("edge_indicator", p), ball)
        d, y = group_pair_cloud(gemb, quotients, anchors, rng, max_pairs=budget)
        dump(p, "group_concat", "", d, y)
        est_g = estimate_exponent((d, y))
        section["group_concat"] = est_g.as_dict()
        rows.append((p, "group_concat", "", *est_g.as_dict().values()))
        section["tree_best_alpha"] = best_tree
        section["composed_min"] = compose_min(best_tree, est_g.alpha_hat)
        summary["p"][str(p)] = section
    header = ["p", "family", "beta", "alpha_hat", "C", "D", "A", "B",
              "pairs", "d_min", "d_max"]
    _write_csv(os.path.join(out, "compression.csv"), header, rows)
    if args.dump_pairs:
        _write_csv(os.path.join(out, "compression_pairs.csv"),
                   ["p", "family", "beta", "distance", "image_distance"], dump_rows)
    doc = _echo(args, pres, radius=radius, seed=seed, budget=budget, **summary)
    _write_json(os.path.join(out, "compression.json"), doc)
    print(f"runtime: {time.time() - t0:.2f}s", file=sys.stderr)
    print(json.dumps({p: {"edge_indicator": s["edge_indicator"]["alpha_hat"],
                          "composed_min": s["composed_min"]}
                      for p, s in summary["p"].items()}, indent=2, sort_keys=True))
    return 0


# -- argument plumbing ------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--config", help="JSON config file; flags override its fields")
    sp.add_argument("--preset", help="preset string, e.g. bs:1:2 or abc:2:2,1;1,1")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hnngeo", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("normal-form", help="Britton-reduce a word")
    _add_common(sp)
    sp.add_argument("--word", required=True)
    sp.set_defaults(func=cmd_normal_form)

    sp = sub.add_parser("word-length", help="shortest word length by BFS")
    _add_common(sp)
    sp.add_argument("--word", required=True)
    sp.add_argument("--budget", type=int, default=8)
    sp.set_defaults(func=cmd_word_length)

    sp = sub.add_parser("ball-growth", help="ball sizes up to a radius")
    _add_common(sp)
    sp.add_argument("--radius", type=int, default=None)
    sp.set_defaults(func=cmd_ball_growth)

    sp = sub.add_parser("tree-ball", help="construct and export a tree ball")
    _add_common(sp)
    sp.add_argument("--radius", type=int, default=None)
    sp.set_defaults(func=cmd_tree_ball)

    sp = sub.add_parser("y-dist", help="warped-space distance brackets")
    _add_common(sp)
    sp.add_argument("--grid-step", type=float, default=None)
    sp.add_argument("--s-max", type=float, default=None)
    sp.add_argument("--x-window", type=float, default=None)
    sp.add_argument("--pairs", type=int, default=None)
    sp.add_argument("--pairs-csv", help="CSV of point pairs (ax..,as,bx..,bs)")
    sp.add_argument("--export-grid", action="store_true",
                    help="also dump the grid nodes (x.., s, strip_index)")
    sp.set_defaults(func=cmd_y_dist)

    sp = sub.add_parser("verify-lemma", help="two-metric comparison experiment")
    _add_common(sp)
    sp.add_argument("--radius", type=int, default=None)
    sp.add_argument("--grid-step", type=float, default=None)
    sp.add_argument("--s-max", type=float, default=None)
    sp.add_argument("--pairs", type=int, default=None)
    sp.add_argument("--pairs-csv",
                    help="re-query explicit fibre pairs (schema of lemma_pairs.csv)")
    sp.set_defaults(func=cmd_verify_lemma)

    sp = sub.add_parser("probe", help="properness certificate, normalization sweep, QI fit")
    _add_common(sp)
    sp.add_argument("--radius", type=int, default=None)
    sp.add_argument("--grid-step", type=float, default=None)
    sp.add_argument("--pairs", type=int, default=None)
    sp.set_defaults(func=cmd_probe)

    sp = sub.add_parser("estimate-compression", help="exponent estimates for the embedding families")
    _add_common(sp)
    sp.add_argument("--radius", type=int, default=None)
    sp.add_argument("--pairs", type=int, default=None)
    sp.add_argument("--p", type=float, action="append",
                    help="target exponent, repeatable (> 1)")
    sp.add_argument("--dump-pairs", action="store_true",
                    help="also dump every (distance, image distance) sample")
    sp.set_defaults(func=cmd_estimate_compression)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return 1
    args._config = config
    try:
        return args.func(args)
    except HnnGeoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
