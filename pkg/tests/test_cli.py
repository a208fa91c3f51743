import json
import csv
from pathlib import Path

from hnngeo.cli import main


def run(args):
    return main(args)


def test_normal_form(capsys):
    assert run(["normal-form", "--preset", "bs:1:2", "--word", "t^-1 x^2 t"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "x"
    assert out[1] == "t-exponent: 0"
    assert run(["normal-form", "--preset", "bs:1:2", "--word", "t t^-1"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "e"
    assert run(["normal-form", "--preset", "bs:1:2", "--word", "t^3"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "t^3" and out[1] == "t-exponent: 3"


def test_normal_form_parse_error(capsys):
    rc = run(["normal-form", "--preset", "bs:1:2", "--word", "t q^2"])
    assert rc == 1
    err = capsys.readouterr().err
    assert "position" in err


def test_word_length(capsys):
    assert run(["word-length", "--preset", "bs:1:2", "--word", "x^4", "--budget", "6"]) == 0
    assert capsys.readouterr().out.strip() == "4"


def test_ball_growth(tmp_path, capsys):
    out = str(tmp_path)
    assert run(["ball-growth", "--preset", "bs:1:2", "--radius", "4", "--out", out]) == 0
    rows = list(csv.reader(open(tmp_path / "ball_growth.csv")))
    assert rows[0] == ["radius", "sphere", "ball"]
    sizes = [int(r[2]) for r in rows[1:]]
    assert sizes[0] == 1 and sizes[1] == 5
    assert all(a < b for a, b in zip(sizes, sizes[1:]))


def test_tree_ball_export(tmp_path, capsys):
    out = str(tmp_path)
    assert run(["tree-ball", "--preset", "bs:2:3", "--radius", "3", "--out", out]) == 0
    doc = json.loads((tmp_path / "tree_ball.json").read_text())
    assert doc["edges"] == doc["vertices"] - 1
    assert doc["interior_degrees"] == [5]
    assert doc["expected_degree"] == 5
    rows = list(csv.reader(open(tmp_path / "tree_edges.csv")))
    assert rows[0] == ["source_key", "target_key", "c_source"]
    assert len(rows) - 1 == doc["edges"]


def test_y_dist_roundtrip(tmp_path, capsys):
    out = str(tmp_path)
    rc = run(["y-dist", "--preset", "bs:1:2", "--grid-step", "0.2", "--s-max", "2",
              "--x-window", "4", "--pairs", "8", "--seed", "5", "--out", out])
    assert rc == 0
    rows = list(csv.reader(open(tmp_path / "y_distances.csv")))
    assert rows[0] == ["ax1", "as", "bx1", "bs", "lower", "upper"]
    assert len(rows) == 9
    for r in rows[1:]:
        lo, up = float(r[4]), float(r[5])
        assert 0 <= lo <= up


def test_y_dist_csv_input(tmp_path, capsys):
    src = tmp_path / "pairs.csv"
    src.write_text("ax1,as,bx1,bs\n0,0,0,1\n1,0,-1,0\n")
    out = str(tmp_path)
    rc = run(["y-dist", "--preset", "bs:1:2", "--grid-step", "0.1", "--s-max", "2",
              "--x-window", "4", "--pairs-csv", str(src), "--out", out])
    assert rc == 0
    rows = list(csv.reader(open(tmp_path / "y_distances.csv")))
    assert len(rows) == 3
    assert abs(float(rows[1][5]) - 1.0) < 0.05  # vertical unit pair


def test_verify_lemma_exit_code(tmp_path, capsys):
    out = str(tmp_path)
    rc = run(["verify-lemma", "--preset", "bs:1:2", "--radius", "3",
              "--grid-step", "0.1", "--s-max", "4", "--pairs", "40",
              "--seed", "2", "--out", out])
    assert rc == 0
    doc = json.loads((tmp_path / "verify_lemma.json").read_text())
    assert doc["ok"] is True
    assert doc["violations"]["four_bound"] == 0
    assert doc["kappa"] <= 0.2 + 1e-12
    rows = list(csv.reader(open(tmp_path / "lemma_pairs.csv")))
    assert len(rows) == 41
    assert rows[0][0] == "a_word"


def test_verify_lemma_pairs_csv_roundtrip(tmp_path, capsys):
    out1 = str(tmp_path / "a")
    run(["verify-lemma", "--preset", "bs:1:2", "--radius", "2",
         "--grid-step", "0.2", "--s-max", "3", "--pairs", "8",
         "--seed", "3", "--out", out1])
    capsys.readouterr()
    out2 = str(tmp_path / "b")
    rc = run(["verify-lemma", "--preset", "bs:1:2", "--radius", "2",
              "--grid-step", "0.2", "--s-max", "3",
              "--pairs-csv", out1 + "/lemma_pairs.csv", "--out", out2])
    assert rc == 0
    doc = json.loads((tmp_path / "b" / "verify_lemma.json").read_text())
    assert doc["pairs"] == 8 and doc["ok"] is True
    # identical pairs reproduce identical per-pair numbers
    a = (tmp_path / "a" / "lemma_pairs.csv").read_text()
    b = (tmp_path / "b" / "lemma_pairs.csv").read_text()
    assert a == b


def test_probe_exit_code(tmp_path, capsys):
    out = str(tmp_path)
    rc = run(["probe", "--preset", "bs:1:2", "--radius", "3", "--pairs", "40",
              "--seed", "2", "--out", out])
    assert rc == 0
    doc = json.loads((tmp_path / "probe.json").read_text())
    assert doc["collisions"] == 0
    assert doc["normalization"]["successes"] == 40
    assert doc["qi_fit"]["a_lower"] > 0


def test_probe_bs13(tmp_path, capsys):
    out = str(tmp_path)
    rc = run(["probe", "--preset", "bs:1:3", "--radius", "3", "--pairs", "20",
              "--seed", "2", "--out", out])
    assert rc == 0
    doc = json.loads((tmp_path / "probe.json").read_text())
    assert doc["collisions"] == 0


def test_estimate_compression_outputs(tmp_path, capsys):
    out = str(tmp_path)
    rc = run(["estimate-compression", "--preset", "bs:1:2", "--radius", "8",
              "--p", "2", "--seed", "2", "--pairs", "3000", "--out", out])
    assert rc == 0
    doc = json.loads((tmp_path / "compression.json").read_text())
    sec = doc["p"]["2.0"]
    assert abs(sec["edge_indicator"]["alpha_hat"] - 0.5) <= 0.05
    alphas = [sec["weighted_geodesic"][str(round(0.1 * i, 1))]["alpha_hat"]
              for i in range(1, 10)]
    assert all(b >= a - 0.011 for a, b in zip(alphas, alphas[1:]))
    assert sec["composed_min"] == min(sec["tree_best_alpha"],
                                      sec["group_concat"]["alpha_hat"])
    rows = list(csv.reader(open(tmp_path / "compression.csv")))
    assert rows[0][0] == "p"
    assert len(rows) == 1 + 11  # indicator + 9 betas + group


def test_determinism(tmp_path, capsys):
    out1, out2 = str(tmp_path / "a"), str(tmp_path / "b")
    args = ["verify-lemma", "--preset", "bs:1:2", "--radius", "2",
            "--grid-step", "0.2", "--s-max", "3", "--pairs", "15", "--seed", "9"]
    assert run(args + ["--out", out1]) == 0
    assert run(args + ["--out", out2]) == 0
    a = (Path(out1) / "verify_lemma.json").read_bytes()
    b = (Path(out2) / "verify_lemma.json").read_bytes()
    assert a == b


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "preset": "bs:1:2", "tree_radius": 2, "grid_step": 0.2,
        "s_max": 3.0, "pairs": 10, "seed": 4, "out": str(tmp_path / "cfg_out"),
    }))
    rc = run(["verify-lemma", "--config", str(cfg)])
    assert rc == 0
    doc = json.loads((tmp_path / "cfg_out" / "verify_lemma.json").read_text())
    assert doc["pairs"] == 10 and doc["seed"] == 4
    # flag overrides config
    rc = run(["verify-lemma", "--config", str(cfg), "--pairs", "5",
              "--out", str(tmp_path / "cfg_out2")])
    assert rc == 0
    doc2 = json.loads((tmp_path / "cfg_out2" / "verify_lemma.json").read_text())
    assert doc2["pairs"] == 5


def test_presentation_json_config(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "presentation": {"n": 1, "m1": [[1]], "m2": [[2]], "phi": [["2"]]},
    }))
    rc = run(["normal-form", "--config", str(cfg), "--word", "t^-1 x^2 t"])
    assert rc == 0
    assert capsys.readouterr().out.splitlines()[0] == "x"
