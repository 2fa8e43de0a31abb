import json
import math

import pytest

from cablekit.cli import main
from cablekit.io import (MalformedInputError, canonical_json, dumps_csv, graph_to_obj,
                         loads_graph)

STAR = {"type": "metric", "vertices": [0, 1, 2, 3],
        "edges": [{"id": f"e{i}", "u": 0, "v": i, "length": 1.0, "mu": 1.0, "nu": 1.0}
                  for i in (1, 2, 3)]}
INTERVAL = {"type": "metric", "vertices": ["a", "b"],
            "edges": [{"id": "e", "u": "a", "v": "b", "length": 1.0}]}
PATH3 = {"type": "discrete", "vertices": [{"id": v, "m": 1.0} for v in "xyz"],
         "edges": [{"u": "x", "v": "y", "b": 1.0}, {"u": "y", "v": "z", "b": 1.0}]}


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, doc in (("star", STAR), ("interval", INTERVAL), ("path3", PATH3)):
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(doc))
        paths[name] = str(p)
    return paths


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_values(text, col=1):
    rows = [ln.split(",") for ln in text.splitlines() if ln and not ln.startswith("#")]
    return [float(r[col]) for r in rows[1:]]


def test_loads_rejects_unknown_keys_and_duplicates():
    with pytest.raises(MalformedInputError, match="unknown keys"):
        loads_graph(json.dumps({**INTERVAL, "extra": 1}))
    dup = {**STAR, "edges": STAR["edges"] + [STAR["edges"][0]]}
    with pytest.raises(MalformedInputError, match="duplicate edge id"):
        loads_graph(json.dumps(dup))
    dup = {**PATH3, "edges": PATH3["edges"] + [{"u": "y", "v": "x", "b": 2.0}]}
    with pytest.raises(MalformedInputError, match="duplicate edge"):
        loads_graph(json.dumps(dup))
    with pytest.raises(MalformedInputError):
        loads_graph("{not json")
    with pytest.raises(MalformedInputError):
        loads_graph(json.dumps({"type": "hypergraph"}))


def test_graph_json_round_trip():
    for doc in (STAR, PATH3):
        g = loads_graph(json.dumps(doc))
        assert canonical_json(loads_graph(json.dumps(graph_to_obj(g)))) == canonical_json(g)


def test_csv_formatting():
    text = dumps_csv(["n", "x"], [(1, 0.1), (2, 1 / 3)], op="demo", params={"h": 0.5})
    lines = text.splitlines()
    assert lines[0] == "# op=demo h=0.5" and lines[1] == "n,x"
    assert lines[2] == "1,0.10000000000000001"
    assert float(lines[3].split(",")[1]) == 1 / 3
    short = dumps_csv(["x"], [(1 / 3,)], op="demo", digits=4)
    assert short.splitlines()[2] == "0.3333"


def test_discretize_star(capsys, files):
    code, out, _ = run(capsys, "discretize", "--in", files["star"])
    doc = json.loads(out)
    assert code == 0 and doc["type"] == "discrete"
    assert {v["id"]: v["m"] for v in doc["vertices"]} == {0: 3.0, 1: 1.0, 2: 1.0, 3: 1.0}
    assert all(e["b"] == 1.0 for e in doc["edges"]) and len(doc["edges"]) == 3


def test_spectrum_metric_interval(capsys, files):
    code, out, _ = run(capsys, "spectrum", "metric", "--in", files["interval"], "--h", "0.01",
                       "--k", "3")
    lam = csv_values(out)
    assert code == 0 and abs(lam[0]) < 1e-9
    assert math.isclose(lam[1], 9.8696, rel_tol=1e-3) and math.isclose(lam[2], 39.478, rel_tol=1e-3)


def test_cayley_growth(capsys):
    code, out, _ = run(capsys, "cayley", "growth", "--group", "Z2", "--radius", "3")
    assert code == 0 and csv_values(out) == [1, 5, 13, 25]
    assert out.startswith("# op=cayley-growth group=Z2 radius=3")


def test_round_trip_is_canonical(capsys, files, tmp_path):
    d1 = tmp_path / "d1.json"
    r = tmp_path / "r.json"
    d2 = tmp_path / "d2.json"
    assert main(["discretize", "--in", files["star"], "--out", str(d1)]) == 0
    assert main(["realize", "--in", str(d1), "--out", str(r)]) == 0
    assert main(["discretize", "--in", str(r), "--out", str(d2)]) == 0
    a = canonical_json(json.loads(d1.read_text()))
    b = canonical_json(json.loads(d2.read_text()))
    assert a == b
    prov = json.loads(r.read_text())["provenance"]
    assert prov["scheme"] and "loop_vertices" in prov


def test_validate_exit_codes(capsys, tmp_path, files):
    code, out, _ = run(capsys, "validate", "--in", files["path3"])
    assert code == 0 and json.loads(out)["valid"]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"type": "discrete", "vertices": [{"id": 0, "m": 1.0},
                                                                {"id": 1, "m": -1.0}],
                               "edges": []}))
    code, out, _ = run(capsys, "validate", "--in", str(bad))
    assert code == 1 and not json.loads(out)["valid"]
    code, _, err = run(capsys, "discretize", "--in", str(bad))
    assert code == 2 and "needs a metric model" in err
    code, _, err = run(capsys, "spectrum", "discrete", "--in", str(bad))
    assert code == 1 and "validation failed" in err


def test_usage_errors_have_distinct_messages(capsys, files, tmp_path):
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and "unknown subcommand" in err
    code, _, err = run(capsys, "spectrum", "metric", "--in", files["interval"], "--h", "0", "--k", "2")
    assert code == 2 and "parameter out of range" in err
    junk = tmp_path / "junk.json"
    junk.write_text("[1, 2")
    code, _, err = run(capsys, "validate", "--in", str(junk))
    assert code == 2 and "malformed input" in err
    code, _, err = run(capsys, "cayley", "growth", "--group", "Z2")
    assert code == 2 and "usage error" in err
    code, _, err = run(capsys, "cayley", "growth", "--group", "SL2", "--radius", "2")
    assert code == 2 and "unsupported group" in err
    code, _, err = run(capsys, "walk", "dp", "--group", "Z", "--radius", "2", "--n-max", "12")
    assert code == 2 and "truncation" in err


def test_metric_commands(capsys, files):
    code, out, _ = run(capsys, "metric", "distances", "--in", files["path3"])
    rows = [ln.split(",") for ln in out.splitlines()[2:]]
    assert code == 0 and ["x", "z", "2"] in [[r[0], r[1], r[2].rstrip(".0")] for r in rows] \
        or any(r[:2] == ["x", "z"] and float(r[2]) == 2.0 for r in rows)
    code, out, _ = run(capsys, "metric", "balls", "--in", files["star"], "--center", "0",
                       "--radii", "0,0.5,2")
    assert csv_values(out, 2) == [0.0, 1.5, 3.0]
    code, out, _ = run(capsys, "metric", "intrinsic-check", "--in", files["path3"])
    rep = json.loads(out)
    assert not rep["ok"] and rep["worst_vertex"] == "y" and rep["slack"] == -1.0
    code, out, _ = run(capsys, "metric", "intrinsic-check", "--in", files["path3"],
                       "--weight", "intrinsic")
    assert json.loads(out)["ok"]
    code, out, _ = run(capsys, "metric", "quasi-isometry", "--in", files["star"], "--seed", "5")
    rep = json.loads(out)
    assert rep["ok"] and rep["seed"] == 5 and rep["R"] == 1.0


def test_spectrum_and_heat_commands(capsys, files):
    code, out, _ = run(capsys, "spectrum", "discrete", "--in", files["path3"])
    assert [round(x, 12) for x in csv_values(out)] == [0.0, 1.0, 3.0]
    code, out, _ = run(capsys, "spectrum", "equilateral-check", "--in", files["star"], "--h", "0.01")
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and rep["checked"] > 0
    code, out, _ = run(capsys, "heat", "--in", files["path3"], "--t", "0", "--initial", "y")
    assert csv_values(out) == [0.0, 1.0, 0.0] or max(abs(a - b) for a, b in
                                                  zip(csv_values(out), [0, 1, 0])) < 1e-12
    code, out, _ = run(capsys, "heat", "--in", files["star"], "--t", "0.1", "--initial", "0",
                       "--h", "0.1")
    assert code == 0 and len(csv_values(out)) == 4


def test_walk_and_recurrence_commands(capsys):
    code, out, _ = run(capsys, "walk", "dp", "--group", "Z", "--n-max", "4")
    assert csv_values(out) == [1.0, 0.0, 0.5, 0.0, 0.375]
    code, out, _ = run(capsys, "walk", "mc", "--group", "Z", "--steps", "2", "--trials", "20000",
                       "--seed", "9")
    rep = json.loads(out)
    assert rep["seed"] == 9 and rep["within_3_sigma"]
    code, out, _ = run(capsys, "cayley", "classify", "--group", "F2")
    assert json.loads(out)["verdict"] == "transient"
    code, out, _ = run(capsys, "recurrence", "indicator", "--group", "Z", "--n-max", "200")
    assert json.loads(out)["verdict"] == "recurrent-consistent"
    code, out, _ = run(capsys, "recurrence", "ultrafit", "--group", "Z2", "--n-max", "200")
    assert 0.9 <= json.loads(out)["exponent"] <= 1.1
    code, out, _ = run(capsys, "recurrence", "volume-test", "--group", "Z", "--r-max", "50",
                       "--dr", "0.5")
    assert json.loads(out)["verdict"] == "divergent-consistent"
    code, out, _ = run(capsys, "recurrence", "weight-check", "--group", "Z2", "--radius", "4")
    assert json.loads(out)["verdict"] == "recurrent"
    code, out, _ = run(capsys, "cayley", "generate", "--group", "F2", "--radius", "2")
    assert len(json.loads(out)["vertices"]) == 17


def test_output_file_and_seed_echo(capsys, tmp_path):
    target = tmp_path / "g.csv"
    assert main(["cayley", "growth", "--group", "F2", "--radius", "3", "--seed", "11",
                 "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert "seed=11" in target.read_text().splitlines()[0]
