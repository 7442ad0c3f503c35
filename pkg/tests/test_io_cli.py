import copy
import json
from importlib import resources
from pathlib import Path

import pytest

from dgexplain.cli import main
from dgexplain.decision_graph import random_graph
from dgexplain.errors import ModelFormatError, VocabularyError
from dgexplain.io import (check_schema, document_from_graph, emit_model, parse_instance,
                          parse_model)
from dgexplain.report import render_text

from cases import REJECT

GOLDEN = Path(__file__).parent / "golden"
DATA = resources.files("dgexplain").joinpath("data")
ADMISSIONS = str(DATA.joinpath("admissions.json"))
IRIS = str(DATA.joinpath("iris.json"))
TARGETED = str(DATA.joinpath("targeted.json"))


def targeted_doc():
    return json.loads(Path(TARGETED).read_text("utf-8"))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


# -- documents ----------------------------------------------------------------


@pytest.mark.parametrize("path", [ADMISSIONS, IRIS, TARGETED])
def test_round_trip_is_stable(path):
    raw = Path(path).read_bytes()
    first = emit_model(parse_model(raw))
    assert emit_model(parse_model(first)) == first
    assert json.loads(first) == json.loads(raw)


def test_random_graph_round_trip():
    g = random_graph(n_vars=4, seed=5, share=0.5)
    text = emit_model(document_from_graph(g))
    back = parse_model(text).build().graph
    assert back.nodes == g.nodes and back.root == g.root


def test_undefined_child_names_the_node():
    doc = targeted_doc()
    doc["nodes"][1]["edges"][1]["child"] = "nowhere"
    with pytest.raises(ModelFormatError, match="node 'y' points to undefined child 'nowhere'") as err:
        parse_model(doc)
    assert err.value.path == "$.nodes[1].edges[1].child"


@pytest.mark.parametrize("mutate, pattern", [
    (lambda d: d.pop("root"), "'root' is a required property"),
    (lambda d: d.update(format="other"), "dgexplain-model"),
    (lambda d: d["nodes"].append({"id": "x", "class": "c1"}), "duplicate node id 'x'"),
    (lambda d: d["nodes"][1]["edges"][0].update(child="x"), "cycle through node 'x'"),
    (lambda d: d["nodes"].append({"id": "lonely", "class": "c1"}), "not reachable"),
    (lambda d: d["nodes"][0]["edges"][0].update(states=["x1", "x2"]), "overlapping"),
    (lambda d: d["nodes"][0]["edges"][0].update(states=["x9"]), "unknown states"),
    (lambda d: d["nodes"][2].update({"class": "c9"}), "unknown class 'c9'"),
    (lambda d: d["variables"].append({"name": "X", "kind": "nominal", "states": ["a", "b"]}), "duplicate variable"),
])
def test_model_errors(mutate, pattern):
    doc = targeted_doc()
    mutate(doc)
    with pytest.raises(ModelFormatError, match=pattern):
        parse_model(doc)


def test_invalid_json_bytes():
    with pytest.raises(ModelFormatError, match="not valid JSON"):
        parse_model(b"{not json")


def test_parse_instances(admissions, iris):
    assert parse_instance(REJECT, admissions) == (0, 1, 1, 1)
    assert parse_instance(json.dumps([REJECT, {**REJECT, "SAT": 1500}]), admissions) == [
        (0, 1, 1, 1), (1, 1, 1, 1)]
    assert parse_instance({"petalwidth": 0.8, "petallength": 5.3}, iris) == (1, 1)
    with pytest.raises(VocabularyError, match="missing variables: GPA"):
        parse_instance({k: v for k, v in REJECT.items() if k != "GPA"}, admissions)
    with pytest.raises(ModelFormatError):
        parse_instance({**REJECT, "SAT": "lots"}, admissions)


# -- command line -------------------------------------------------------------


def test_validate_command(capsys, tmp_path):
    assert run(capsys, "validate", ADMISSIONS)[:2] == (0, "valid\n")
    code, out, _ = run(capsys, "validate", IRIS, "--strict")
    assert code == 1 and out.startswith("invalid: retest")
    bad = targeted_doc()
    bad["nodes"][0]["edges"][0]["child"] = "gone"
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(bad))
    code, _, err = run(capsys, "validate", p)
    assert code == 1 and "undefined child 'gone'" in err and str(p) in err


def test_classify_command(capsys, tmp_path):
    code, out, _ = run(capsys, "classify", ADMISSIONS, json.dumps(REJECT))
    assert (code, out) == (0, "Reject\n")
    p = tmp_path / "insts.json"
    p.write_text(json.dumps([{"petalwidth": 0.3, "petallength": 1.0},
                             {"petalwidth": 0.8, "petallength": 5.3}]))
    assert run(capsys, "classify", IRIS, p)[1] == "Iris-setosa\nIris-virginica\n"


def test_explain_matches_golden(capsys):
    code, out, _ = run(capsys, "explain", ADMISSIONS, json.dumps(REJECT), "--no-timing")
    assert code == 0
    assert out == (GOLDEN / "admissions_reject.json").read_text("utf-8")
    check_schema(json.loads(out), "report")


def test_explain_is_byte_stable(capsys):
    a = run(capsys, "explain", ADMISSIONS, json.dumps(REJECT), "--no-timing")[1]
    b = run(capsys, "explain", ADMISSIONS, json.dumps(REJECT), "--no-timing")[1]
    assert a == b


def test_explain_modes_and_text(capsys):
    code, out, _ = run(capsys, "explain", ADMISSIONS, json.dumps(REJECT), "--mode", "ssr,nr")
    report = json.loads(out)
    assert [r["algorithm"] for r in report["reasons"]] == ["nr", "ssr"]
    assert all(isinstance(r["time"], float) for r in report["reasons"])
    code, out, _ = run(capsys, "explain", ADMISSIONS, json.dumps(REJECT), "--format", "text", "--no-timing")
    assert code == 0
    assert "class: Reject" in out and "  {Interview=fail}" in out


def test_explain_targeted(capsys):
    inst = json.dumps({"X": "x2", "Y": "y1"})
    code, out, _ = run(capsys, "explain", TARGETED, inst, "--target", "c3", "--mode", "nr", "--no-timing")
    report = json.loads(out)
    assert code == 0 and report["target"] == "c3"
    assert report["reasons"][0]["members"] == [["Y=y1"]]
    assert run(capsys, "explain", TARGETED, inst, "--target", "c2")[0] == 1
    assert run(capsys, "explain", TARGETED, inst, "--target", "nope")[0] == 1


def test_explain_timeout_and_overflow(capsys, monkeypatch):
    monkeypatch.setenv("DGEXPLAIN_TIMEOUT", "1e-9")
    code, out, _ = run(capsys, "explain", ADMISSIONS, json.dumps(REJECT), "--no-timing")
    assert code == 3
    assert {r["status"] for r in json.loads(out)["reasons"]} == {"timeout"}
    monkeypatch.setenv("DGEXPLAIN_TIMEOUT", "banana")
    assert run(capsys, "explain", ADMISSIONS, json.dumps(REJECT))[0] == 1
    monkeypatch.delenv("DGEXPLAIN_TIMEOUT")
    code, out, _ = run(capsys, "explain", ADMISSIONS, json.dumps(REJECT), "--mode", "sr", "--cap", "1")
    assert code == 4 and json.loads(out)["reasons"][0]["status"] == "overflow"


def test_explain_bad_instance(capsys, admissions):
    assert run(capsys, "explain", ADMISSIONS, '{"SAT": 1300}')[0] == 1
    assert run(capsys, "explain", ADMISSIONS, "/no/such/file.json")[0] == 1


def test_bench_command_is_deterministic(capsys):
    args = ("bench", "--trees", 2, "--instances", 20, "--nodes", 200, "--vars", 8, "--states", 4,
            "--no-timing")
    a = run(capsys, *args)[1]
    b = run(capsys, *args)[1]
    assert a == b
    header = a.splitlines()[0].split(",")
    assert header[:9] == ["model", "vars", "card", "thresholds", "nodes", "edges", "instances",
                          "cr_nodes", "cr_edges"]
    assert "snr_time" not in header and "sr_timeouts" in header
    assert a.splitlines()[-1].startswith("ALL,")
    rows = json.loads(run(capsys, "bench", "--model", IRIS, "--instances", 10, "--format", "json")[1])
    assert rows[0]["thresholds"] == 4 and "snr_time" in rows[0]


def test_oracle_check_command(capsys):
    code, out, _ = run(capsys, "oracle-check", "--trials", 20)
    assert code == 0 and out.startswith("pass: 60 instances")
    code, out, _ = run(capsys, "oracle-check", "--model", ADMISSIONS)
    assert code == 0 and "pass: 24 instances" in out


def test_oracle_check_catches_injected_fault(capsys):
    code, out, _ = run(capsys, "oracle-check", "--trials", 20, "--inject-fault")
    assert code == 5
    assert out.startswith("FAIL: snr")
    dump = json.loads(out.split("\n", 1)[1])
    parse_model(dump["model"])
    assert len(dump["got"]) == len(dump["expected"]) - 1


def test_gen_command_emits_valid_models(capsys):
    code, out, _ = run(capsys, "gen", "--vars", 4, "--seed", 9, "--share", 0.5)
    assert code == 0
    doc = parse_model(out)
    assert doc.kind == "decision-graph"
    assert run(capsys, "gen", "--vars", 4, "--seed", 9, "--share", 0.5)[1] == out


def test_report_text_comes_from_json(capsys):

    out = run(capsys, "explain", ADMISSIONS, json.dumps(REJECT), "--no-timing")[1]
    text = run(capsys, "explain", ADMISSIONS, json.dumps(REJECT), "--no-timing", "--format", "text")[1]
    assert render_text(json.loads(out)) == text
    tampered = copy.deepcopy(json.loads(out))
    tampered["predicted"] = "Accept"
    assert "class: Accept" in render_text(tampered)
