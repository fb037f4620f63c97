import io
import json
import subprocess
import sys

import pytest

from fuzzbis.cli import json_subset, run


def call(*argv):
    buf = io.StringIO()
    code = run([str(a) for a in argv], buf)
    return code, buf.getvalue()


@pytest.fixture
def files(bundled):
    return {p.stem: p for p in bundled.glob("*.json")}


def test_eval_example(files):
    assert call("eval", "--model", files["ex22"], "--formula", "<r>p", "--at", "u") == (0, "7/10\n")
    code, out = call("eval", "--model", files["ex22"], "--formula", "[r]p", "--at", "u", "--lattice", "product")
    assert out == "5/6\n"
    code, out = call("eval", "--model", files["ex22"], "--formula", "[r]p", "--at", "u", "--lattice", "product",
                     "--decimal", "4")
    assert out == "0.8333\n"
    code, out = call("eval", "--model", files["ex22"], "--formula", "p")
    assert code == 0 and json.loads(out)["values"]["u"]


def test_env_lattice_and_flag_precedence(files, monkeypatch):
    monkeypatch.setenv("FUZZBIS_LATTICE", "lukasiewicz")
    assert call("eval", "--model", files["ex22"], "--formula", "<r>p", "--at", "u")[1] == "1/2\n"
    assert call("eval", "--model", files["ex22"], "--formula", "<r>p", "--at", "u",
                "--lattice", "godel")[1] == "7/10\n"


def test_bisim_greatest_product(files, tmp_path):
    trace = tmp_path / "t.csv"
    code, out = call("bisim-greatest", "--left", files["ex33_m"], "--right", files["ex33_mp"],
                     "--lattice", "product", "--trace-csv", trace)
    doc = json.loads(out)
    assert code == 0 and doc["certified"]
    assert ["u", "u'", "5/8"] in doc["relation"]["entries"]
    assert trace.read_text().startswith("iteration,delta\n")


def test_bisim_check_round_trip(files, tmp_path):
    code, out = call("bisim-greatest", "--left", files["ex33_m"], "--right", files["ex33_mp"])
    rel = tmp_path / "z.json"
    rel.write_text(out)
    assert call("bisim-check", "--left", files["ex33_m"], "--right", files["ex33_mp"], "--relation", rel)[0] == 0
    doc = json.loads(out)
    doc["relation"]["entries"] = [e if e[:2] != ["u", "u'"] else ["u", "u'", "1"] for e in doc["relation"]["entries"]]
    rel.write_text(json.dumps(doc))
    code, out = call("bisim-check", "--left", files["ex33_m"], "--right", files["ex33_mp"], "--relation", rel)
    assert code == 1 and json.loads(out)["holds"] is False


def test_non_convergence_exit(files):
    code, _ = call("bisim-greatest", "--left", files["ex33_m"], "--right", files["ex33_mp"],
                   "--lattice", "product", "--max-iterations", "1")
    assert code == 3


def test_exact_on_product_is_usage_error(files):
    assert call("bisim-greatest", "--left", files["ex33_m"], "--right", files["ex33_mp"],
                "--lattice", "product", "--mode", "exact")[0] == 2


def test_invariance_refusal_names_condition(files, capsys):
    code, _ = call("invariance", "--left", files["counter_m"], "--right", files["counter_mp"],
                   "--lattice", "lukasiewicz", "--formula", "p -> q")
    assert code == 2
    assert "[heyting]" in capsys.readouterr().err
    code, out = call("invariance", "--left", files["counter_m"], "--right", files["counter_mp"],
                     "--lattice", "lukasiewicz", "--formula", "p -> q", "--no-gating")
    assert code == 1 and json.loads(out)["violations"][0]["biresiduum"] == "4/5"


def test_hm_outputs(files, tmp_path):
    csv = tmp_path / "d.csv"
    code, out = call("hm", "--left", files["ex33_m"], "--right", files["ex33_mp"], "--depth", 2,
                     "--require-match", "--depth-csv", csv)
    assert code == 0 and json.loads(out)["matched"]
    assert len(csv.read_text().splitlines()) == 4


def test_zigzag_and_automata(files):
    assert call("zigzag", "--left", files["ex33_m"], "--right", files["ex33_mp"], "--program", "r*")[0] == 0
    code, out = call("automata-bisim", "--left", files["aut_a"], "--right", files["aut_b"])
    assert code == 0 and json.loads(out)["initial_ok"]
    code, out = call("automata-corresp", "--left", files["aut_a"], "--right", files["aut_b"])
    assert code == 0 and json.loads(out)["direction1"]["status"] == "confirmed"


def test_lattice_laws():
    code, out = call("lattice-laws", "--lattice", "lukasiewicz", "--samples", "10000")
    assert code == 0 and json.loads(out)["violations"] == []
    code, out = call("lattice-laws", "--lattice", "boolean4")
    assert code == 0 and json.loads(out)["checked"] == "exhaustive"


@pytest.mark.parametrize("argv", [
    [],
    ["eval", "--model", "missing.json", "--formula", "p"],
    ["eval", "--formula", "p"],
    ["bisim-greatest", "--left", "x"],
    ["nope"],
])
def test_usage_errors(argv):
    assert call(*argv)[0] == 2


def test_validation_errors(files, tmp_path):
    assert call("eval", "--model", files["ex22"], "--formula", "<r>(p", "--at", "u")[0] == 2
    assert call("eval", "--model", files["ex22"], "--formula", "p", "--at", "zz")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert call("eval", "--model", bad, "--formula", "p")[0] == 2
    assert call("bisim-greatest", "--left", files["ex33_m"], "--right", files["aut_a"])[0] == 2
    assert call("bisim-greatest", "--left", files["ex33_m"], "--right", files["ex33_mp"],
                "--lattice", "boolean4")[0] == 2


def test_output_file_and_determinism(files, tmp_path):
    dest = tmp_path / "o.json"
    argv = ["bisim-greatest", "--left", files["ex33_m"], "--right", files["ex33_mp"], "--lattice", "lukasiewicz"]
    _, first = call(*argv, "--output", dest)
    _, second = call(*argv)
    assert first == second == dest.read_text()


def test_suite_bundled(bundled, capsys):
    code, out = call("suite", bundled / "manifest.json")
    doc = json.loads(out)
    assert code == 0 and doc["passed"] == doc["total"] > 20
    err = capsys.readouterr().err
    assert err.count("PASS ") == doc["total"] and "FAIL" not in err


def test_suite_edge_cases(tmp_path, bundled):
    empty = tmp_path / "empty.json"
    empty.write_text('{"jobs": []}')
    assert call("suite", empty)[0] == 0
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"jobs": [{"argv": ["eval", "--model", "nowhere.json", "--formula", "p"]}]}))
    assert call("suite", broken)[0] == 2
    failing = tmp_path / "failing.json"
    failing.write_text(json.dumps({"jobs": [{"argv": ["eval", "--model", str(bundled / "ex22.json"),
                                                      "--formula", "p", "--at", "u"], "expect_stdout": "0"}]}))
    assert call("suite", failing)[0] == 1


def test_json_subset():
    assert json_subset({"a": [1]}, {"a": [2, 1], "b": 0})
    assert not json_subset({"a": [3]}, {"a": [2, 1]})
    assert not json_subset({"c": 1}, {"a": 1})


def test_console_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "fuzzbis.cli", "eval", "--model", str(files["ex22"]),
                           "--formula", "<r*>p", "--at", "u"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "9/10\n"
