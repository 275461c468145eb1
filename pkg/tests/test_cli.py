import json
import os
import subprocess
import sys

import pytest

from bgpa import builders
from bgpa.cli import run
from bgpa.graph import graph_to_dict


def call(capsys, *argv):
    code = run(list(argv))
    return code, json.loads(capsys.readouterr().out)


def write_graph(tmp_path, built, name="g.json", **changes):
    data = graph_to_dict(built.graph, built.action.generator_maps() if built.action else None)
    data.update(changes)
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def walk_numbers(obj):
    if isinstance(obj, dict):
        if "tag" in obj:
            yield obj
            return
        for v in obj.values():
            yield from walk_numbers(v)
    elif isinstance(obj, list):
        for v in obj:
            yield from walk_numbers(v)
    elif isinstance(obj, float):
        yield obj


def test_validate_diagonal(capsys):
    code, rep = call(capsys, "validate", "--builder", "diagonal", "--group", "Z2")
    assert code == 0 and rep["status"] == "ok" and rep["schema"] == 1 and rep["seed"] == 0
    assert rep["result"]["delta"] == {"value": "2/1", "float": 2.0, "tag": "exact"}
    assert rep["result"]["mu_times_mu_bar_is_1"]


def test_every_float_is_tagged(capsys):
    _, rep = call(capsys, "report", "--builder", "diagonal", "--group", "Z2", "--samples", "3")
    assert rep["status"] == "ok"
    for x in walk_numbers(rep):
        assert isinstance(x, dict) and (x["tag"] == "exact" or x["tag"].startswith("approx("))


def test_dims_and_weights(capsys):
    _, rep = call(capsys, "dims", "--builder", "diagonal", "--group", "Z2", "--n", "2")
    assert [d["dim"]["value"] for d in rep["result"]["dims"]] == ["2", "8"]
    _, rep = call(capsys, "weights", "--builder", "bh")
    assert rep["result"]["base"] == "+0"
    assert rep["result"]["mu"]["e0"]["value"] == "0/1+1/2*sqrt(6)"


def test_norms_and_amenability(capsys):
    code, rep = call(capsys, "norms", "--builder", "diagonal", "--group", "Z2", "--n", "3")
    assert code == 0 and rep["result"]["chain_holds"]
    code, rep = call(capsys, "amenability", "--builder", "tree", "--radius", "8")
    assert code == 0 and rep["result"]["verdict"] == "NonAmenableCertified"
    code, rep = call(capsys, "amenability", "--builder", "diagonal", "--group", "Z2")
    assert rep["result"]["verdict"] == "AmenableObserved"


def test_hecke_pair(capsys):
    code, rep = call(capsys, "hecke", "--builder", "diagonal", "--pair", "S3/S2")
    assert code == 0 and rep["result"]["double_cosets"] == 2
    assert rep["result"]["normal_subgroup"]["normal"] is False


def test_graded_check(capsys):
    code, rep = call(capsys, "graded-check", "--builder", "diagonal", "--group", "Z2", "--samples", "4")
    assert code == 0 and rep["result"]["ok"]
    code, rep = call(capsys, "graded-check", "--builder", "tree")
    assert code == 2 and rep["error"]["kind"] == "NotFinite"


def test_bratteli(capsys):
    code, rep = call(capsys, "bratteli", "--builder", "multi_edge", "--edges", "3", "--with-group", "--n", "1")
    assert code == 0 and rep["result"]["P"]["trace_consistent"]


def test_missing_file_is_io_error(capsys, tmp_path):
    code, rep = call(capsys, "validate", "--input", str(tmp_path / "nope.json"))
    assert code == 1 and rep["status"] == "error"


def test_malformed_json_is_io_error(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, rep = call(capsys, "validate", "--input", str(p))
    assert code == 1


def test_unknown_field_is_io_error(capsys, tmp_path):
    path = write_graph(tmp_path, builders.multi_edge(2), colour="red")
    code, rep = call(capsys, "validate", "--input", path)
    assert code == 1 and rep["error"]["kind"] == "FormatError"


def test_row_sum_failure_is_domain_error(capsys, tmp_path):
    path = write_graph(tmp_path, builders.diagonal("Z2"), delta="3/1")
    code, rep = call(capsys, "validate", "--input", path)
    assert code == 2 and rep["error"]["kind"] == "RowSumMismatch" and "+0" in rep["error"]["message"]


def test_inconclusive_exit_code(capsys, tmp_path):
    path = write_graph(tmp_path, builders.diagonal("Z2"), delta="3/1")
    code, rep = call(capsys, "amenability", "--input", path)
    assert code == 3 and rep["status"] == "inconclusive"


def test_multi_edge_defaults_to_trivial_group(capsys):
    code, rep = call(capsys, "dims", "--builder", "multi_edge", "--edges", "3")
    assert code == 0 and [d["dim"]["value"] for d in rep["result"]["dims"]] == ["9", "81"]


def test_output_file(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["validate", "--builder", "bh", "--output", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["result"]["ok"]


def test_module_entry_point_and_threads(tmp_path):
    env = dict(os.environ, PA_FORGE_THREADS="1")
    proc = subprocess.run([sys.executable, "-m", "bgpa", "validate", "--builder", "multi_edge"],
                          capture_output=True, text=True, env=env)
    assert proc.returncode == 0 and json.loads(proc.stdout)["status"] == "ok"


@pytest.mark.parametrize("argv", [
    ["report", "--builder", "diagonal", "--group", "Z2", "--seed", "7", "--samples", "3"],
    ["bratteli", "--builder", "bh", "--seed", "3", "--n", "2"],
])
def test_byte_reproducible(argv, capsys):
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == first
