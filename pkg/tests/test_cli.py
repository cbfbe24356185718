import json
import subprocess
import sys

import numpy as np
import pytest

from prodlocc.cli import EXIT_COMPLETION, EXIT_ERROR, EXIT_INCONCLUSIVE, EXIT_OK, dumps, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_sets_list(capsys):
    code, out, _ = run(capsys, "sets", "list")
    names = [x["name"] for x in json.loads(out)["sets"]]
    assert code == EXIT_OK and "eq5" in names and "six-state" in names


def test_build_verify_round_trip(capsys, tmp_path):
    path = tmp_path / "eq5.json"
    assert main(["sets", "build", "eq5", "-o", str(path)]) == EXIT_OK
    code, out, _ = run(capsys, "sets", "verify", str(path))
    rep = json.loads(out)
    assert code == EXIT_OK and rep["orthogonal"] and rep["complete"] and rep["count"] == 81
    # rebuilding from the file gives the same bytes
    again = tmp_path / "again.json"
    main(["sets", "build", "eq5", "-o", str(again)])
    assert path.read_bytes() == again.read_bytes()


def test_verify_flags_non_orthogonal(capsys, tmp_path):
    path = tmp_path / "bad.json"
    main(["sets", "build", "eq2", "-o", str(path)])
    data = json.loads(path.read_text())
    data["states"].append(data["states"][0])
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "sets", "verify", str(path))
    assert code == EXIT_ERROR and not json.loads(out)["orthogonal"]
    code, _, err = run(capsys, "analyze", str(path), "--partition", "1|2,3")
    assert code == EXIT_ERROR and "not orthogonal" in err


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", "eq2", "--partition", "1|2,3")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["status"] == "indistinguishable"
    assert rep["tolerances"] == {"tol": 1e-9, "rank_tol": 1e-8}


def test_analyze_deterministic(capsys):
    a = run(capsys, "analyze", "eq2", "--partition", "1,2|3")[1]
    b = run(capsys, "analyze", "eq2", "--partition", "1,2|3")[1]
    assert a == b


def test_bad_partition_and_unknown_set(capsys):
    code, _, err = run(capsys, "analyze", "eq2", "--partition", "1|2")
    assert code == EXIT_ERROR and "error" in err
    code, _, err = run(capsys, "analyze", "nosuchset", "--partition", "1|2")
    assert code == EXIT_ERROR
    code, _, err = run(capsys, "analyze", "eq3", "--partition", "1|2|3")
    assert code == EXIT_ERROR and "--m" in err


def test_sweep_k(capsys):
    code, out, _ = run(capsys, "sweep", "eq2", "--k", "2")
    assert code == EXIT_OK and len(json.loads(out)["verdicts"]) == 3
    code, _, _ = run(capsys, "sweep", "eq2", "--k", "5")
    assert code == EXIT_ERROR


def test_classify(capsys):
    code, out, _ = run(capsys, "classify", "eq2")
    assert code == EXIT_OK and json.loads(out)["class"] == "iii"
    code, _, _ = run(capsys, "classify", "six-state")
    assert code == EXIT_INCONCLUSIVE
    code, _, _ = run(capsys, "classify", "eq5")
    assert code == EXIT_ERROR


def test_threshold(capsys):
    code, out, _ = run(capsys, "threshold", "eq5")
    assert code == EXIT_OK and json.loads(out)["threshold"] == 3


def test_resource(capsys):
    code, out, _ = run(capsys, "resource", "eq3", "--m", "4", "--d", "3")
    assert code == EXIT_OK
    assert sorted(map(tuple, json.loads(out)["valid_pairs"])) == [(1, 2), (1, 4), (2, 3), (3, 4)]


def test_bound_ent(capsys):
    code, out, _ = run(capsys, "bound-ent")
    rep = json.loads(out)
    assert code == EXIT_OK and rep["success"]
    assert rep["E_fin"]["kind"] == "ppt-entangled"
    assert rep["E_in"]["kind"] == rep["E_com"]["kind"] == "separable"


def test_bound_ent_unitary_file(capsys, tmp_path):
    path = tmp_path / "u.json"
    path.write_text(json.dumps([[[1, 0], [0, 0], [0, 0]], [[0, 0], [1, 0], [0, 0]], [[0, 0], [0, 0], [1, 0]]]))
    code, out, _ = run(capsys, "bound-ent", "--unitary", str(path))
    assert code == EXIT_INCONCLUSIVE and json.loads(out)["E_fin"]["kind"] == "undetected"
    flat = tmp_path / "flat.json"
    flat.write_text(json.dumps([[1, 0], [0, 0], [0, 0], [0, 0], [1, 0], [0, 0], [0, 0], [0, 0], [1, 0]]))
    assert run(capsys, "bound-ent", "--unitary", str(flat))[0] == EXIT_INCONCLUSIVE


@pytest.mark.parametrize("text", ["not json", "[[1, 0], [0, 1]]", '[["a", "b"]]', "[[[2, 0], [0, 0], [0, 0]]]"])
def test_bound_ent_malformed_unitary(capsys, tmp_path, text):
    path = tmp_path / "u.json"
    path.write_text(text)
    code, _, err = run(capsys, "bound-ent", "--unitary", str(path))
    assert code == EXIT_ERROR and "error" in err


def test_bound_ent_completion_failure(capsys, monkeypatch):
    from prodlocc import entanglement

    def fail(*a, **k):
        raise entanglement.CompletionError("budget")

    monkeypatch.setattr(entanglement, "complete_product_basis", fail)
    assert run(capsys, "bound-ent")[0] == EXIT_COMPLETION


def test_nonpositive_tolerance(capsys):
    assert run(capsys, "analyze", "eq2", "-p", "1|2,3", "--tol", "0")[0] == EXIT_ERROR


def test_dumps_format():
    assert dumps({"b": 0.1, "a": [1, True, None]}) == '{"a": [1, true, null], "b": 0.10000000000000001}\n'
    assert dumps({"x": np.float64(1.0)}) == '{"x": 1}\n'


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "prodlocc", "sets", "list"], capture_output=True, text=True)
    assert r.returncode == 0 and "eq5" in r.stdout
