import json
import math

import numpy as np
import pytest

from qsforms.cli import main
from qsforms.io import dumps, matrix_from_json, matrix_to_json


def write(path, obj):
    path.write_text(json.dumps(obj))
    return path


def form_doc(F, J, **extra):
    F, J = np.asarray(F, dtype=complex), np.asarray(J, dtype=complex)
    return {"m": F.shape[0], "d": J.shape[0], "F": matrix_to_json(F), "J": matrix_to_json(J), **extra}


def test_matrix_json_roundtrip(rng):
    M = rng.standard_normal((3, 2)) + 1j * rng.standard_normal((3, 2))
    back = matrix_from_json(json.loads(json.dumps(matrix_to_json(M))), 3, 2, "M")
    np.testing.assert_array_equal(back, M)


def test_dumps_keeps_17_digits():
    assert json.loads(dumps({"x": 0.1 + 0.2}))["x"] == 0.1 + 0.2
    assert "0.30000000000000004" in dumps([0.1 + 0.2])


def test_check_identity_passes(tmp_path, capsys):
    f = write(tmp_path / "id.json", form_doc(np.eye(2), np.eye(2), theta=0.0, gamma=0.0))
    assert main(["check", str(f)]) == 0
    assert json.loads(capsys.readouterr().out)["passes"] is True


def test_check_jordan_exits_2_with_witness(tmp_path, capsys):
    f = write(tmp_path / "jordan.json", form_doc([[0, 1], [0, 0]], np.eye(2), theta=1.0, gamma=0.0))
    assert main(["check", str(f), "--quiet"]) == 2
    out = json.loads(capsys.readouterr().out)
    assert out["passes"] is False and len(out["witness"]) == 2


def test_malformed_input_names_field(tmp_path, caplog):
    doc = form_doc(np.eye(2), np.eye(2))
    doc["F"] = doc["F"][:3]
    f = write(tmp_path / "bad.json", doc)
    assert main(["check", str(f)]) == 1
    assert "F" in caplog.text


def test_missing_file_exits_1(tmp_path):
    assert main(["check", str(tmp_path / "absent.json")]) == 1


def test_resolvent_identity_half(tmp_path, capsys):
    f = write(tmp_path / "id.json", form_doc(np.eye(2), np.eye(2)))
    assert main(["resolvent", str(f), "--lambda", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    R = matrix_from_json(doc["R"], 2, 2, "R")
    np.testing.assert_allclose(R, 0.5 * np.eye(2), atol=1e-15)


def test_demo_dirichlet_csv(tmp_path):
    out = tmp_path / "report.csv"
    code = main(["demo", "dirichlet-1d", "--d", "127", "--k-max", "16", "--lambda", "1", "--csv", "--out", str(out),
                 "--quiet"])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "n,sector_margin,defect_max,strong_err_max,op_norm_err,cea_lhs,cea_rhs"
    col = [float(line.split(",")[4]) for line in lines[1:]]
    assert len(col) == 4 and all(b < a for a, b in zip(col, col[1:]))


def test_converge_is_deterministic(tmp_path):
    spec = write(tmp_path / "exp.json", {"kind": "rotating-subspaces", "d": 16, "N": 4, "lambda": 1.0,
                                         "theta": math.atan(0.5), "gamma": 0.0, "seed": 2})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["converge", "--spec", str(spec), "--json", "--out", str(a), "--quiet"]) == 0
    assert main(["converge", "--spec", str(spec), "--json", "--out", str(b), "--quiet"]) == 0
    assert a.read_text() == b.read_text()


def test_semigroup_and_cea_subcommands(tmp_path):
    spec = write(tmp_path / "exp.json", {"kind": "dirichlet-1d", "d": 31, "N": 3, "lambda": 1.0, "theta": 0.0,
                                         "gamma": 0.0, "seed": 0})
    out = tmp_path / "sg.csv"
    assert main(["semigroup", "--spec", str(spec), "--t-max", "1", "--t-points", "9", "--csv", "--out", str(out),
                 "--quiet"]) == 0
    assert out.read_text().splitlines()[0] == "n,probe_index,sup_err"
    cea = tmp_path / "cea.json"
    assert main(["cea", "--spec", str(spec), "--json", "--out", str(cea), "--quiet"]) == 0
    assert all(r["holds"] for r in json.loads(cea.read_text())["records"])


@pytest.mark.parametrize("theta0, code", [(0.2, 0), (0.7, 2)])
def test_absorption_exit_codes(tmp_path, theta0, code):
    spec = write(tmp_path / "abs.json", {"kind": "absorption", "d": 31, "N": 3, "lambda": 1.0, "theta": 0.5,
                                         "gamma": 0.0, "theta0": theta0, "seed": 0})
    assert main(["converge", "--spec", str(spec), "--quiet", "--out", str(tmp_path / "r.csv")]) == code
