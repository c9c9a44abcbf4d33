import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from thompson_lie import __version__
from thompson_lie.cli import main, report_schema, run
from thompson_lie.real_forms import catalog_file_text


def run_json(tmp_path, argv, name="r.json"):
    out = tmp_path / name
    code, report = run(argv + ["--json", str(out)])
    return code, json.loads(out.read_text()) if out.exists() else None


def strip_time(text):
    d = json.loads(text)
    d.pop("wall_time")
    return json.dumps(d, sort_keys=True)


def test_no_arguments_prints_usage_and_exits_2(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "thompson_lie"], capture_output=True, text=True)
    assert proc.returncode == 2 and "usage" in proc.stderr


def test_version_flag(capsys):
    code, _ = run(["--version"])
    assert code == 0 and __version__ in capsys.readouterr().out


def test_satake_file_su31(tmp_path):
    path = tmp_path / "su31.json"
    path.write_text(catalog_file_text("su31"))
    code, rep = run_json(tmp_path, ["satake", "--file", str(path)])
    assert code == 0
    assert rep["result"]["inner_class"] == "identity"
    assert rep["result"]["tau_d"]["matrix"]
    assert rep["status"] == "pass"


def test_thompson_example(tmp_path):
    code, rep = run_json(tmp_path, ["thompson", "--group", "sl2r", "--lambda", "1.0,0.2,0.2", "--seed", "1"])
    assert code == 0
    run0 = rep["result"]["runs"][0]
    assert run0["verdict"] == "agree-infeasible" and run0["oracle"] == "infeasible"
    assert rep["seed"] == 1 and rep["config"]["optimizer"]["seed"] == 1


def test_thompson_single_picture_and_higher_rank(tmp_path):
    code, rep = run_json(tmp_path, ["thompson", "--group", "sl3r", "--picture", "additive",
                                    "--lambda", "2,-1,-1;1,1,-2"])
    assert code == 0 and rep["result"]["runs"][0]["decision"] == "feasible"


def test_thompson_sweep_and_config(tmp_path):
    csv = tmp_path / "sweep.csv"
    csv.write_text("# r1,r2,r3\n0.5,0.5,0.5\n1.0,0.2,0.2\n")
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"restarts": 8}))
    code, rep = run_json(tmp_path, ["thompson", "--group", "su21", "--sweep", str(csv), "--config", str(cfg)])
    assert code == 0
    assert [r["verdict"] for r in rep["result"]["runs"]] == ["agree-feasible", "agree-infeasible"]
    assert rep["config"]["optimizer"]["restarts"] == 8


@pytest.mark.parametrize("argv,field", [
    (["thompson", "--group", "sl2r", "--lambda", "1,x"], "--lambda"),
    (["thompson", "--group", "nope", "--lambda", "1"], "--group"),
    (["thompson", "--group", "sl2r", "--lambda", "1,1", "--config", '{"restart": 2}'], "--config"),
    (["thompson", "--group", "sl3r", "--lambda", "-1,0,1"], "--lambda"),
    (["iwasawa", "--matrix", "[[1, 2]]"], "--matrix"),
    (["iwasawa", "--matrix", "[[1, 2], [3"], "--matrix"),
    (["iwasawa", "--matrix", "[[2, 0], [0, 2]]"], "--matrix"),
    (["cartan", "--group", "sl2r", "--matrix", "[[[0, 1], [0, 0]], [[0, 0], [0, -1]]]"], "--matrix"),
    (["satake", "--name", "so8"], "--name"),
    (["realform", "--series", "A", "--rank", "3", "--d", "2,1,3"], "--d"),
    (["roots", "--series", "G", "--rank", "2"], "--series"),
])
def test_usage_errors_name_the_field(capsys, argv, field):
    code, _ = run(argv)
    assert code == 2
    assert field in capsys.readouterr().err


def test_malformed_satake_file_names_field(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"series": "A", "rank": 3, "black": [2]}))
    code, _ = run(["satake", "--file", str(path)])
    assert code == 2 and "arrows" in capsys.readouterr().err


def test_argparse_errors_exit_2():
    assert run(["thompson", "--seed", "-3"])[0] == 2
    assert run(["frobnicate"])[0] == 2


def test_iwasawa_and_cartan(tmp_path):
    code, rep = run_json(tmp_path, ["iwasawa", "--matrix", "[[2, 1], [1, 1]]"])
    assert code == 0
    b = np.array(rep["result"]["b"])[..., 0]
    k = np.array(rep["result"]["k"])
    k = k[..., 0] + 1j * k[..., 1]
    assert np.allclose(b @ k, [[2, 1], [1, 1]])
    code, rep = run_json(tmp_path, ["cartan", "--group", "sl2r", "--matrix", "[[2, 1], [1, 1]]"])
    assert code == 0 and rep["status"] == "pass"


def test_roots_and_realform(tmp_path):
    code, rep = run_json(tmp_path, ["roots", "--series", "B", "--rank", "2"])
    assert code == 0 and len(rep["checks"]) == 3
    code, rep = run_json(tmp_path, ["realform", "--series", "A", "--rank", "3"])
    assert code == 0 and {f["inner_class"] for f in rep["result"]["forms"]} == {"identity", "[3,2,1]"}


def test_sigma_and_poisson_checks(tmp_path):
    code, rep = run_json(tmp_path, ["sigma-check", "--group", "su31", "--samples", "5"])
    assert code == 0 and len(rep["checks"]) == 10
    code, rep = run_json(tmp_path, ["poisson-check", "--group", "sl2c", "--samples", "3", "--seed", "3"])
    assert code == 0 and rep["config"]["tau_d_forms"] == ["sl2r", "su11"]


def test_failed_check_exits_1(tmp_path):
    code, rep = run_json(tmp_path, ["sigma-check", "--group", "sl2r", "--samples", "3", "--tol", "1e-30"])
    assert code == 1 and rep["status"] == "fail"


def test_reports_validate_and_are_deterministic(tmp_path):
    argv = ["thompson", "--group", "su21", "--lambda", "0.5,0.4,0.3", "--seed", "4"]
    run_json(tmp_path, argv, "a.json")
    run_json(tmp_path, argv, "b.json")
    a, b = (tmp_path / "a.json").read_text(), (tmp_path / "b.json").read_text()
    assert strip_time(a) == strip_time(b)
    jsonschema.validate(json.loads(a), report_schema())


def test_json_to_stdout(capsys):
    code, _ = run(["roots", "--series", "A", "--rank", "1", "--json", "-"])
    out = capsys.readouterr().out
    assert code == 0 and json.loads(out)["command"] == "roots"
