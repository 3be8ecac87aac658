import json
import subprocess
import sys

import pytest

from cochain_lab.cli import main
from cochain_lab.config import ConfigError, parse_config
from cochain_lab.reports import Report, emit_report


def run(tmp_path, capsys, doc, *extra, name="cfg.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    task = extra[0] if extra and not extra[0].startswith("-") else None
    if task is None:
        task = doc["task"] if isinstance(doc, dict) else "cohomology"
        args = [task, "--config", str(path), *extra]
    else:
        args = [task, "--config", str(path), *extra[1:]]
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def Z2_REG(task="cohomology", **params):
    return {"task": task, "group": {"type": "table", "mul": [[0, 1], [1, 0]]}, "module": {"kind": "regular"},
            "params": params}


def test_minimal_cohomology_config(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, Z2_REG())
    rep = json.loads(out)
    assert code == 0 and rep["status"] == "pass"
    assert rep["results"]["0"]["dim_H"] == 1 and rep["results"]["1"]["dim_H"] == 0
    assert "timing_seconds" not in rep


def test_unknown_task(tmp_path, capsys):
    doc = Z2_REG()
    doc["task"] = "frobnicate"
    code, out, err = run(tmp_path, capsys, doc, "cohomology")
    assert code == 2 and json.loads(err)["error"]["code"] == "E_TASK" and out == ""


def test_task_mismatch(tmp_path, capsys):
    code, _, err = run(tmp_path, capsys, Z2_REG(), "group-info")
    assert code == 2 and json.loads(err)["error"]["code"] == "E_TASK"


def test_degree_cap(tmp_path, capsys):
    code, _, err = run(tmp_path, capsys, Z2_REG(degrees=[7]))
    e = json.loads(err)["error"]
    assert code == 2 and e["code"] == "E_CAP" and e["cap"] == 3


def test_flat_cap(tmp_path, capsys):
    doc = {"task": "cohomology", "group": {"type": "named", "name": "A4"}, "module": {"kind": "regular"},
           "params": {"degrees": [3], "flat_cap": 1000}}
    code, _, err = run(tmp_path, capsys, doc)
    assert code == 2 and json.loads(err)["error"]["code"] == "E_CAP"


def test_parse_errors(tmp_path, capsys):
    code, _, err = run(tmp_path, capsys, "{not json", "cohomology")
    assert code == 2 and json.loads(err)["error"]["code"] == "E_PARSE"
    code, _, err = run(tmp_path, capsys, "task = [", "cohomology", name="bad.toml")
    assert code == 2 and json.loads(err)["error"]["code"] == "E_PARSE"


def test_spec_errors(tmp_path, capsys):
    doc = {"task": "cohomology", "group": {"type": "table", "mul": [[0, 1], [0, 1]]}}
    code, _, err = run(tmp_path, capsys, doc)
    assert code == 2 and json.loads(err)["error"]["code"] == "E_SPEC"
    doc = {"task": "cohomology", "group": {"type": "named", "name": "Z2"},
           "module": {"kind": "matrices", "entries": {"1": [[1, 1], [0, -1]]}}}
    code, _, err = run(tmp_path, capsys, doc)
    assert code == 2 and json.loads(err)["error"]["code"] == "E_SPEC"


def test_randomized_tasks_need_seed():
    doc = json.dumps({"task": "homotopy-check", "group": {"type": "named", "name": "S3"}})
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.code == "E_SEED"
    assert parse_config(doc, seed=4).seed == 4


def test_split_check_z3_complement(tmp_path, capsys):
    doc = {"task": "split-check", "group": {"type": "named", "name": "Z3"},
           "module": {"kind": "regular", "part": "complement"}}
    code, out, _ = run(tmp_path, capsys, doc)
    rep = json.loads(out)
    assert code == 0 and rep["results"]["residual"] == "0"
    assert rep["results"]["dim_H"] == {"0": 0, "1": 0, "2": 0, "3": 0}


def test_split_check_trivial_module_fails(tmp_path, capsys):
    doc = {"task": "split-check", "group": {"type": "named", "name": "Z3"}, "module": {"kind": "trivial"}}
    code, out, _ = run(tmp_path, capsys, doc)
    rep = json.loads(out)
    assert code == 1 and rep["status"] == "fail" and rep["error"]["type"] == "SplittingError"


def test_homotopy_check_toml(tmp_path, capsys):
    doc = """
task = "homotopy-check"
seed = 7
[group]
type = "named"
name = "S3"
[module]
kind = "rotation"
[params]
degrees = [0, 1, 2]
subgroup = {generators = [2]}
"""
    code, out, _ = run(tmp_path, capsys, doc, "homotopy-check", name="cfg.toml")
    rep = json.loads(out)
    assert code == 0 and rep["results"]["residual"] == "0" and rep["seed"] == 7


def test_affine_fixed_fp_translation(tmp_path, capsys):
    doc = {"task": "affine-fixed", "seed": 1, "group": {"type": "fp", "generators": ["a"], "relators": []},
           "module": {"matrices": [[[1]]]}, "params": {"cocycle": [[1]], "restarts": 2, "iterations": 100}}
    code, out, _ = run(tmp_path, capsys, doc)
    rep = json.loads(out)
    assert code == 0 and rep["results"]["fixed_set_empty"] is True
    assert rep["results"]["displacement"]["value"] == pytest.approx(1.0)


def test_fp_h1_tasks(tmp_path, capsys):
    doc = {"task": "fp-h1", "group": {"type": "fp", "generators": ["a", "b"], "relators": ["abAB"]},
           "params": {"expected_dim_H1": 2}}
    code, out, _ = run(tmp_path, capsys, doc)
    assert code == 0 and json.loads(out)["results"]["dim_H1"] == 2
    doc["params"]["expected_dim_H1"] = 1
    code, out, _ = run(tmp_path, capsys, doc)
    assert code == 1 and json.loads(out)["witness"] == {"expected": 1, "got": 2}


def test_budget_exhausted_report(tmp_path, capsys):
    doc = {"task": "approximation-suite", "seed": 3, "group": {"type": "named", "name": "Z4"},
           "module": {"kind": "rotation"}, "params": {"max_steps": 0}}
    code, out, _ = run(tmp_path, capsys, doc)
    rep = json.loads(out)
    assert code == 3 and rep["status"] == "budget-exhausted" and rep["best_bound"] > 0


def test_other_tasks_pass(tmp_path, capsys):
    docs = [
        {"task": "group-info", "group": {"type": "permutation", "degree": 3, "generators": [[1, 0, 2], [1, 2, 0]]},
         "params": {"sigma": [1, 2]}},
        {"task": "fc-data", "group": {"type": "named", "name": "D8"}},
        {"task": "commutant", "group": {"type": "named", "name": "S3"}, "module": {"kind": "rotation"}},
        {"task": "restriction-check", "seed": 2, "group": {"type": "named", "name": "S3"},
         "module": {"kind": "rotation"}, "params": {"subgroup": {"generators": [2]}, "degrees": [1, 2]}},
        {"task": "approximation-suite", "seed": 5, "group": {"type": "named", "name": "S3"},
         "module": {"kind": "rotation", "p": "3"}},
        {"task": "appendix-suite", "seed": 6, "group": {"type": "named", "name": "Z3"},
         "module": {"kind": "regular"}, "params": {"samples": 100}},
    ]
    for doc in docs:
        code, out, _ = run(tmp_path, capsys, doc)
        assert code == 0, out
        assert json.loads(out)["status"] == "pass"


def test_deterministic_bytes(tmp_path, capsys):
    doc = {"task": "approximation-suite", "seed": 11, "group": {"type": "named", "name": "D8"},
           "module": {"kind": "rotation"}}
    outs = [run(tmp_path, capsys, doc)[1] for _ in range(2)]
    assert outs[0] == outs[1]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for target in (a, b):
        run(tmp_path, capsys, doc, "approximation-suite", "--out", str(target))
    assert a.read_bytes() == b.read_bytes() == outs[0].encode()


def test_seed_override_changes_hash(tmp_path, capsys):
    doc = {"task": "appendix-suite", "seed": 1, "group": {"type": "named", "name": "Z2"},
           "params": {"samples": 10}}
    h1 = json.loads(run(tmp_path, capsys, doc)[1])["config_hash"]
    h2 = json.loads(run(tmp_path, capsys, doc, "appendix-suite", "--seed", "2")[1])["config_hash"]
    assert h1 != h2


def test_table_and_timing(tmp_path, capsys):
    code, out, _ = run(tmp_path, capsys, Z2_REG(), "cohomology", "--format", "table", "--timing")
    assert code == 0 and out.startswith("task     cohomology") and "time" in out


def test_report_serialisation():
    r = Report("x", "h", "pass", {"v": float("inf"), "f": __import__("fractions").Fraction(1, 3)})
    assert emit_report(r) == '{"config_hash":"h","mode":"exact","results":{"f":"1/3","v":"inf"},' \
                             '"seed":null,"status":"pass","task":"x"}\n'


def test_console_entry_point(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(Z2_REG()))
    proc = subprocess.run([sys.executable, "-m", "cochain_lab.cli", "cohomology", "--config", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["status"] == "pass"
