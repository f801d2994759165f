import csv
import io
import json

import numpy as np
import pytest

from anglemetric.cli import RunConfig, main
from anglemetric.lie.algebra import ConfigError


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_verify_ell1_suite(capsys):
    rc, out, _ = run(capsys, "verify", "--suite", "ell1")
    assert rc == 0
    table = rows(out)
    assert len(table) == 9
    assert all(r["status"] == "PASS" for r in table)
    assert {r["suite"] for r in table} == {"ell1"}
    assert "\r" not in out


def test_verify_lie_suite_json(capsys):
    rc, out, _ = run(capsys, "verify", "--suite", "lie", "--format", "json")
    payload = json.loads(out)
    assert rc == 0 and payload["failed"] == 0
    assert payload["rows"][0]["computed"] == "(1;1;1/2)"


def test_verify_unknown_suite_is_empty(capsys):
    rc, out, _ = run(capsys, "verify", "--suite", "nothing")
    assert rc == 0 and out == "suite,case,expected,computed,tolerance,status\n"


def test_dist_l1(capsys):
    rc, out, _ = run(capsys, "dist", "--space", "z2-l1", "--a", "1,0", "--b", "2,1")
    (row,) = rows(out)
    assert rc == 0
    assert float(row["s"]) == pytest.approx(0.5, abs=0.02)
    assert float(row["exact"]) == 0.5
    assert row["status"] == "ok"


def test_dist_beyond_horizon_is_flagged(capsys):
    rc, out, _ = run(capsys, "dist", "--space", "h3-word", "--a", "1,0,0", "--b", "0,1,0",
                     "--r-min", "50", "--r-max", "100", "--radius", "10")
    (row,) = rows(out)
    assert rc == 0 and row["status"] == "horizon" and row["saturated"] == "1"


def test_scan_matrix(capsys):
    rc, out, err = run(capsys, "scan", "--group", "h3")
    assert rc == 0
    table = rows(out)
    assert len(table) == 5
    labels = [r["direction"] for r in table]
    T = np.array([[float(r[l]) for l in labels] for r in table])
    assert np.allclose(T, T.T) and (np.diag(T) == 0).all()
    assert "components at theta=0.3" in err


def test_scan_z2_json(capsys):
    rc, out, _ = run(capsys, "scan", "--group", "z2-l2", "--dirs", "1,0;0,1;1,1", "--format", "json")
    payload = json.loads(out)
    assert rc == 0 and len(payload["rows"]) == 3
    assert payload["theta"] == 0.3


def test_walk_rows(capsys):
    rc, out, _ = run(capsys, "walk", "--group", "z1", "--steps", "1;-1", "--probs", "3/4,1/4", "--length", "2000",
                     "--seeds", "0,1")
    assert rc == 0
    table = rows(out)
    assert [r["seed"] for r in table] == ["0"] * 3 + ["1"] * 3
    assert all(r["rng"] == "PCG64" for r in table)


def test_walk_without_drift_is_rejected(capsys):
    rc, _, err = run(capsys, "walk", "--group", "z1", "--steps", "1;-1", "--length", "100")
    assert rc == 1 and err.startswith("rejected:")


def test_walk_independent_of_worker_count(capsys):
    args = ["walk", "--group", "h3", "--steps", "1,0,0;0,1,0;-1,0,0", "--probs", "1/2,1/4,1/4",
            "--length", "1500", "--seeds", "0,1,2"]
    _, one, _ = run(capsys, *args, "--workers", "1")
    _, three, _ = run(capsys, *args, "--workers", "3")
    assert one == three


def test_lie_check_valid(tmp_path, capsys):
    path = tmp_path / "h3.json"
    path.write_text(json.dumps({"layers": [2, 1], "brackets": [[0, 1, 2, 1]]}))
    rc, out, _ = run(capsys, "lie-check", str(path))
    table = {r["check"]: r["result"] for r in rows(out)}
    assert rc == 0
    assert table["scales"] == "(1;1)"
    assert float(table["bracket_constant_M"]) == pytest.approx(2 ** 0.5, abs=1e-6)
    assert float(table["expansion_constant_Q"]) == 2


def test_lie_check_grading_violation(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"layers": [2, 1], "brackets": [[0, 1, 2, 1], [0, 2, 1, 1]]}))
    rc, out, _ = run(capsys, "lie-check", str(path))
    assert rc == 1 and "violating triple" in out


def test_config_errors_report_position(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{\n  "space": "z2-l1",\n "b": "x,y",\n  "a": "1,0"\n}\n')
    rc, _, err = run(capsys, "dist", "--config", str(cfg))
    assert rc == 2
    assert "line 3, column 2" in err and "field 'b'" in err
    cfg.write_text('{\n  "space": "z2-l1",\n  "a": "1,0",\n  "b": "1,1" "c"\n}\n')
    rc, _, err = run(capsys, "dist", "--config", str(cfg))
    assert rc == 2 and "line 4, column 14" in err


def test_bad_flags_exit_2(capsys):
    assert run(capsys, "dist", "--space", "mars")[0] == 2
    assert run(capsys, "dist", "--a", "1,0")[0] == 2
    assert run(capsys, "walk", "--steps", "1", "--workers", "0")[0] == 2


def test_budget_exit_3(capsys):
    cfg_args = ["scan", "--group", "h3", "--radius", "300"]
    rc, _, err = run(capsys, *cfg_args)
    assert rc == 3 and "budget" in err


def test_normalized_is_idempotent():
    cfg = RunConfig.from_dict({"subcommand": "walk", "steps": "1,0;0,1", "probs": "1/2, 0.5", "seeds": "3,4"})
    once = cfg.normalized()
    assert RunConfig.from_dict(once).normalized() == once
    assert once["probs"] == ["1/2", "1/2"]
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"subcommand": "walk", "colour": "red"})


def test_out_file(tmp_path, capsys):
    target = tmp_path / "t.csv"
    rc, out, _ = run(capsys, "dist", "--a", "1,0", "--b", "1,1", "--out", str(target))
    assert rc == 0 and out == ""
    assert target.read_bytes().count(b"\n") == 2 and b"\r" not in target.read_bytes()
