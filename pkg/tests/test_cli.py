import json
import math
import subprocess
import sys

import pytest

from qdilation.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_norm(capsys):
    code, out, _ = run(capsys, "norm", "--angle", "1/3")
    doc = json.loads(out)
    assert code == 0
    assert doc["norm"] == pytest.approx(1 + math.sqrt(3), abs=1e-12)
    assert doc["c"] == pytest.approx(2 * math.sqrt(3) - 2, abs=1e-12)
    assert doc["metadata"]["config"]["angle"] == "1/3"
    assert "version" in doc["metadata"]


@pytest.mark.parametrize("argv", [["norm", "--angle", "0.333"], ["norm"], ["bogus"], ["butterfly", "--max", "0"]])
def test_usage_errors(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_obstruct_exit_codes(capsys):
    assert run(capsys, "obstruct", "--angle", "1/3", "--r", "1.40")[0] == 0
    assert run(capsys, "obstruct", "--angle", "2/5", "--r", "1.5")[0] == 0
    assert run(capsys, "obstruct", "--angle", "0/1", "--r", "1")[0] == 1


def test_dilate_verify_and_out(capsys, tmp_path):
    path = tmp_path / "cert.json"
    code, out, _ = run(capsys, "dilate", "--from", "1/3", "--to", "0/1", "--verify", "--out", str(path))
    doc = json.loads(out)
    assert code == 0
    assert doc["verification"]["passed"]
    assert doc["dimension"] == 9
    cert = json.loads(path.read_text(encoding="utf-8"))
    assert cert["gamma"] == "2/3"


def test_norm_silver_convergent(capsys):
    code, out, _ = run(capsys, "norm", "--angle", "2378/5741")
    assert code == 0 and json.loads(out)["c"] == pytest.approx(1.5437772, abs=1e-7)


def test_norm_trivial(capsys):
    doc = json.loads(run(capsys, "norm", "--angle", "0/1")[1])
    assert (doc["norm"], doc["c"]) == (4.0, 1.0)


def test_dilate_identity_and_half_turn(capsys):
    doc = json.loads(run(capsys, "dilate", "--from", "1/2", "--to", "1/2")[1])
    assert doc["c"] == pytest.approx(1.0) and doc["gamma"] == "0/1"
    code, out, _ = run(capsys, "dilate", "--from", "1/2", "--to", "0/1", "--verify")
    doc = json.loads(out)
    assert code == 0 and doc["c"] == pytest.approx(math.sqrt(2), abs=1e-12)


def test_enclose_custom_near_third(capsys):
    doc = json.loads(run(capsys, "enclose", "--target", "custom:0.3333333333", "--tol", "1e-6")[1])
    assert abs(doc["center"] - (2 * math.sqrt(3) - 2)) <= 0.39 * 2 * math.pi * 1e-10 + doc["radius"] + 1e-9


def test_dilate_size_error(capsys, monkeypatch):
    monkeypatch.setenv("QDIL_MAX_DIM", "4")
    code, _, err = run(capsys, "dilate", "--from", "1/3", "--to", "0/1")
    assert code == 2 and "exceeds" in err


def test_enclose(capsys):
    code, out, _ = run(capsys, "enclose", "--target", "golden", "--tol", "1e-4")
    doc = json.loads(out)
    assert code == 0
    assert doc["radius"] <= 1e-4
    assert doc["metadata"]["tolerances"]["requested"] == 1e-4


def test_enclose_capacity(capsys):
    code, _, err = run(capsys, "enclose", "--target", "silver", "--tol", "1e-10", "--max-denominator", "1000")
    assert code == 3 and "achievable" in err


def test_butterfly_bytes_stable_across_workers(capsys, tmp_path):
    outs = []
    for workers in ("1", "4"):
        path = tmp_path / f"b{workers}.csv"
        code, out, _ = run(capsys, "butterfly", "--max-denominator", "12", "--workers", workers, "--out", str(path))
        assert code == 0
        assert json.loads(out)["summary"]["angles"] == 46
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].startswith(b"n,p,theta,band,lo,hi,norm,c\n")


def test_butterfly_small_sweeps(capsys):
    out = run(capsys, "butterfly", "--max", "1")[1]
    assert out.splitlines()[1].startswith("1,0,0,1,")
    assert len(out.splitlines()) == 2
    rows = run(capsys, "butterfly", "--max", "3")[1].splitlines()[1:]
    assert len({tuple(r.split(",")[:2]) for r in rows}) == 4


def test_butterfly_stdout_json(capsys):
    code, out, err = run(capsys, "butterfly", "--max", "3", "--format", "json")
    rows = json.loads(out)
    assert code == 0 and len(rows) == 1 + 2 + 2 * 3
    assert json.loads(err)["summary"]["rows"] == len(rows)


def test_workers_env_override(capsys, monkeypatch):
    monkeypatch.setenv("QDIL_WORKERS", "2")
    code, _, err = run(capsys, "butterfly", "--max", "4")
    assert code == 0
    monkeypatch.setenv("QDIL_WORKERS", "many")
    code, _, err = run(capsys, "butterfly", "--max", "4")
    assert code == 2 and "QDIL_WORKERS" in err


def test_unwritable_output(capsys, tmp_path):
    code, _, err = run(capsys, "butterfly", "--max", "2", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 1 and "cannot write" in err


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and json.loads(out)["passed"]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qdilation", "norm", "--angle", "2/5"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["norm"] == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-12)
