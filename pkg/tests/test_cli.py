import json
import subprocess
import sys

import pytest

from llstar.cli import build_parser, main


def run(*args):
    return subprocess.run([sys.executable, "-m", "llstar", *args], capture_output=True, text=True)


def test_study_success(tmp_path):
    out = tmp_path / "i1.csv"
    r = run("study", "--case", "i", "--p", "1", "--levels", "2..4", "--out", str(out))
    assert r.returncode == 0, r.stderr
    assert out.exists() and out.with_suffix(".json").exists()
    assert json.loads(out.with_suffix(".json").read_text())["passed"] is True
    assert r.stdout.startswith("level,h,ndof")


def test_study_band_failure_exit_code(tmp_path):
    # two coarse levels are pre-asymptotic for p = 3
    out = tmp_path / "i3.csv"
    code = main(["study", "--case", "i", "--p", "3", "--levels", "0..1", "--out", str(out)])
    assert code == 2
    assert json.loads(out.with_suffix(".json").read_text())["passed"] is False


def test_study_error_exit_code(tmp_path, capsys):
    code = main(["study", "--case", "i", "--p", "7", "--out", str(tmp_path / "x.csv")])
    assert code == 1
    assert "p must lie" in capsys.readouterr().err


def test_quad_degree_override(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["study", "--case", "general", "--p", "1", "--levels", "1..2"]
    code_a = main(base + ["--out", str(a)])
    code_b = main(base + ["--out", str(b), "--quad-degree", "20"])
    assert code_a == code_b != 1
    ea = [float(x.split(",")[3]) for x in a.read_text().splitlines()[1:]]
    eb = [float(x.split(",")[3]) for x in b.read_text().splitlines()[1:]]
    assert ea == pytest.approx(eb, rel=1e-6)


def test_level_parsing():
    p = build_parser()
    assert p.parse_args(["study", "--case", "ii", "--p", "0", "--levels", "2..6", "--out", "x"]).levels == (2, 6)
    assert p.parse_args(["study", "--case", "ii", "--p", "0", "--levels", "3", "--out", "x"]).levels == (3, 3)
    with pytest.raises(SystemExit):
        p.parse_args(["study", "--case", "ii", "--p", "0", "--levels", "a..b", "--out", "x"])
    with pytest.raises(SystemExit):
        p.parse_args(["study", "--case", "iv", "--p", "0", "--out", "x"])


def test_verify_command():
    r = run("verify")
    assert r.returncode == 0, r.stdout + r.stderr
    assert "9/9 checks passed" in r.stdout
    assert "[FAIL]" not in r.stdout
