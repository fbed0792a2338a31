import csv
import io
import subprocess
import sys

import pytest

from unfittedfem.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), stdout=out)
    return code, out.getvalue()


def test_solve_prints_one_row():
    code, out = run("solve", "--n", "16")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 1 and rows[0]["scheme"] == "dirichlet" and rows[0]["status"] == "ok"


def test_solve_reproduces_study_row(tmp_path):
    code, _ = run("rotate-sweep", "--n", "16", "--theta0", "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7",
                  "--out", str(tmp_path))
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "rotation.csv", newline="")))
    target = rows[3]
    code, out = run("solve", "--n", "16", "--theta0", target["theta0"])
    assert code == 0
    assert list(csv.DictReader(io.StringIO(out)))[0] == target


def test_failed_case_exit_code():
    code, out = run("solve", "--n", "16", "--gamma", "0")
    assert code == 2
    assert "failed" in out


@pytest.mark.parametrize("argv", [
    ("solve", "--n", "4"),
    ("convergence", "--n", "32,16,64"),
    ("solve", "--n", "abc"),
    ("solve", "--graddiv-scaling", "cubic"),
    ("solve", "--scheme", "spectral"),
    ("nonsense",),
    ("solve", "--n", "16,32"),
])
def test_config_errors_exit_one(argv):
    assert run(*argv)[0] == 1


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "study.ini"
    cfg.write_text("[study]\nscheme = neumann\nR = 0.47\n\n[convergence]\nn = 16, 24, 32\ngamma-div = 1\n")
    code, out = run("convergence", "--config", str(cfg), "--out", str(tmp_path / "o"))
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "o" / "convergence.csv", newline="")))
    assert [r["n"] for r in rows] == ["16", "24", "32"] and rows[0]["scheme"] == "neumann"
    assert "slopes neumann" in out
    code, _ = run("convergence", "--config", str(cfg), "--scheme", "dirichlet", "--out", str(tmp_path / "p"))
    rows = list(csv.DictReader(open(tmp_path / "p" / "convergence.csv", newline="")))
    assert code == 0 and rows[0]["scheme"] == "dirichlet"


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[study]\nmesh = 5\n")
    assert run("solve", "--config", str(cfg))[0] == 1
    assert run("solve", "--config", str(tmp_path / "missing.ini"))[0] == 1


def test_unwritable_output_exit_one(tmp_path):
    blocker = tmp_path / "f"
    blocker.write_text("")
    assert run("solve", "--n", "16", "--out", str(blocker / "x"))[0] == 1


def test_param_sweep_and_compare(tmp_path):
    code, _ = run("param-sweep", "--n", "16", "--gamma", "0.1,1", "--sigma", "0.01,0.1", "--out", str(tmp_path))
    assert code == 0
    assert len(list(csv.DictReader(open(tmp_path / "params.csv", newline="")))) == 4
    code, out = run("compare", "--n", "16", "--theta0", "0,0.3", "--out", str(tmp_path))
    assert code == 0
    joined = list(csv.DictReader(open(tmp_path / "compare_joined.csv", newline="")))
    assert len(joined) == 2 and joined[0]["baseline"] == "cutfem_asym"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "unfittedfem", "solve", "--n", "8", "--problem", "disk"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("scheme,problem,")
