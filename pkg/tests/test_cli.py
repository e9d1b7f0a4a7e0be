import json
import subprocess
import sys

import pytest

from cnfxor.cli import main, parse_range
from cnfxor.counting import count_exact
from cnfxor.formula import parse_dimacs_xor


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    out = capsys.readouterr() if capsys else None
    return code, out


def test_parse_range_inclusive():
    assert parse_range("0:2.5:0.5") == [0, 0.5, 1.0, 1.5, 2.0, 2.5]
    assert parse_range("0:0.3:0.1") == [0, 0.1, 0.2, 0.3]
    assert parse_range("1.5") == [1.5]


def test_gen_ceiling_counts(tmp_path, capsys):
    out = tmp_path / "f.cnf"
    code, io_ = run(["gen", "-k", 3, "-n", 10, "-r", 0.41, "-s", 0.29, "--out", out], capsys)
    assert code == 0 and "5 CNF clauses and 3 XOR clauses" in io_.err
    f = parse_dimacs_xor(out.read_text())
    assert (len(f.cnf), len(f.xors)) == (5, 3)
    assert (tmp_path / "f.cnf.manifest.json").exists()


def test_gen_k_exceeds_n(capsys):
    code, io_ = run(["gen", "-k", 3, "-n", 2], capsys)
    assert code == 2 and "usage" in io_.err


def test_gen_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["gen", "-k", 3, "-n", 30, "-r", 2, "-s", 0.5, "--seed", 4, "--out", a])
    run(["gen", "-k", 3, "-n", 30, "-r", 2, "-s", 0.5, "--seed", 4, "--out", b])
    assert a.read_bytes() == b.read_bytes()


def test_solve_empty_formula(tmp_path, capsys):
    p = tmp_path / "e.cnf"
    p.write_text("p cnf 3 0\n")
    code, io_ = run(["solve", p], capsys)
    assert code == 10
    lines = io_.out.splitlines()
    assert lines[0] == "SAT" and lines[1].startswith("v ") and lines[1].endswith(" 0")


def test_solve_empty_xor_line_is_unsat(tmp_path, capsys):
    p = tmp_path / "u.cnf"
    p.write_text("p cnf 2 1\nx 0\n")
    code, io_ = run(["solve", p], capsys)
    assert code == 20 and io_.out.splitlines()[0] == "UNSAT"


def test_solve_exhausted(tmp_path, capsys):
    p = tmp_path / "h.cnf"
    run(["gen", "-k", 3, "-n", 60, "-r", 6, "--seed", 1, "--out", p])
    code, io_ = run(["solve", p, "--max-conflicts", 1], capsys)
    assert code == 30 and io_.out.startswith("EXHAUSTED")


def test_solve_parse_error(tmp_path, capsys):
    p = tmp_path / "bad.cnf"
    p.write_text("p cnf 3 1\nx 0 0\n")
    code, io_ = run(["solve", p], capsys)
    assert code == 2 and "variable index 0" in io_.err


def test_solve_agrees_with_count(tmp_path, capsys):
    for seed in range(100):
        p = tmp_path / f"f{seed}.cnf"
        n = 6 + seed % 9
        run(["gen", "-k", 3, "-n", n, "-r", 3.5, "-s", 0.3, "--seed", seed, "--out", p])
        capsys.readouterr()
        code, _ = run(["solve", p], capsys)
        assert (code == 10) == (count_exact(parse_dimacs_xor(p.read_text())).count > 0)


def test_count(tmp_path, capsys):
    p = tmp_path / "c.cnf"
    p.write_text("p cnf 2 2\n1 2 0\nx1 2 0\n")
    code, io_ = run(["count", p], capsys)
    assert code == 0
    assert json.loads(io_.out) == {"count": "2", "n": 2, "method": "xor-affine-enumeration"}


def test_count_guard_exit_3(tmp_path, capsys):
    p = tmp_path / "big.cnf"
    p.write_text("p cnf 40 1\n1 2 3 0\n")
    code, _ = run(["count", p], capsys)
    assert code == 3


def test_bounds_first_row(capsys):
    code, io_ = run(["bounds", "-k", 3, "--r", "0:2.5:0.5"], capsys)
    lines = io_.out.splitlines()
    assert code == 0
    assert lines[0] == "r,s_lower,s_upper,extrapolated"
    assert lines[1] == "0,1,1,false"
    assert len(lines) == 7


def test_bounds_out_of_validity(capsys):
    code, _ = run(["bounds", "-k", 3, "--r", "0:3:1"], capsys)
    assert code == 2
    code, io_ = run(["bounds", "-k", 3, "--r", "0:3:1", "--extrapolate"], capsys)
    assert code == 0 and io_.out.splitlines()[-1].endswith(",true")


def test_scan_single_cell(tmp_path):
    out = tmp_path / "scan.csv"
    code, _ = run(["scan", "-k", 3, "-n", 20, "--r", "0", "--s", "0.5", "--trials", 5,
                   "--workers", 1, "--out", out])
    assert code == 0
    assert len(out.read_text().splitlines()) == 2


def test_phi_json(capsys):
    code, io_ = run(["phi", "-k", 2, "-r", 0, "-n", 8, "--trials", 3], capsys)
    assert code == 0 and json.loads(io_.out)["mean"] == 1.0


def test_stattest_pairwise(capsys):
    code, io_ = run(["stattest", "pairwise", "-n", 6, "-m", 3, "--samples", 50000], capsys)
    rep = json.loads(io_.out)
    assert code == 0 and abs(rep["estimates"]["p_single"] - 0.125) < 0.01


def test_crossing_not_bracketed(capsys):
    code, _ = run(["crossing", "--fixed-axis", "r", "--fixed-value", 0, "-k", 3, "-n", 30,
                   "--interval", "0.1:0.3", "--trials", 5, "--workers", 1], capsys)
    assert code == 2


def test_crossing_censored(capsys):
    code, _ = run(["crossing", "--fixed-axis", "s", "--fixed-value", 0, "-k", 3, "-n", 60,
                   "--interval", "3:6", "--trials", 5, "--workers", 1,
                   "--max-conflicts", 1], capsys)
    assert code == 1


def test_slope_manifest_records_bracket(tmp_path):
    out = tmp_path / "slope.csv"
    code, _ = run(["slope", "-k", 3, "-n", 20, "--r-values", "0,0.5,1", "--interval", "0.2:1.6",
                   "--trials", 10, "--workers", 1, "--out", out])
    assert code == 0
    m = json.loads((tmp_path / "slope.csv.manifest.json").read_text())
    assert {"slope", "r_squared", "slope_fixed_intercept"} <= set(m["slope_fit"])
    br = m["slope_bracket"]
    assert br["bracket"][0] <= br["lower_curve_slope"] < br["upper_curve_slope"] <= br["bracket"][1]


def test_replay_byte_identical(tmp_path):
    out = tmp_path / "scan.csv"
    run(["scan", "-k", 3, "-n", 16, "--r", "0:4:2", "--s", "0:0.5:0.25", "--trials", 6,
         "--seed", 9, "--workers", 2, "--out", out])
    again = tmp_path / "again.csv"
    code, _ = run(["replay", str(out) + ".manifest.json", "--out", again])
    assert code == 0
    assert again.read_bytes() == out.read_bytes()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "cnfxor.cli", "bounds", "-k", "3", "--r", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.splitlines()[1] == "0,1,1,false"
