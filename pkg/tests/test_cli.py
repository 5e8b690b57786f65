import csv
import math
import re
from pathlib import Path

import pytest

from helicoidal import cli, period_solver as ps
from helicoidal.cli import SolutionRecord, main

GOLDEN = Path(__file__).parent / "golden"
KEYS = ["beta", "a", "rho", "b", "a3", "lambda", "c1", "c2", "a1", "a2", "R", "t_period",
        "residual_h", "residual_d", "residual_F", "residual_a3_cross", "root_count"]


@pytest.fixture(scope="module")
def solution_file(tmp_path_factory):
    p = tmp_path_factory.mktemp("sol") / "beta1.txt"
    assert main(["solve", "--beta", "1.0", "--out", str(p)]) == 0
    return p


def test_solve_output_matches_golden(solution_file):
    text = solution_file.read_text()
    assert text == (GOLDEN / "solve_beta1.txt").read_text()
    assert [line.split(" = ")[0] for line in text.splitlines()] == KEYS
    for line in text.splitlines():
        assert re.fullmatch(r"\w+ = -?[0-9][0-9.e+-]*", line)


def test_solution_record_round_trip(solution_file):
    rec = SolutionRecord.loads(solution_file.read_text())
    assert rec.root_count == 1
    assert abs(rec.residual_h) < 1e-8 and abs(rec.residual_d) < 1e-8
    again = SolutionRecord.loads(rec.dumps())
    assert again == rec
    s = rec.solved()
    assert s.t_period == rec.t_period and s.b == rec.b


def test_record_round_trip_is_lossless_for_awkward_floats():
    rec = SolutionRecord.loads(SolutionRecord(*([0.1 + 2e-17, 1 / 3, math.pi, 1e-300, -0.0] + [2 / 7] * 11 + [3])).dumps())
    assert rec.beta == 0.1 + 2e-17 and rec.a == 1 / 3 and rec.b == 1e-300


def test_solve_beta_half_reports_roots(tmp_path, capsys):
    assert main(["solve", "--beta", "0.5"]) == 0
    kv = dict(line.split(" = ") for line in capsys.readouterr().out.splitlines())
    assert int(kv["root_count"]) >= 1


@pytest.mark.parametrize("argv", [["solve", "--beta", "1.5"], ["solve"], ["scan", "--beta", "0"],
                                  ["bogus"], ["solve", "--beta", "x"], ["scan", "--beta", "0.5", "--threads", "0"]])
def test_usage_errors(argv):
    assert main(argv) == 64


def test_solver_failure_exit_code(monkeypatch):
    def boom(*a, **k):
        raise ps.PeriodProblemUnsolved("no root")
    monkeypatch.setattr(ps, "solve_period_problem", boom)
    assert main(["solve", "--beta", "0.5"]) == 2


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("beta = 0.5\na_range = 0.2 0.4 2\nrho_range = 1.0 1.0 1\n")
    assert main(["scan", "--config", str(cfg)]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["a", "rho", "b", "a3", "h", "d"] and len(rows) == 3
    assert float(rows[1][2]) == ps.solve_b(0.2, 1.0, 0.5)
    # the flag overrides the config value
    assert main(["scan", "--config", str(cfg), "--beta", "1.0"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert float(rows[1][2]) == 0.2


def test_scan_table(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["scan", "--beta", "0.5", "--a-range", "0.1", "0.9", "3",
                 "--rho-range", "0.2", "2.9", "4", "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(raw.decode().splitlines()))
    assert len(rows) == 3 * 4 + 1
    for a, rho in ((0.1, 0.2), (0.9, 2.9)):
        row = next(r for r in rows[1:] if float(r[0]) == a and float(r[1]) == rho)
        assert float(row[4]) == ps.h_func(a, rho, 0.5)
        assert float(row[5]) == ps.d_func(a, rho, 0.5)


def test_scan_parallel_matches_serial(tmp_path):
    args = ["scan", "--beta", "0.7", "--a-range", "0.3", "0.6", "2", "--rho-range", "0.5", "2.5", "3"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_scan_failures_become_nan(monkeypatch):
    def bad(*a, **k):
        raise ValueError("fail")
    monkeypatch.setattr(ps, "d_func", bad)
    row = cli.scan_cell(0.5, 1.0, 0.5)
    assert row[:2] == (0.5, 1.0) and all(math.isnan(v) for v in row[2:])


def test_mesh_command(solution_file, tmp_path, capsys):
    out = tmp_path / "m.obj"
    assert main(["mesh", "--solution", str(solution_file), "--radial-res", "24", "--angular-res", "24",
                 "--out", str(out)]) == 0
    text = capsys.readouterr().out
    m = re.search(r"max relative residual (\S+)", text)
    assert m and float(m.group(1)) < 1e-5
    assert out.read_text().startswith("# helicoidal")
    assert main(["mesh", "--solution", str(solution_file), "--radial-res", "24", "--angular-res", "24",
                 "--copies", "4"]) == 0
    text = capsys.readouterr().out
    ext = float(re.search(r"vertical extent (\S+)", text).group(1))
    t = SolutionRecord.loads(solution_file.read_text()).t_period
    assert abs(ext - 4 * t) < 1e-6


def test_mesh_usage_errors(solution_file, tmp_path):
    assert main(["mesh", "--solution", str(solution_file), "--format", "stl"]) == 64
    assert main(["mesh", "--solution", str(tmp_path / "missing.txt")]) == 64
    assert main(["mesh"]) == 64


def test_mesh_refuses_assembly_off_solution(tmp_path):
    s = ps.solved_from_params(0.5, 2.0, 0.5)
    p = tmp_path / "off.txt"
    p.write_text(SolutionRecord.from_solved(s).dumps())
    assert main(["mesh", "--solution", str(p), "--radial-res", "16", "--angular-res", "16", "--copies", "2"]) == 3


def test_verify_structure_on_solution(solution_file, tmp_path, capsys):
    rep = tmp_path / "r.json"
    assert main(["verify", "--suite", "structure", "--solution", str(solution_file), "--out", str(rep)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert any(line.startswith("cycle_monodromy") and " pass " in line for line in lines)
    assert '"check_id": "residue_table"' in rep.read_text()


def test_verify_check_selector(capsys):
    assert main(["verify", "--suite", "claims", "--check", "height_corner_value"]) == 0
    assert capsys.readouterr().out.split()[:2] == ["height_corner_value", "pass"]
    assert main(["verify", "--suite", "claims", "--check", "nope"]) == 64


def test_verify_failing_check_exit_code():
    assert main(["verify", "--suite", "claims", "--check", "offset_limit_rho_zero"]) == 3
