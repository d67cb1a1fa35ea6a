import csv
import io
import math
from pathlib import Path

import pytest
from click.testing import CliRunner

from e2group.cli import main
from e2group.statesum import parse_labeled_triangulation

DATA = Path(__file__).resolve().parent.parent / "data"
UNIT = ",".join(["1"] * 10)


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args, env=None):
    return runner.invoke(main, [str(a) for a in args], env=env, catch_exceptions=False)


def table(output):
    rows = {}
    for line in output.splitlines()[1:]:
        parts = line.split()
        if parts and not line.startswith("SUMMARY"):
            rows[parts[0]] = parts[-1]
    return rows


def summary(output):
    line = next(l for l in output.splitlines() if l.startswith("SUMMARY"))
    return dict(kv.split("=", 1) for kv in line.split()[1:])


def test_tenj_regular(runner):
    res = run(runner, "tenj", "--lengths", UNIT)
    assert res.exit_code == 0
    rows = table(res.output)
    assert rows["value"] == "1.78885"
    assert float(rows["phi_123"]) == pytest.approx(math.acos(0.25), abs=1e-5)
    assert "oracle_difference" not in rows


def test_tenj_csv_full_precision(runner):
    res = run(runner, "tenj", "--lengths", UNIT, "--format", "csv", "--oracle")
    rows = dict(csv.reader(io.StringIO(res.output)))
    assert float(rows["value"]) == pytest.approx(4 / math.sqrt(5), rel=1e-15)
    assert float(rows["oracle_difference"]) < 1e-8


def test_tenj_usage_errors(runner):
    assert run(runner, "tenj", "--lengths", ",".join(["1"] * 9)).exit_code == 2
    assert run(runner, "tenj", "--lengths", UNIT, "--spins", "1,2").exit_code == 2
    assert run(runner, "tenj", "--lengths", UNIT.replace("1", "x", 1)).exit_code == 2
    assert run(runner, "tenj", "--lengths", "-" + UNIT).exit_code == 2


def test_tenj_degenerate_reports_zero(runner):
    res = run(runner, "tenj", "--lengths", "1,1,1,1,1,1,1,1,1,3")
    assert res.exit_code == 0
    assert "weight zero" in res.output


@pytest.mark.parametrize("suite", ["lemma", "gauge", "flatness"])
def test_verify_suites_pass(runner, suite):
    res = run(runner, "verify", suite, 5, "--seed", 7)
    assert res.exit_code == 0, res.output
    s = summary(res.output)
    assert s["status"] == "pass" and s["passed"] == "5" and s["seed"] == "7"


def test_verify_measure_small(runner):
    res = run(runner, "verify", "measure", 2, "--samples", 20000, "--seed", 1)
    s = summary(res.output)
    assert s["cases"] == "4"
    assert "kappa" in s and "sphere_l2_over_pi_l3" in s


def test_verify_failure_exit_code(runner):
    res = run(runner, "verify", "flatness", 3, "--tol", "1e-30")
    assert res.exit_code == 1
    assert summary(res.output)["status"] == "fail"


def test_verify_unknown_suite(runner):
    assert run(runner, "verify", "bogus").exit_code == 2


def test_weight_single_pent(runner):
    res = run(runner, "weight", DATA / "single_pent.tri")
    assert res.exit_code == 0
    assert table(res.output)["weight"] == "1.78885"
    res = run(runner, "weight", DATA / "single_pent.tri", "--format", "csv")
    rows = list(csv.reader(io.StringIO(res.output)))
    assert rows[0] == ["factor", "face", "value"]
    assert float(rows[-2][2]) == pytest.approx(4 / math.sqrt(5), rel=1e-15)


def test_weight_boundary_finite(runner):
    res = run(runner, "weight", DATA / "boundary_5simplex.tri", "--format", "csv")
    rows = list(csv.reader(io.StringIO(res.output)))
    assert sum(r[0] == "area2" for r in rows) == 20
    assert sum(r[0] == "tenj" for r in rows) == 6
    total = float(next(r for r in rows if r[0] == "weight")[2])
    assert math.isfinite(total) and total != 0


def test_weight_inequality(runner):
    res = run(runner, "weight", DATA / "inequality_violation.tri")
    assert res.exit_code == 0
    assert "triangle (1, 2, 3) violates the triangle inequality" in res.output
    assert table(res.output)["weight"] == "0"


def test_weight_parse_error(runner, tmp_path):
    bad = tmp_path / "bad.tri"
    bad.write_text("dim 4\nvertex 1\nvertex 1\n")
    res = run(runner, "weight", bad)
    assert res.exit_code == 1
    assert "line 3" in res.output
    assert run(runner, "weight", tmp_path / "missing.tri").exit_code == 1


def test_scan_csv(runner, tmp_path):
    out = tmp_path / "scan.csv"
    res = run(runner, "scan", DATA / "single_pent.tri", "--triangle", "1,2,3", "--from", 0, "--to", 10, "-o", out)
    assert res.exit_code == 0
    rows = list(csv.DictReader(out.open()))
    assert [int(r["s_123"]) for r in rows] == list(range(11))
    V = math.sqrt(5) / 4
    for r in rows:
        s = int(r["s_123"])
        assert float(r["value"]) == pytest.approx((-1) ** s * math.cos(s * math.acos(0.25)) / V, abs=1e-13)
        assert float(r["sum_s_phi"]) == pytest.approx(s * math.acos(0.25), rel=1e-13)
    values = [float(r["value"]) for r in rows]
    assert min(values) < 0 < max(values)


def test_scan_empty_range(runner):
    res = run(runner, "scan", DATA / "single_pent.tri", "--from", 3, "--to", 2)
    assert res.exit_code == 0
    assert res.output.splitlines() == ["s_123,s_124,s_125,s_134,s_135,s_145,s_234,s_235,s_245,s_345,value,V,sum_s_phi"]


def test_scan_errors(runner, tmp_path):
    assert run(runner, "scan", DATA / "boundary_5simplex.tri").exit_code == 1
    assert run(runner, "scan", DATA / "single_pent.tri", "--triangle", "1,2,6").exit_code == 2
    res = run(runner, "scan", DATA / "single_pent.tri", "-o", tmp_path / "no" / "dir" / "x.csv")
    assert res.exit_code == 1


def test_scan_plot(runner, tmp_path):
    png = tmp_path / "scan.png"
    res = run(runner, "scan", DATA / "single_pent.tri", "--to", 4, "--plot", png)
    assert res.exit_code == 0
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_move_round_trip(runner, tmp_path):
    out = tmp_path / "moved.tri"
    res = run(runner, "move", DATA / "single_pent.tri", "--kind", "1-5", "--target", "1,2,3,4,5", "--fresh", 6, "-o", out)
    assert res.exit_code == 0
    tri, lab = parse_labeled_triangulation(out.read_text())
    assert len(tri.pents) == 5 and 6 in tri.vertices
    assert len(lab.l) == 10
    back = run(runner, "move", out, "--kind", "5-1", "--target", 6)
    tri2, _ = parse_labeled_triangulation(back.output)
    assert tri2 == parse_labeled_triangulation((DATA / "single_pent.tri").read_text())[0]


def test_move_inapplicable(runner):
    res = run(runner, "move", DATA / "boundary_5simplex.tri", "--kind", "2-4", "--target", "1,2,3,4")
    assert res.exit_code == 1
    assert "already exists" in res.output


def test_partition(runner):
    res = run(runner, "partition", DATA / "boundary_5simplex.tri", "--samples", 50, "--seed", 3, "--format", "csv")
    assert res.exit_code == 0
    rows = dict(csv.reader(io.StringIO(res.output)))
    assert float(rows["estimate"]) > 0 and rows["seed"] == "3"
    assert run(runner, "partition", DATA / "single_pent.tri").exit_code == 1


def test_environment_override(runner):
    a = run(runner, "verify", "lemma", 2, env={"E2GROUP_VERIFY_SEED": "11"})
    assert summary(a.output)["seed"] == "11"
    b = run(runner, "tenj", "--format", "csv", env={"E2GROUP_TENJ_LENGTHS": UNIT})
    assert b.exit_code == 0 and b.output.startswith("quantity,value")
