"""
Тесты командной строки: коды выхода, отчёты и таблицы
"""

import json

import numpy as np
import pytest

from catalog import list_labels
from cli import main
from reports import strip_volatile


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_catalog_lists_entries(capsys):
    code, out, _ = _run(capsys, "catalog")
    assert code == 0
    doc = json.loads(out)
    assert doc["count"] >= 16
    assert doc["tool"] == "projconn"


def test_catalog_single_label(capsys):
    code, out, _ = _run(capsys, "catalog", "--label", "C.8")
    assert code == 0
    assert "erf" in json.loads(out)["entries"]["C.8"]["description"]


def test_catalog_unknown_label(capsys):
    code, _, err = _run(capsys, "catalog", "--label", "nope")
    assert code == 2
    assert json.loads(err.strip().splitlines()[-1])["error"] == "BadParam"


def test_catalog_filter_by_dini_type(capsys):
    code, out, _ = _run(capsys, "catalog", "--filter", "A")
    assert code == 0
    assert all(v["dini_type"] == "A" or "A" in k for k, v in json.loads(out)["entries"].items())


def test_check_sphere(capsys):
    code, out, _ = _run(capsys, "check", "--label", "sphere", "--npoints", "10")
    assert code == 0
    report = json.loads(out)
    assert report["passed"] is True
    assert {"metrizability", "killing", "projective_field"} <= {c["name"] for c in report["checks"]}
    assert len(report["sampled_points"]) == 10


def test_check_forbidden_parameter(capsys):
    code, _, err = _run(capsys, "check", "--label", "B.4", "--xi", "2", "--C", "1")
    assert code == 2
    assert "C ≠ ±1" in err
    assert "φ" in err


@pytest.mark.parametrize("value", ["2", "0.6+0.6i"])
def test_check_c_must_be_unimodular(capsys, value):
    code, _, err = _run(capsys, "check", "--label", "B.4", "--C", value)
    assert code == 2
    assert "C = e^{iφ}" in err
    assert "--phi" in err


def test_check_c_alias_sets_phi(capsys):
    code, out, _ = _run(capsys, "check", "--label", "B.4", "--C", "0.6+0.8i", "--npoints", "3")
    assert code == 0
    assert json.loads(out)["config"]["params"]["phi"] == pytest.approx(np.arctan2(0.8, 0.6))


def test_check_non_numeric_parameter(capsys):
    code, _, _ = _run(capsys, "check", "--label", "A.2", "--param", "h=abc")
    assert code == 2


def test_check_dom3_generator(capsys):
    code, out, _ = _run(capsys, "check", "--label", "dom3.g1", "--npoints", "5")
    assert code == 0
    names = {c["name"] for c in json.loads(out)["checks"]}
    assert {"recovered_field", "recovered_eigenvalues"} <= names


@pytest.mark.parametrize("label", list_labels())
def test_check_every_label(capsys, label):
    code, out, _ = _run(capsys, "check", "--label", label, "--npoints", "5")
    report = json.loads(out)
    assert code == 0, [c for c in report["checks"] if not c["passed"]]
    assert report["passed"] is True


@pytest.mark.parametrize("label,names", [
    ("C.9a", {"y_lambda_ode"}),
    ("C.9b", {"y_lambda_ode"}),
    ("C.9.upsilon", {"xi_ode", "upsilon_is_xi_prime"}),
])
def test_check_c9_functions(capsys, label, names):
    code, out, _ = _run(capsys, "check", "--label", label, "--npoints", "5")
    assert code == 0
    assert names <= {c["name"] for c in json.loads(out)["checks"]}


def test_geodesic_writes_csv(capsys, tmp_path):
    out_csv = tmp_path / "geo.csv"
    code, _, _ = _run(capsys, "geodesic", "--label", "sphere", "--out", str(out_csv), "--emit-plot-script",
                      "--report", str(tmp_path / "geo.json"))
    assert code == 0
    assert out_csv.read_text(encoding="utf-8").splitlines()[0] == "t,x,y,xd,yd,H,K"
    assert (tmp_path / "geo.gp").exists()
    report = json.loads((tmp_path / "geo.json").read_text(encoding="utf-8"))
    assert report["command"] == "geodesic"


def test_geodesic_truncated_run_fails(capsys):
    code, out, _ = _run(capsys, "geodesic", "--label", "sphere", "--t1", "10")
    assert code == 1
    report = json.loads(out)
    assert report["truncated_at"]["x"] == pytest.approx(3.0, abs=1e-6)


def test_geodesic_start_outside_chart(capsys):
    code, _, _ = _run(capsys, "geodesic", "--label", "sphere", "--x", "5")
    assert code == 2


def test_quotient_supint(capsys, tmp_path):
    out_csv = tmp_path / "q.csv"
    code, out, _ = _run(capsys, "quotient", "--label", "supint.quotient", "--x", "1", "--y", "1", "--yx", "0.7",
                        "--x1", "1.15", "--out", str(out_csv))
    assert code == 0
    assert out_csv.read_text(encoding="utf-8").splitlines()[0] == "x,y,yx,I1,I2"
    assert json.loads(out)["passed"] is True


def test_superintegrable_default(capsys, tmp_path):
    code, out, _ = _run(capsys, "superintegrable", "--out", str(tmp_path / "run"))
    assert code == 0
    report = json.loads(out)
    names = {c["name"] for c in report["checks"]}
    assert {"curve_x2_over_3", "hamiltonian", "ydot", "on_curve", "independence_rank"} <= names
    for suffix in ("trajectory", "curve", "rank"):
        assert (tmp_path / f"run_{suffix}.csv").exists()


def test_superintegrable_exceptional_point(capsys):
    code, _, err = _run(capsys, "superintegrable", "--theta", str(np.pi / 2), "--phi", "0")
    assert code == 2
    error = json.loads(err.strip().splitlines()[-1])
    assert error["error"] == "ExceptionalPoint"
    assert error["row"] == "θ=π/2, φ=0"


@pytest.mark.parametrize("matrix,subcase,lam,components", [
    ("2,0,0,1", "I", 2.0, 4),
    ("0,-1,1,0", "III0", 0.0, 1),
    ("1,0,1,1", "II", 1.0, 2),
])
def test_classify_matrix(capsys, matrix, subcase, lam, components):
    code, out, _ = _run(capsys, "classify", "--m", matrix)
    assert code == 0
    report = json.loads(out)
    assert report["subcase"] == subcase
    assert report["lambda"] == pytest.approx(lam)
    assert report["components"] == components
    assert report["formulas"]


def test_classify_zero_action(capsys):
    code, _, err = _run(capsys, "classify", "--m", "0,0,0,0")
    assert code == 2
    assert "ZeroAction" in err


def test_classify_needs_input(capsys):
    code, _, _ = _run(capsys, "classify")
    assert code == 2


def test_unknown_subcommand(capsys):
    code, _, _ = _run(capsys, "frobnicate")
    assert code == 2


def test_reports_are_deterministic(capsys):
    _, first, _ = _run(capsys, "check", "--label", "A.2", "--npoints", "5", "--seed", "7")
    _, second, _ = _run(capsys, "check", "--label", "A.2", "--npoints", "5", "--seed", "7")
    assert strip_volatile(json.loads(first)) == strip_volatile(json.loads(second))
    assert json.loads(first)["config"]["seed"] == 7
