"""
Тесты отчётов: JSON, XLSX, CSV и скрипты gnuplot
"""

import json

import numpy as np
import pandas as pd
from openpyxl import load_workbook

from reports import SCHEMA_VERSION, TOOL, Report, strip_volatile, write_csv, write_plot_script


def _report() -> Report:
    report = Report("check", {"label": "sphere", "seed": 42})
    report.add_check("metrizability", 1e-12, 1e-8)
    report.add_check("killing", np.float64(3e-9), 1e-6, residual_max=np.float64(3e-9))
    return report


def test_report_passes_only_if_all_checks_pass():
    report = _report()
    assert report.passed
    report.add_check("hamiltonian", 1e-3, 1e-8)
    assert not report.passed
    assert report.to_dict()["passed"] is False


def test_report_schema():
    report = _report()
    report.add_points([np.array([0.1, 0.2])])
    data = json.loads(report.to_json())
    assert data["schema"] == SCHEMA_VERSION
    assert data["tool"] == TOOL
    assert data["command"] == "check"
    assert data["config"]["label"] == "sphere"
    assert [c["name"] for c in data["checks"]] == ["metrizability", "killing"]
    assert data["checks"][1]["residual_max"] == 3e-9
    assert data["sampled_points"] == [[0.1, 0.2]]
    assert {"timestamp", "wall_clock_s"} <= set(data)


def test_nan_is_not_a_pass():
    report = Report("geodesic", {})
    check = report.add_check("hamiltonian", float("nan"), 1e-8)
    assert not check.passed
    assert report.to_dict()["checks"][0]["value"] == "nan"
    report.extra["complex"] = 1 + 2j
    assert report.to_dict()["complex"] == {"re": 1.0, "im": 2.0}


def test_strip_volatile_makes_reports_comparable():
    a, b = _report().to_dict(), _report().to_dict()
    assert strip_volatile(a) == strip_volatile(b)
    assert "timestamp" not in strip_volatile(a)


def test_xlsx_sheets(tmp_path):
    report = _report()
    report.add_table("trajectory_with_a_very_long_sheet_name", pd.DataFrame({"t": [0.0, 1.0], "x": [0.0, 0.5]}))
    path = tmp_path / "report.xlsx"
    report.write_xlsx(str(path))
    wb = load_workbook(path)
    assert wb.sheetnames == ["Проверки", "Конфигурация", "trajectory_with_a_very_long_she"]
    assert wb["Проверки"]["A1"].value == "Проверка"
    assert wb["Проверки"]["A2"].value == "metrizability"


def test_csv_and_plot_script(tmp_path):
    df = pd.DataFrame({"t": [0.0, 0.1], "x": [1.0 / 3.0, 0.5], "H": [0.5, 0.5]})
    csv_path = tmp_path / "run.csv"
    write_csv(df, str(csv_path))
    back = pd.read_csv(csv_path, float_precision="round_trip")
    assert list(back.columns) == ["t", "x", "H"]
    assert back["x"][0] == 1.0 / 3.0
    script = write_plot_script(str(csv_path), "t", ["x", "H"], list(df.columns), title="sphere")
    text = open(script, encoding="utf-8").read()
    assert script.endswith("run.gp")
    assert "set datafile separator ','" in text
    assert "'run.csv' using 1:2 with lines title 'x'" in text
    assert "'run.csv' using 1:3 with lines title 'H'" in text
