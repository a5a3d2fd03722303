"""
Тесты загрузки конфигурации
"""

import json

from config import DEFAULTS, load_config


def test_defaults_without_file(tmp_path, monkeypatch):
    monkeypatch.delenv("PROJCONN_SEED", raising=False)
    monkeypatch.delenv("PROJCONN_RTOL", raising=False)
    monkeypatch.delenv("PROJCONN_LOG_LEVEL", raising=False)
    assert load_config(str(tmp_path / "missing.json")) == DEFAULTS


def test_file_overrides_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv("PROJCONN_SEED", raising=False)
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"seed": 5, "npoints": 20, "_comment": "локальные настройки"}), encoding="utf-8")
    config = load_config(str(path))
    assert config["seed"] == 5
    assert config["npoints"] == 20
    assert "_comment" not in config


def test_environment_has_priority(tmp_path, monkeypatch):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"seed": 5}), encoding="utf-8")
    monkeypatch.setenv("PROJCONN_SEED", "11")
    monkeypatch.setenv("PROJCONN_RTOL", "1e-6")
    monkeypatch.setenv("PROJCONN_LOG_LEVEL", "debug")
    config = load_config(str(path))
    assert config["seed"] == 11
    assert config["residual_rtol"] == 1e-6
    assert config["log_level"] == "DEBUG"


def test_config_path_from_environment(tmp_path, monkeypatch):
    path = tmp_path / "other.json"
    path.write_text(json.dumps({"max_turning_points": 4}), encoding="utf-8")
    monkeypatch.setenv("PROJCONN_CONFIG", str(path))
    assert load_config()["max_turning_points"] == 4


def test_broken_file_falls_back(tmp_path, monkeypatch):
    monkeypatch.delenv("PROJCONN_SEED", raising=False)
    path = tmp_path / "config.json"
    path.write_text("{seed: ", encoding="utf-8")
    assert load_config(str(path))["seed"] == DEFAULTS["seed"]
