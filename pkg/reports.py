"""
Отчёты прогонов: JSON с проверками, таблицы CSV/XLSX и скрипты gnuplot.
"""

import json
import logging
import math
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TOOL = "projconn"
__version__ = "1.0.0"

# поля, которые меняются от запуска к запуску
VOLATILE_FIELDS = ("timestamp", "wall_clock_s")


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    details: Dict[str, Any] = field(default_factory=dict)


def _clean(obj: Any) -> Any:
    """Приводит numpy-типы к встроенным; nan и inf записываются строками."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        # repr восстанавливает число точно (не более 17 значащих цифр)
        return float(f"{v:.17g}")
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if callable(obj):
        return getattr(obj, "__name__", repr(obj))
    return obj


class Report:
    """Отчёт одной подкоманды: общий результат — конъюнкция всех проверок."""

    def __init__(self, command: str, config: Dict[str, Any]):
        self.command = command
        self.config = dict(config)
        self.checks: List[Check] = []
        self.sampled_points: List = []
        self.extra: Dict[str, Any] = {}
        self.tables: Dict[str, pd.DataFrame] = {}
        self._started = time.perf_counter()
        self._timestamp = datetime.now().isoformat(timespec="seconds")

    def add_check(self, name: str, value: float, threshold: float,
                  passed: Optional[bool] = None, **details) -> Check:
        if passed is None:
            passed = bool(np.isfinite(value) and value <= threshold)
        check = Check(name, float(value), float(threshold), bool(passed), details)
        self.checks.append(check)
        if passed:
            logger.debug(f"Проверка {name}: {value:.3e} ≤ {threshold:.1e}")
        else:
            logger.error(f"Проверка {name} не пройдена: {value:.3e} > {threshold:.1e}")
        return check

    def add_points(self, points: Sequence) -> None:
        self.sampled_points.extend([list(map(float, p)) for p in points])

    def add_table(self, name: str, df: pd.DataFrame) -> None:
        self.tables[name] = df

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "schema": SCHEMA_VERSION,
            "tool": TOOL,
            "version": __version__,
            "command": self.command,
            "config": self.config,
            "checks": [
                {"name": c.name, "value": c.value, "threshold": c.threshold, "passed": c.passed, **c.details}
                for c in self.checks
            ],
            "passed": self.passed,
            "wall_clock_s": time.perf_counter() - self._started,
            "timestamp": self._timestamp,
            "sampled_points": self.sampled_points,
        }
        data.update(self.extra)
        return _clean(data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def write_json(self, path: str) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")
        logger.info(f"Отчёт записан в {path}")

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame([
            {"Проверка": c.name, "Значение": c.value, "Порог": c.threshold, "Пройдена": c.passed}
            for c in self.checks
        ])

    def write_xlsx(self, path: str) -> None:
        """Книга Excel: лист проверок, лист конфигурации и по листу на каждую таблицу."""
        with pd.ExcelWriter(path, engine="openpyxl") as writer:
            self.summary_frame().to_excel(writer, sheet_name="Проверки", index=False)
            config_df = pd.DataFrame([{"Ключ": k, "Значение": str(v)} for k, v in self.config.items()])
            config_df.to_excel(writer, sheet_name="Конфигурация", index=False)
            for name, df in self.tables.items():
                df.to_excel(writer, sheet_name=name[:31], index=False)
        logger.info(f"Книга Excel записана в {path}")


def strip_volatile(report: Dict[str, Any]) -> Dict[str, Any]:
    return {k: v for k, v in report.items() if k not in VOLATILE_FIELDS}


def write_csv(df: pd.DataFrame, path: str) -> None:
    df.to_csv(path, index=False, float_format="%.17g")
    logger.info(f"Таблица {list(df.columns)} записана в {path}")


def write_plot_script(csv_path: str, x: str, ys: Sequence[str], columns: Sequence[str],
                      title: str = "") -> str:
    """Скрипт gnuplot рядом с CSV; возвращает путь к скрипту."""
    script_path = str(Path(csv_path).with_suffix(".gp"))
    index = {name: i + 1 for i, name in enumerate(columns)}
    plots = ", ".join(
        f"'{Path(csv_path).name}' using {index[x]}:{index[y]} with lines title '{y}'" for y in ys
    )
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title '{title}'" if title else "unset title",
        f"set xlabel '{x}'",
        f"plot {plots}",
    ]
    Path(script_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Скрипт gnuplot записан в {script_path}")
    return script_path
