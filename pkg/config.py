"""
Загрузка конфигурации: переменные окружения, затем config.json, затем значения по умолчанию.
"""

import json
import logging
import os
from typing import Dict, Optional

logger = logging.getLogger(__name__)

DEFAULTS: Dict = {
    "seed": 42,
    "residual_rtol": 1e-8,
    "singular_margin": 1e-2,
    "det_tol": 1e-12,
    "null_tol": 1e-10,
    "ode_rtol": 1e-10,
    "ode_atol": 1e-10,
    "rank_rtol": 1e-8,
    "scale_floor": 1e-12,
    "max_turning_points": 16,
    "quad_limit": 200,
    "log_level": "INFO",
    "npoints": 100,
}


def load_config(path: Optional[str] = None) -> Dict:
    """
    Загружает конфигурацию.

    Переменные окружения PROJCONN_SEED, PROJCONN_RTOL и PROJCONN_LOG_LEVEL
    имеют приоритет над файлом; путь к файлу можно задать через PROJCONN_CONFIG.
    """
    config = dict(DEFAULTS)
    path = path or os.getenv("PROJCONN_CONFIG") or "config.json"

    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        config.update({k: v for k, v in data.items() if not k.startswith("_")})
    except FileNotFoundError:
        logger.debug(f"Файл {path} не найден, используются значения по умолчанию")
    except json.JSONDecodeError as e:
        logger.warning(f"Ошибка формата {path}: {e}; используются значения по умолчанию")

    env_seed = os.getenv("PROJCONN_SEED")
    env_rtol = os.getenv("PROJCONN_RTOL")
    env_level = os.getenv("PROJCONN_LOG_LEVEL")
    if env_seed:
        config["seed"] = int(env_seed)
    if env_rtol:
        config["residual_rtol"] = float(env_rtol)
    if env_level:
        config["log_level"] = env_level.upper()

    return config
