"""
Исключения библиотеки проективных связностей.
"""

from typing import Any, Optional


class ProjConnError(Exception):
    """Базовая ошибка библиотеки."""


class SingularMetric(ProjConnError):
    """|det g| ниже допуска в точке."""


class DegenerateSigma(ProjConnError):
    """|det σ| ниже допуска: σ не соответствует метрике."""


class NullDirection(ProjConnError):
    """Изотропное направление: g(ξ, ξ) ≈ 0."""


class VerticalTangent(ProjConnError):
    """ẋ ≈ 0, проекция на джеты y(x) не определена."""


class BadParam(ProjConnError):
    """Параметры вне допустимых диапазонов."""


class QuadratureFailure(ProjConnError):
    """Квадратура не достигла точности."""


class ZeroAction(ProjConnError):
    """Нулевая матрица действия ℒ_X."""


class OnEigenspace(ProjConnError):
    """Точка лежит в собственном подпространстве ℒ_X (симметрия гомотетична)."""


class ExceptionalPoint(ProjConnError):
    """Одна из шести исключительных точек сферы параметров."""

    def __init__(self, message: str, row: Optional[str] = None):
        super().__init__(message)
        self.row = row


class NoSolution(ProjConnError):
    """Метод наименьших квадратов не нашёл поле с малой невязкой."""

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__(message)
        self.residual = residual


class LeftChart(ProjConnError):
    """Траектория покинула карту или подошла к особому множеству."""

    def __init__(self, message: str, last_state: Any = None, samples: Any = None):
        super().__init__(message)
        self.last_state = last_state
        self.samples = samples


class StepUnderflow(ProjConnError):
    """Шаг интегратора стал слишком мал."""


class NoRealRoot(ProjConnError):
    """У квадратного уравнения по y нет вещественных корней."""


class AtVerticalTangent(ProjConnError):
    """2x − c̃1 ≈ 0: наклон траектории не определён."""


class TurningPoint(ProjConnError):
    """Слишком много точек поворота при репараметризации."""
