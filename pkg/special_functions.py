"""
Специальные функции нормальных форм C.8 и C.9.

Y(y) для C.8 считается двумя способами: квадратурой подынтегральной функции
e^{3/(2s)}/|s|^{3/2} от базовой точки ±1 и через erf/erfi. Константы выбраны
так, что оба способа дают одну и ту же функцию.
"""

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from config import DEFAULTS
from errors import BadParam, QuadratureFailure
from jets import Scalar2Jet, absolute, arctan, erf, erfi, exp, lift, power, sqrt, value

logger = logging.getLogger(__name__)

KINDS = ("erf", "erfi", "y_c8", "y_c8_quadrature", "y1", "y_lambda", "upsilon_lambda", "xi_lambda")

_SQRT_2PI_3 = np.sqrt(2.0 * np.pi / 3.0)
# Y(1) = 0 и Y(-1) = 0
_C8_CONST_POS = _SQRT_2PI_3 * float(erfi(np.sqrt(1.5)))
_C8_CONST_NEG = -_SQRT_2PI_3 * float(erf(np.sqrt(1.5)))


def _quad(integrand, a: float, b: float, limit: int) -> float:
    result = integrate.quad(integrand, a, b, limit=limit, epsabs=1e-13, epsrel=1e-12, full_output=1)
    if len(result) > 3:
        raise QuadratureFailure(f"Квадратура на [{a}, {b}] не сошлась: {result[3]}")
    return float(result[0])


# --- C.8: Y' = e^{3/(2y)} |y|^{-3/2}


def c8_integrand(s):
    return exp(1.5 / s) / power(absolute(s), 1.5)


def c8_integrand_prime(s):
    return c8_integrand(s) * (-1.5 / (s * s) - 1.5 / s)


@lru_cache(maxsize=4096)
def _c8_quadrature(y: float, limit: int) -> float:
    if y == 0:
        raise BadParam("C.8: y = 0 не входит в область определения")
    base = 1.0 if y > 0 else -1.0
    return _quad(lambda s: float(c8_integrand(s)), base, y, limit)


def y_c8_quadrature(y, constant: float = 0.0, limit: int = DEFAULTS["quad_limit"]):
    """Y(y) = ∫_{±1}^y e^{3/(2s)}/|s|^{3/2} ds + constant."""
    return constant + lift(y, lambda a: _c8_quadrature(float(a), limit), c8_integrand, c8_integrand_prime)


def y_c8(y, constant: float = 0.0):
    """
    Y(y) через erf/erfi в тех же координатах, что и квадратура:
    −√(2π/3) erfi(√(3/(2y))) при y > 0 и √(2π/3) erf(√(3/(2|y|))) при y < 0.
    """
    y0 = float(np.real(value(y)))
    if y0 > 0:
        return constant + _C8_CONST_POS - _SQRT_2PI_3 * erfi(sqrt(1.5 / y))
    if y0 < 0:
        return constant + _C8_CONST_NEG + _SQRT_2PI_3 * erf(sqrt(1.5 / absolute(y)))
    raise BadParam("C.8: y = 0 не входит в область определения")


def y1(y):
    """Y₁ = (y − 3)Y − 2y²Y′; Y₁′ = Y и y²Y₁″ − ½(y−3)Y₁′ + ½Y₁ = 0."""
    return (y - 3) * y_c8(y) - 2 * y * y * c8_integrand(y)


def y1_ode_residual(y: float) -> float:
    j = y1(Scalar2Jet.variable_y(y))
    return float(y * y * j.dyy - 0.5 * (y - 3) * j.dy + 0.5 * j.v)


# --- C.9: Y_λ' = e^{−(3λ/2) arctan y}/(y²+1)^{1/4}


def y_lambda_integrand(s, lam: float):
    return exp(-1.5 * lam * arctan(s)) / power(s * s + 1, 0.25)


def y_lambda_integrand_prime(s, lam: float):
    return -y_lambda_integrand(s, lam) * (3 * lam + s) / (2 * (1 + s * s))


@lru_cache(maxsize=4096)
def _y_lambda_quadrature(y: float, lam: float, base: float, limit: int) -> float:
    return _quad(lambda s: float(y_lambda_integrand(s, lam)), base, y, limit)


def y_lambda(y, lam: float, base: float = 1.0, constant: float = 0.0,
             limit: int = DEFAULTS["quad_limit"]):
    """Y_λ(y) = ∫_base^y e^{−(3λ/2) arctan s}/(s²+1)^{1/4} ds + constant."""
    return constant + lift(
        y,
        lambda a: _y_lambda_quadrature(float(a), lam, base, limit),
        lambda a: y_lambda_integrand(a, lam),
        lambda a: y_lambda_integrand_prime(a, lam),
    )


def xi_second_derivative(s, lam: float):
    """Ξ″_λ = e^{−(3λ/2) arctan y}/(y²+1)^{3/4}: показатель, который задаёт само ОДУ."""
    return exp(-1.5 * lam * arctan(s)) / power(s * s + 1, 0.75)


def _xi_third_derivative(s, lam: float):
    return -xi_second_derivative(s, lam) * 3 * (lam + s) / (2 * (1 + s * s))


@lru_cache(maxsize=4096)
def _upsilon_quadrature(y: float, lam: float, base: float, limit: int) -> float:
    return _quad(lambda s: float(xi_second_derivative(s, lam)), base, y, limit)


def upsilon_lambda(y, lam: float, base: float = 1.0, limit: int = DEFAULTS["quad_limit"]):
    """Υ_λ = Ξ′_λ."""
    return lift(
        y,
        lambda a: _upsilon_quadrature(float(a), lam, base, limit),
        lambda a: xi_second_derivative(a, lam),
        lambda a: _xi_third_derivative(a, lam),
    )


def xi_lambda(y, lam: float, base: float = 1.0, limit: int = DEFAULTS["quad_limit"]):
    """Ξ_λ = (y − 3λ)Υ_λ − 2(y²+1)Υ′_λ."""
    return (y - 3 * lam) * upsilon_lambda(y, lam, base, limit) - 2 * (y * y + 1) * xi_second_derivative(y, lam)


def xi_ode_residual(y: float, lam: float) -> float:
    """(y²+1)Ξ″ − ½(y − 3λ)Ξ′ + ½Ξ."""
    j = xi_lambda(Scalar2Jet.variable_y(y), lam)
    return float((y * y + 1) * j.dyy - 0.5 * (y - 3 * lam) * j.dy + 0.5 * j.v)


def y_lambda_ode_residual(y: float, lam: float, constant: float = 0.0) -> float:
    """2(y²+1)Y″_λ + (y + 3λ)Y′_λ на той же Y_λ, что входит в метрику C.9a/C.9b."""
    j = y_lambda(Scalar2Jet.variable_y(y), lam, constant=constant)
    return float(2 * (y * y + 1) * j.dyy + (y + 3 * lam) * j.dy)


def upsilon_xi_gap(y: float, lam: float) -> float:
    """|Ξ′_λ − Υ_λ|: Υ_λ берётся квадратурой, Ξ_λ строится из неё же."""
    xi = xi_lambda(Scalar2Jet.variable_y(y), lam)
    return abs(float(xi.dy) - float(upsilon_lambda(y, lam))) / max(1.0, abs(float(xi.dy)))


@dataclass(frozen=True)
class SpecialFn:
    kind: str
    lam: float = 0.0
    constant: float = 0.0
    base: float = 1.0
    limit: int = DEFAULTS["quad_limit"]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise BadParam(f"Неизвестная специальная функция: {self.kind}")
        if self.kind in ("y_lambda", "upsilon_lambda", "xi_lambda") and self.lam < 0:
            raise BadParam(f"λ = {self.lam} < 0")

    def __call__(self, y):
        if self.kind == "erf":
            return erf(y)
        if self.kind == "erfi":
            return erfi(y)
        if self.kind == "y_c8":
            return y_c8(y, self.constant)
        if self.kind == "y_c8_quadrature":
            return y_c8_quadrature(y, self.constant, self.limit)
        if self.kind == "y1":
            return y1(y)
        if self.kind == "y_lambda":
            return y_lambda(y, self.lam, self.base, self.constant, self.limit)
        if self.kind == "upsilon_lambda":
            return upsilon_lambda(y, self.lam, self.base, self.limit)
        return xi_lambda(y, self.lam, self.base, self.limit)


def special_fn_eval(f: SpecialFn, y: float) -> Scalar2Jet:
    """Значение и две производные по y: поля v, dy, dyy."""
    out = f(Scalar2Jet.variable_y(y))
    if not isinstance(out, Scalar2Jet):
        out = Scalar2Jet(out)
    return out
