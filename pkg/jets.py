"""
Джеты второго порядка по двум переменным (x, y) для автоматического дифференцирования.

Слоты джета могут быть числами (float, complex) или снова джетами. Поле, вычисленное
в точке с джетами-координатами внутри джета, даёт точные третьи производные.
"""

from dataclasses import dataclass
from numbers import Number
from typing import Any, Callable, Tuple

import numpy as np
from scipy import special


@dataclass(frozen=True)
class Scalar2Jet:
    """Значение и все частные производные до второго порядка по (x, y)."""

    # numpy-скаляры слева отдают операцию нашим __radd__/__rmul__
    __array_ufunc__ = None

    v: Any
    dx: Any = 0.0
    dy: Any = 0.0
    dxx: Any = 0.0
    dxy: Any = 0.0
    dyy: Any = 0.0

    @classmethod
    def constant(cls, c) -> "Scalar2Jet":
        return cls(c)

    @classmethod
    def variable_x(cls, x0) -> "Scalar2Jet":
        return cls(x0, 1.0)

    @classmethod
    def variable_y(cls, y0) -> "Scalar2Jet":
        return cls(y0, 0.0, 1.0)

    def slots(self) -> Tuple:
        return (self.v, self.dx, self.dy, self.dxx, self.dxy, self.dyy)

    def gradient(self) -> Tuple:
        return (self.dx, self.dy)

    def hessian(self) -> Tuple[Tuple, Tuple]:
        return ((self.dxx, self.dxy), (self.dxy, self.dyy))

    def _map(self, fn: Callable) -> "Scalar2Jet":
        return Scalar2Jet(*(fn(s) for s in self.slots()))

    def __add__(self, other):
        if isinstance(other, Scalar2Jet):
            return Scalar2Jet(*(a + b for a, b in zip(self.slots(), other.slots())))
        return Scalar2Jet(self.v + other, self.dx, self.dy, self.dxx, self.dxy, self.dyy)

    __radd__ = __add__

    def __neg__(self):
        return self._map(lambda s: -s)

    def __pos__(self):
        return self

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Scalar2Jet):
            a, b = self, other
            return Scalar2Jet(
                a.v * b.v,
                a.v * b.dx + a.dx * b.v,
                a.v * b.dy + a.dy * b.v,
                a.v * b.dxx + 2 * a.dx * b.dx + a.dxx * b.v,
                a.v * b.dxy + a.dx * b.dy + a.dy * b.dx + a.dxy * b.v,
                a.v * b.dyy + 2 * a.dy * b.dy + a.dyy * b.v,
            )
        return self._map(lambda s: s * other)

    __rmul__ = __mul__

    def reciprocal(self) -> "Scalar2Jet":
        r = 1 / self.v
        return compose(self, r, -r * r, 2 * r * r * r)

    def __truediv__(self, other):
        if isinstance(other, Scalar2Jet):
            return self * other.reciprocal()
        return self._map(lambda s: s / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, exponent):
        if isinstance(exponent, Scalar2Jet):
            return exp(exponent * log(self))
        if _is_small_integer(exponent):
            n = int(round(float(np.real(exponent))))
            if n == 0:
                return Scalar2Jet(self.v ** 0)
            result = self
            for _ in range(abs(n) - 1):
                result = result * self
            return result if n > 0 else result.reciprocal()
        return power(self, exponent)

    def __rpow__(self, base):
        return exp(self * np.log(base))


def _is_small_integer(p) -> bool:
    if isinstance(p, (bool, np.bool_)):
        return False
    if not isinstance(p, Number):
        return False
    if isinstance(p, complex) and p.imag != 0:
        return False
    re = float(np.real(p))
    return re.is_integer() and abs(re) <= 12


def compose(u: Scalar2Jet, f0, f1, f2) -> Scalar2Jet:
    """Цепное правило: f(u), если известны f, f', f'' в точке u.v."""
    return Scalar2Jet(
        f0,
        f1 * u.dx,
        f1 * u.dy,
        f2 * u.dx * u.dx + f1 * u.dxx,
        f2 * u.dx * u.dy + f1 * u.dxy,
        f2 * u.dy * u.dy + f1 * u.dyy,
    )


def lift(u, f: Callable, df: Callable, d2f: Callable):
    """
    Поднимает одномерную функцию на джеты.

    f вычисляется только на числах, df и d2f должны сами принимать джеты
    (собираться из функций этого модуля), иначе вложенные джеты потеряют порядок.
    """
    if not isinstance(u, Scalar2Jet):
        return f(u)
    a = u.v
    return compose(u, lift(a, f, df, d2f), df(a), d2f(a))


def value(u):
    """Число в основании джета (для сравнений и выбора ветвей)."""
    while isinstance(u, Scalar2Jet):
        u = u.v
    return u


def exp(u):
    if isinstance(u, Scalar2Jet):
        e = exp(u.v)
        return compose(u, e, e, e)
    return np.exp(u)


def log(u):
    if isinstance(u, Scalar2Jet):
        a = u.v
        return compose(u, log(a), 1 / a, -1 / (a * a))
    return np.log(u)


def sin(u):
    if isinstance(u, Scalar2Jet):
        s, c = sin(u.v), cos(u.v)
        return compose(u, s, c, -s)
    return np.sin(u)


def cos(u):
    if isinstance(u, Scalar2Jet):
        s, c = sin(u.v), cos(u.v)
        return compose(u, c, -s, -c)
    return np.cos(u)


def tan(u):
    if isinstance(u, Scalar2Jet):
        t = tan(u.v)
        sec2 = 1 + t * t
        return compose(u, t, sec2, 2 * t * sec2)
    return np.tan(u)


def arctan(u):
    if isinstance(u, Scalar2Jet):
        a = u.v
        q = 1 / (1 + a * a)
        return compose(u, arctan(a), q, -2 * a * q * q)
    return np.arctan(u)


def power(u, p):
    """u**p для нецелого p; для отрицательного вещественного основания берите absolute(u)."""
    if isinstance(u, Scalar2Jet):
        a = u.v
        return compose(u, power(a, p), p * power(a, p - 1), p * (p - 1) * power(a, p - 2))
    return u ** p


def sqrt(u):
    return power(u, 0.5)


def absolute(u):
    if isinstance(u, Scalar2Jet):
        return u if np.real(value(u)) >= 0 else -u
    return abs(u)


def real(u):
    if isinstance(u, Scalar2Jet):
        return u._map(real)
    return float(np.real(u))


def imag(u):
    if isinstance(u, Scalar2Jet):
        return u._map(imag)
    return float(np.imag(u))


def conj(u):
    if isinstance(u, Scalar2Jet):
        return u._map(conj)
    return np.conj(u)


_TWO_OVER_SQRT_PI = 2.0 / np.sqrt(np.pi)


def erf(u):
    if isinstance(u, Scalar2Jet):
        a = u.v
        g = _TWO_OVER_SQRT_PI * exp(-a * a)
        return compose(u, erf(a), g, -2 * a * g)
    return special.erf(u)


def erfi(u):
    if isinstance(u, Scalar2Jet):
        a = u.v
        g = _TWO_OVER_SQRT_PI * exp(a * a)
        return compose(u, erfi(a), g, 2 * a * g)
    return special.erfi(u)


def jet_at(field: Callable, x0, y0) -> Scalar2Jet:
    """Джет скалярного поля field(x, y) в точке (x0, y0)."""
    out = field(Scalar2Jet.variable_x(x0), Scalar2Jet.variable_y(y0))
    if not isinstance(out, Scalar2Jet):
        return Scalar2Jet(out)
    return out
