"""
Тесты джетов второго порядка
"""

import math

import numpy as np
import pytest

from jets import Scalar2Jet, absolute, arctan, cos, erf, erfi, exp, jet_at, lift, log, power, sin, sqrt, tan


def test_polynomial_derivatives():
    j = jet_at(lambda x, y: x * x * y, 2.0, 3.0)
    assert j.slots() == pytest.approx((12.0, 12.0, 4.0, 6.0, 4.0, 0.0))


def test_chain_rule_mixed_derivative():
    j = jet_at(lambda x, y: sin(x * y), 1.0, 2.0)
    assert j.dx == pytest.approx(2 * math.cos(2.0))
    assert j.dxy == pytest.approx(math.cos(2.0) - 2 * math.sin(2.0))
    assert j.dyy == pytest.approx(-math.sin(2.0))


def test_division_and_integer_power():
    j = jet_at(lambda x, y: 1 / (x ** 2 + y), 1.0, 1.0)
    assert j.v == pytest.approx(0.5)
    assert j.dx == pytest.approx(-0.5)
    assert j.dxx == pytest.approx(2 * 4 / 8 - 2 / 4)


def test_fractional_power():
    j = power(Scalar2Jet.variable_x(4.0), 0.5)
    assert j.v == pytest.approx(2.0)
    assert j.dx == pytest.approx(0.25)
    assert j.dxx == pytest.approx(-1 / 32)
    assert sqrt(Scalar2Jet.variable_y(9.0)).dy == pytest.approx(1 / 6)


def test_nested_jet_gives_third_derivative():
    inner = Scalar2Jet.variable_x(2.0)
    j = Scalar2Jet.variable_x(inner) ** 3
    assert j.dxx.v == pytest.approx(12.0)
    assert j.dxx.dx == pytest.approx(6.0)


def test_lift_uses_supplied_derivatives():
    j = lift(Scalar2Jet.variable_x(0.5), math.exp, exp, exp)
    assert j.v == pytest.approx(math.exp(0.5))
    assert j.dxx == pytest.approx(math.exp(0.5))


def test_erf_and_erfi_derivatives():
    g = 2 / math.sqrt(math.pi)
    assert erf(Scalar2Jet.variable_y(0.3)).dy == pytest.approx(g * math.exp(-0.09))
    assert erfi(Scalar2Jet.variable_y(0.3)).dyy == pytest.approx(2 * 0.3 * g * math.exp(0.09))


def test_numpy_scalar_on_the_left():
    j = np.float64(2.0) * Scalar2Jet.variable_x(1.5)
    assert isinstance(j, Scalar2Jet)
    assert j.dx == pytest.approx(2.0)


_STEP = 1e-5

PRIMITIVES = [
    ("exp", exp, (-2.0, 2.0)),
    ("log", log, (0.2, 3.0)),
    ("sin", sin, (-3.0, 3.0)),
    ("cos", cos, (-3.0, 3.0)),
    ("tan", tan, (-1.2, 1.2)),
    ("arctan", arctan, (-3.0, 3.0)),
    ("power", lambda u: power(u, 1.0 / 3.0), (0.2, 3.0)),
    ("sqrt", sqrt, (0.2, 3.0)),
    ("absolute", absolute, (-3.0, -0.1)),
    ("erf", erf, (-1.5, 1.5)),
    ("erfi", erfi, (-1.5, 1.5)),
    ("reciprocal", lambda u: 1 / (1 + u * u), (-2.0, 2.0)),
]


@pytest.mark.parametrize("name,fn,bounds", PRIMITIVES, ids=[p[0] for p in PRIMITIVES])
def test_primitive_matches_central_differences(name, fn, bounds):
    rng = np.random.default_rng(1000)
    for t in rng.uniform(*bounds, size=1000):
        j = fn(Scalar2Jet.variable_x(t))
        plus, minus = fn(Scalar2Jet.variable_x(t + _STEP)), fn(Scalar2Jet.variable_x(t - _STEP))
        assert j.dx == pytest.approx((plus.v - minus.v) / (2 * _STEP), rel=1e-7, abs=1e-7)
        assert j.dxx == pytest.approx((plus.dx - minus.dx) / (2 * _STEP), rel=1e-7, abs=1e-7)
        assert j.dy == 0.0


def test_mixed_derivative_matches_central_differences():
    rng = np.random.default_rng(7)

    def field(x, y):
        return exp(sin(x * y)) / (1 + x * x) + power(y * y + 1, 0.25)

    for x, y in rng.uniform(-1.0, 1.0, size=(200, 2)):
        j = jet_at(field, x, y)
        up, down = jet_at(field, x, y + _STEP), jet_at(field, x, y - _STEP)
        assert j.dy == pytest.approx((up.v - down.v) / (2 * _STEP), rel=1e-7, abs=1e-7)
        assert j.dxy == pytest.approx((up.dx - down.dx) / (2 * _STEP), rel=1e-7, abs=1e-7)
        assert j.dyy == pytest.approx((up.dy - down.dy) / (2 * _STEP), rel=1e-7, abs=1e-7)
