"""
Каталог нормальных форм метрик с одним существенным проективным полем.

Метки: пары Дини (A, B, C), строки таблицы A.1–C.9b и форма C.9 через Υ_λ, семейство степени
подвижности 3 (dom3.*), пример сферы, плоская метрика, нормальная форма
для степени подвижности 1.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from errors import BadParam
from geometry import (Chart, Metric2, SigmaField, VectorField2, combine_sigmas, metric_from_sigma,
                      sigma_from_metric)
from jets import Scalar2Jet, conj, cos, exp, power, real, sin, value
from metrization import spherical_coefficients
from special_functions import SpecialFn

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
_EPS = 1e-12


@dataclass(frozen=True)
class ParamSpec:
    default: Any
    constraint: str


@dataclass(frozen=True)
class CatalogEntry:
    label: str
    params: Dict[str, Any]
    metric: Metric2
    projective_field: Optional[VectorField2] = None
    dini_partner: Optional[str] = None


@dataclass(frozen=True)
class _Template:
    builder: Callable[[str, Dict], Tuple[Metric2, Optional[VectorField2]]]
    params: Dict[str, ParamSpec]
    chart: Callable[[Dict], Chart]
    singular: str
    table_row: str = ""
    dini_type: str = ""
    dini_partner: Optional[str] = None
    description: str = ""
    default_descriptions: Dict[str, str] = field(default_factory=dict)


def _zero(x, y):
    return 0.0


def _metric(label: str, chart: Chart, singular: Callable, g11=_zero, g12=_zero, g22=_zero) -> Metric2:
    return Metric2(g11, g12, g22, chart=chart, singular_locus=singular, label=label)


def _derivative(f: Callable) -> Callable:
    """f′ через джет по одной переменной; работает и на джетах."""
    def df(t):
        out = f(Scalar2Jet.variable_x(t))
        return out.dx if isinstance(out, Scalar2Jet) else 0.0
    return df


def _abs(u) -> float:
    return float(abs(value(u)))


def _require(cond: bool, message: str):
    if not cond:
        raise BadParam(message)


# --- Универсальные ограничения


def _check_xi(xi: float):
    _require((0 < xi < 1) or (1 < xi <= 4), f"ξ = {xi}: требуется ξ ∈ (0,1) ∪ (1,4]")


def _check_h(h: float):
    _require(h != 0 and h <= 1, f"h = {h}: требуется 0 ≠ h ≤ 1")


def _check_sign(name: str, v: float):
    _require(v in (-1, 1), f"{name} = {v}: требуется {name} ∈ {{±1}}")


def _check_nonzero(name: str, v: float):
    _require(v != 0, f"{name} = 0: требуется {name} ∈ ℝ∖{{0}}")


def _check_positive(name: str, v: float):
    _require(v > 0, f"{name} = {v}: требуется {name} > 0")


def _check_angle(name: str, v: float, upper: float = TWO_PI):
    _require(0 <= v < upper, f"{name} = {v}: требуется {name} ∈ [0, {upper:.6g})")


def _to_complex(a, b, label: str):
    """a dz² + b dz̄² в координатах (x, y): g11 = a + b, g12 = i(a − b), g22 = −(a + b)."""
    s, d = a + b, 1j * (a - b)
    for comp in (s, d):
        v = value(comp)
        if abs(np.imag(v)) > 1e-9 * max(1.0, abs(v)):
            logger.warning(f"{label}: мнимая часть компоненты метрики {np.imag(v):.3e}")
    return real(s), real(d), real(-s)


def _complex_metric(label: str, chart: Chart, singular: Callable,
                    coeffs: Callable[[Any, Any], Tuple]) -> Metric2:
    def comps(x, y):
        z, zb = x + 1j * y, x - 1j * y
        a, b = coeffs(z, zb)
        return _to_complex(a, b, label)

    def raw(x, y):
        """Компоненты до взятия вещественной части."""
        a, b = coeffs(x + 1j * y, x - 1j * y)
        return a + b, 1j * (a - b), -(a + b)

    return Metric2(lambda x, y: comps(x, y)[0],
                   lambda x, y: comps(x, y)[1],
                   lambda x, y: comps(x, y)[2],
                   chart=chart, singular_locus=singular, label=label, complex_components=raw)


# --- Пары Дини


def _default_X(x):
    return x + 2


def _default_Y(y):
    return y - 1


def _default_h(z):
    return z


def _liouville(label: str, p: Dict):
    X, Y, sign = p["X"], p["Y"], p["sign"]
    _check_sign("sign", sign)

    def singular(x, y):
        return min(_abs(X(x) - Y(y)), _abs(X(x)), _abs(Y(y)))

    chart = _TEMPLATES[label].chart(p)
    if label.endswith(".bar"):
        def w(x, y):
            return 1 / X(x) - 1 / Y(y)
        g = _metric(label, chart, singular,
                    g11=lambda x, y: w(x, y) / X(x),
                    g22=lambda x, y: sign * w(x, y) / Y(y))
    else:
        g = _metric(label, chart, singular,
                    g11=lambda x, y: X(x) - Y(y),
                    g22=lambda x, y: sign * (X(x) - Y(y)))
    return g, None


def _complex_liouville(label: str, p: Dict):
    h = p["h"]
    chart = _TEMPLATES[label].chart(p)

    def singular(x, y):
        hz = h(x + 1j * y)
        return min(abs(np.imag(value(hz))), abs(value(hz)))

    if label.endswith(".bar"):
        def coeffs(z, zb):
            hz = h(z)
            hb = conj(hz)
            w = 1 / hb - 1 / hz
            return -w / hz, w / hb
    else:
        def coeffs(z, zb):
            hz = h(z)
            w = conj(hz) - hz
            return -w, w
    return _complex_metric(label, chart, singular, coeffs), None


def _jordan(label: str, p: Dict):
    Y = p["Y"]
    dY = _derivative(Y)
    chart = _TEMPLATES[label].chart(p)

    def singular(x, y):
        return min(_abs(1 + x * dY(y)), _abs(Y(y)))

    if label.endswith(".bar"):
        g = _metric(label, chart, singular,
                    g12=lambda x, y: -(1 + x * dY(y)) / Y(y) ** 3,
                    g22=lambda x, y: (1 + x * dY(y)) ** 2 / Y(y) ** 4)
    else:
        g = _metric(label, chart, singular, g12=lambda x, y: (1 + x * dY(y)) / 2)
    return g, None


# --- Таблица нормальных форм степени подвижности 2


def _a1(label: str, p: Dict):
    eps, h, xi, rho, kappa = p["eps"], p["h"], p["xi"], p["rho"], p["kappa"]
    _check_xi(xi)
    _check_h(h)
    _check_sign("eps", eps)
    _check_sign("rho", rho)
    _check_nonzero("kappa", kappa)
    if xi == 2:
        _require(h != -eps and h != -4 * eps, "A.1, ξ = 2: h ≠ −ε и h ≠ −4ε")
    if xi == 3 and eps == -1:
        _require(abs(h) != 1, "A.1, ξ = 3, ε = −1: |h| ≠ 1")
    if xi == 4:
        _require(h != 1, "A.1, ξ = 4: h ≠ 1")
    if h == -1:
        _require(rho == 1, "A.1, особый случай h = −1: ϱ = 1")
    if h == 1 and eps == 1:
        _require(kappa > 0, "A.1, особый случай h = 1, ε = 1: κ > 0")

    def singular(x, y):
        ex, ey = np.exp(xi * x), np.exp(xi * y)
        return min(abs(ex - h * ey), abs(1 + rho * h * ey), abs(1 + rho * ex))

    def g11(x, y):
        ex, ey = exp(xi * x), exp(xi * y)
        return kappa * (ex - h * ey) * exp(2 * x) / ((1 + rho * h * ey) * (1 + rho * ex) ** 2)

    def g22(x, y):
        ex, ey = exp(xi * x), exp(xi * y)
        return kappa * eps * (ex - h * ey) * exp(2 * y) / ((1 + rho * h * ey) ** 2 * (1 + rho * ex))

    return _metric(label, _TEMPLATES[label].chart(p), singular, g11=g11, g22=g22), None


def _a2(label: str, p: Dict):
    h, kappa = p["h"], p["kappa"]
    _check_h(h)
    _check_nonzero("kappa", kappa)
    if h == 1:
        _require(kappa > 0, "A.2, особый случай h = 1: κ > 0")

    def singular(x, y):
        return min(abs(y - x), abs(x), abs(y))

    return _metric(label, _TEMPLATES[label].chart(p), singular,
                   g11=lambda x, y: kappa * (y - x) * exp(-3 * x) / (x * x * y),
                   g22=lambda x, y: kappa * h * (y - x) * exp(-3 * y) / (x * y * y)), None


def _a3(label: str, p: Dict):
    h = p["h"]
    _check_h(h)
    if label == "A.3a":
        lam, theta, kappa = p["lam"], p["theta"], 1.0
        _check_positive("lam", lam)
        _check_angle("theta", theta)
        bound = np.exp(-3 * lam * np.pi)
        _require(abs(h) <= bound + _EPS, f"A.3a: |h| ≤ e^(−3λπ) = {bound:.6g}")
        if abs(abs(h) - bound) <= _EPS:
            _check_angle("theta", theta, np.pi)
    else:
        lam, theta, kappa = 0.0, 0.0, p["kappa"]
        _check_positive("kappa", kappa)
        _require(abs(h) != 1, "A.3b, λ = 0: h ≠ ±1")

    def singular(x, y):
        return min(abs(np.sin(y - x)), abs(np.sin(x + theta)), abs(np.sin(y + theta)))

    def w(x, y):
        return kappa * sin(y - x) / (sin(y + theta) * sin(x + theta))

    return _metric(label, _TEMPLATES[label].chart(p), singular,
                   g11=lambda x, y: w(x, y) * exp(-3 * lam * x) / sin(x + theta),
                   g22=lambda x, y: w(x, y) * h * exp(-3 * lam * y) / sin(y + theta)), None


def _check_phi(phi: float):
    _require(0 <= phi < np.pi, f"phi = {phi}: требуется φ ∈ [0, π), C = e^{{iφ}} (--C задаёт φ = arg C)")


def _b4(label: str, p: Dict):
    phi, xi, kappa = p["phi"], p["xi"], p["kappa"]
    _check_phi(phi)
    _check_xi(xi)
    _check_nonzero("kappa", kappa)
    C = np.exp(1j * phi)
    if xi == 2:
        _require(abs(C - 1) > _EPS and abs(C + 1) > _EPS,
                 f"B.4, ξ = 2: C ≠ ±1 (C = e^{{iφ}}, φ = {phi:.6g} ∉ {{0, π}})")
    if xi == 3:
        _require(abs(C ** 2 - 1) > _EPS and abs(C ** 2 + 1) > _EPS, "B.4, ξ = 3: C² ≠ ±1")
    if xi == 4:
        _require(abs(C - 1) > _EPS, "B.4, ξ = 4: C ≠ 1")

    def singular(x, y):
        w = C * complex(x, y) ** xi
        return min(abs(w.imag), abs(1 + w))

    def coeffs(z, zb):
        w = C * power(z, xi)
        wb = conj(w)
        n = w - wb
        return kappa * n / ((1 + wb) * (1 + w) ** 2), -kappa * n / ((1 + wb) ** 2 * (1 + w))

    return _complex_metric(label, _TEMPLATES[label].chart(p), singular, coeffs), None


def _b5(label: str, p: Dict):
    phi, kappa = p["phi"], p["kappa"]
    _check_phi(phi)
    _check_positive("kappa", kappa)
    C = np.exp(1j * phi)

    def singular(x, y):
        return min(abs(y), abs(complex(x, y)))

    def coeffs(z, zb):
        d = zb - z
        return (kappa * d * C * exp(-3 * z) / (z * z * zb),
                -kappa * d * np.conj(C) * exp(-3 * zb) / (z * zb * zb))

    return _complex_metric(label, _TEMPLATES[label].chart(p), singular, coeffs), None


def _b6(label: str, p: Dict):
    phi = p["phi"]
    _check_phi(phi)
    C = np.exp(1j * phi)
    if label == "B.6a":
        lam, theta, kappa = p["lam"], p["theta"], 1.0
        _check_positive("lam", lam)
        _check_angle("theta", theta)
    else:
        lam, theta, kappa = 0.0, 0.0, p["kappa"]
        _check_positive("kappa", kappa)
        _require(abs(C - 1) > _EPS, "B.6b: C ≠ 1")

    def singular(x, y):
        z = complex(x, y)
        return min(abs(np.sinh(2 * y)), abs(np.sin(z + theta)))

    def coeffs(z, zb):
        w = kappa * sin(zb - z) / (sin(zb + theta) * sin(z + theta))
        return (w * C * exp(-3 * lam * z) / sin(z + theta),
                -w * np.conj(C) * exp(-3 * lam * zb) / sin(zb + theta))

    return _complex_metric(label, _TEMPLATES[label].chart(p), singular, coeffs), None


def _c7(label: str, p: Dict):
    xi, rho, kappa = p["xi"], p["rho"], p["kappa"]
    _check_xi(xi)
    _require(xi != 0.5, "C.7: ξ ≠ 1/2")
    _check_sign("rho", rho)
    _check_nonzero("kappa", kappa)

    def q(x, y):
        return power(y, 1.0 / xi) + x

    def singular(x, y):
        return min(abs(y), abs(y ** (1.0 / xi) + x) if y > 0 else 0.0, abs(y - rho))

    return _metric(label, _TEMPLATES[label].chart(p), singular,
                   g12=lambda x, y: -kappa * q(x, y) / (y - rho) ** 3,
                   g22=lambda x, y: kappa * q(x, y) ** 2 / (y - rho) ** 4), None


def _c8(label: str, p: Dict):
    kappa, branch, constant = p["kappa"], p["branch"], p["constant"]
    _check_nonzero("kappa", kappa)
    _check_sign("branch", branch)
    Y = SpecialFn("y_c8" if label == "C.8.erf" else "y_c8_quadrature", constant=constant)

    def singular(x, y):
        if y * branch <= 0:
            return 0.0
        return min(abs(y), abs(float(Y(y)) + x))

    return _metric(label, _TEMPLATES[label].chart(p), singular,
                   g12=lambda x, y: kappa * (Y(y) + x) / 2), None


def _c9(label: str, p: Dict):
    if label == "C.9a":
        lam, theta = p["lam"], p["theta"]
        _check_positive("lam", lam)
        _check_angle("theta", theta)
        kappa = float(np.exp(lam * theta))
    else:
        lam, kappa = 0.0, p["kappa"]
        _check_positive("kappa", kappa)
    Y = SpecialFn("y_lambda", lam=lam, constant=p["constant"])

    def singular(x, y):
        return abs(float(Y(y)) + x)

    return _metric(label, _TEMPLATES[label].chart(p), singular,
                   g12=lambda x, y: kappa * (Y(y) + x) / 2), None


def _c9_upsilon(label: str, p: Dict):
    """Изометричная C.9 форма κ(Υ_λ(y) + x) dx dy, Υ_λ = Ξ′_λ."""
    lam, kappa = p["lam"], p["kappa"]
    _require(lam >= 0, f"lam = {lam}: требуется lam ≥ 0")
    _check_positive("kappa", kappa)
    U = SpecialFn("upsilon_lambda", lam=lam)

    def singular(x, y):
        return abs(float(U(y)) + x)

    return _metric(label, _TEMPLATES[label].chart(p), singular,
                   g12=lambda x, y: kappa * (U(y) + x) / 2), None


# --- Степень подвижности 3


def dom3_projective_field() -> VectorField2:
    """Общее проективное поле g1, g2, g3: X = 2x∂x + y∂y."""
    return VectorField2(lambda x, y: 2 * x, lambda x, y: y)


def _dom3_singular(x, y):
    return min(abs(y * y + x), abs(y), abs(3 * x - y * y))


def _dom3_generator(label: str, p: Dict):
    chart = _TEMPLATES[label].chart(p)
    if label == "dom3.g1":
        g = _metric(label, chart, _dom3_singular, g12=lambda x, y: (y * y + x) / 2)
    elif label == "dom3.g2":
        g = _metric(label, chart, _dom3_singular,
                    g12=lambda x, y: -(y * y + x) / y ** 3,
                    g22=lambda x, y: (y * y + x) ** 2 / y ** 4)
    else:
        def w(x, y):
            return (y * y + x) / (3 * x - y * y) ** 6
        g = _metric(label, chart, _dom3_singular,
                    g11=lambda x, y: 9 * (y * y + x) * w(x, y),
                    g12=lambda x, y: -2 * y * (9 * x + y * y) * w(x, y),
                    g22=lambda x, y: 12 * x * (y * y + x) * w(x, y))
    return g, dom3_projective_field()


def dom3_F(zeta, c, x, y):
    return (y ** 6 - 9 * x * y ** 4 + 27 * x * x * y * y - 27 * x ** 3 + 4 * c * c
            - (36 * x * y + 4 * y ** 3) * c
            + (18 * x * y * y - 5 * y ** 4 - 9 * x * x - 8 * c * y) * zeta + 4 * y * y * zeta * zeta)


def _dom3_normal_form(label: str, p: Dict):
    kappa = p["kappa"]
    _check_nonzero("kappa", kappa)
    chart = _TEMPLATES[label].chart(p)
    if label == "dom3.nf1":
        eps = p["eps"]
        _check_sign("eps", eps)

        def singular(x, y):
            return min(abs(y * y + x), abs(y - eps))

        g = _metric(label, chart, singular,
                    g12=lambda x, y: -kappa * (y * y + x) / (y - eps) ** 3,
                    g22=lambda x, y: kappa * (y * y + x) ** 2 / (y - eps) ** 4)
        return g, None

    eps = p["eps"]
    _check_sign("eps", eps)
    if label == "dom3.nf2":
        zeta, c = 0.0, eps
    else:
        zeta, c = eps, p["c"]

    def singular(x, y):
        return min(abs(y * y + x), abs(dom3_F(zeta, c, x, y)))

    def w(x, y):
        return kappa * (y * y + x) / dom3_F(zeta, c, x, y) ** 2

    if label == "dom3.nf2":
        g12 = lambda x, y: -(y ** 3 + 9 * x * y - 2 * eps) * w(x, y)
        g22 = lambda x, y: 12 * x * (y * y + x) * w(x, y)
    else:
        g12 = lambda x, y: -(y ** 3 + 2 * eps * y + 9 * x * y - 2 * c) * w(x, y)
        g22 = lambda x, y: 4 * (eps + 3 * x) * (y * y + x) * w(x, y)
    g = _metric(label, chart, singular,
                g11=lambda x, y: 9 * (y * y + x) * w(x, y), g12=g12, g22=g22)
    return g, None


def dom3_basis() -> Tuple[SigmaField, SigmaField, SigmaField]:
    """(σ1, σ2, σ3) из g1, g2, g3."""
    return tuple(sigma_from_metric(make(f"dom3.g{i}").metric) for i in (1, 2, 3))


def spherical_sigma(theta: float, phi: float) -> Tuple[SigmaField, SigmaField, SigmaField]:
    """(σ, σ̄, σ̂) на сфере параметров в базисе (σ1, σ2, σ3)."""
    basis = dom3_basis()
    return tuple(combine_sigmas(row, basis) for row in spherical_coefficients(theta, phi))


def _dom3_spherical(label: str, p: Dict):
    theta, phi = p["theta"], p["phi"]
    _require(_EPS < theta < np.pi - _EPS, f"θ = {theta}: требуется θ ∈ (0, π)")
    _check_angle("phi", phi)
    if abs(theta - np.pi / 2) <= _EPS:
        _require(min(abs(phi - k * np.pi / 2) for k in range(5)) > _EPS,
                 "θ = π/2: φ ∉ {0, π/2, π, 3π/2}")
    sigma = spherical_sigma(theta, phi)[0]
    g = metric_from_sigma(sigma, chart=_TEMPLATES[label].chart(p), singular_locus=_dom3_singular, label=label)
    return g, dom3_projective_field()


# --- Прочие


def _sphere(label: str, p: Dict):
    g = _metric(label, _TEMPLATES[label].chart(p), lambda x, y: abs(np.sin(y)),
                g11=lambda x, y: sin(y) ** 2, g22=lambda x, y: 1.0)
    return g, VectorField2(_zero, lambda x, y: sin(y) ** 2 * cos(x))


def _flat(label: str, p: Dict):
    g = _metric(label, _TEMPLATES[label].chart(p), None, g11=lambda x, y: 1.0, g22=lambda x, y: 1.0)
    return g, VectorField2(lambda x, y: x, lambda x, y: y)


def _supint_quotient(label: str, p: Dict):
    def singular(x, y):
        return abs(x * x + y)

    g = _metric(label, _TEMPLATES[label].chart(p), singular, g12=lambda x, y: (x * x + y) / 2)
    return g, VectorField2(lambda x, y: x, lambda x, y: 2 * y)


def _default_q1(y):
    return 1 + y * y


def _default_q2(y):
    return y / 2


def _default_q3(y):
    return 2.0 + 0 * y


def _dom1(label: str, p: Dict):
    lam, q1, q2, q3 = p["lam"], p["q1"], p["q2"], p["q3"]

    def singular(x, y):
        return abs(value(q1(y)) * value(q3(y)) - value(q2(y)) ** 2)

    g = _metric(label, _TEMPLATES[label].chart(p), singular,
                g11=lambda x, y: exp(lam * x) * q1(y),
                g12=lambda x, y: exp(lam * x) * q2(y),
                g22=lambda x, y: exp(lam * x) * q3(y))
    return g, VectorField2(lambda x, y: 1.0, _zero)


def _fixed(chart: Chart) -> Callable[[Dict], Chart]:
    return lambda p: chart


def _c8_chart(p: Dict) -> Chart:
    return (2.0, 4.0, 0.8, 2.0) if p["branch"] > 0 else (1.0, 2.0, -2.0, -0.5)


_KAPPA = ParamSpec(1.0, "κ ∈ ℝ∖{0}")
_KAPPA_POS = ParamSpec(1.0, "κ > 0")
_EPS_SIGN = ParamSpec(1, "ε ∈ {±1}")
_RHO = ParamSpec(1, "ϱ ∈ {±1}")
_THETA = ParamSpec(0.5, "θ ∈ [0, 2π)")
_PHI = ParamSpec(np.pi / 4, "C = e^{iφ}, φ ∈ [0, π)")

_DINI_A = {"X": ParamSpec(_default_X, "функция X(x)"), "Y": ParamSpec(_default_Y, "функция Y(y)"),
           "sign": ParamSpec(1, "знак ± ∈ {±1}")}
_DINI_B = {"h": ParamSpec(_default_h, "голоморфная функция h(z)")}
_DINI_C = {"Y": ParamSpec(_default_Y, "функция Y(y)")}
_DOM1 = {"lam": ParamSpec(1.0, "λ ∈ ℝ"), "q1": ParamSpec(_default_q1, "функция q1(y)"),
         "q2": ParamSpec(_default_q2, "функция q2(y)"), "q3": ParamSpec(_default_q3, "функция q3(y)")}

_DOM3_CHART = (0.5, 1.5, 0.5, 1.0)

_TEMPLATES: Dict[str, _Template] = {
    "sphere": _Template(_sphere, {}, _fixed((-3.0, 3.0, 0.2, np.pi - 0.2)), "sin y = 0",
                        description="sin²y dx² + dy², X = sin²y cos x ∂_y"),
    "flat": _Template(_flat, {}, _fixed((-2.0, 2.0, -2.0, 2.0)), "нет",
                      description="dx² + dy², X = x∂_x + y∂_y"),
    "dini.liouville": _Template(_liouville, _DINI_A, _fixed((-1.0, 1.0, -0.5, 0.5)), "X = Y, X = 0, Y = 0",
                                dini_type="A", dini_partner="dini.liouville.bar",
                                default_descriptions={"X": "x + 2", "Y": "y - 1"}),
    "dini.liouville.bar": _Template(_liouville, _DINI_A, _fixed((-1.0, 1.0, -0.5, 0.5)), "X = Y, X = 0, Y = 0",
                                    dini_type="A", dini_partner="dini.liouville",
                                    default_descriptions={"X": "x + 2", "Y": "y - 1"}),
    "dini.complex": _Template(_complex_liouville, _DINI_B, _fixed((0.2, 1.2, 0.2, 1.2)), "Im h(z) = 0, h(z) = 0",
                              dini_type="B", dini_partner="dini.complex.bar", default_descriptions={"h": "z"}),
    "dini.complex.bar": _Template(_complex_liouville, _DINI_B, _fixed((0.2, 1.2, 0.2, 1.2)),
                                  "Im h(z) = 0, h(z) = 0",
                                  dini_type="B", dini_partner="dini.complex", default_descriptions={"h": "z"}),
    "dini.jordan": _Template(_jordan, _DINI_C, _fixed((-0.5, 1.0, -0.5, 0.5)), "1 + xY' = 0, Y = 0",
                             dini_type="C", dini_partner="dini.jordan.bar", default_descriptions={"Y": "y - 1"}),
    "dini.jordan.bar": _Template(_jordan, _DINI_C, _fixed((-0.5, 1.0, -0.5, 0.5)), "1 + xY' = 0, Y = 0",
                                 dini_type="C", dini_partner="dini.jordan", default_descriptions={"Y": "y - 1"}),
    "A.1": _Template(_a1, {"eps": _EPS_SIGN, "h": ParamSpec(0.5, "0 ≠ h ≤ 1"),
                           "xi": ParamSpec(0.5, "ξ ∈ (0,1) ∪ (1,4]"), "rho": _RHO, "kappa": _KAPPA},
                     _fixed((-0.5, 0.5, -0.5, 0.5)), "e^{ξx} = h e^{ξy}, 1 + ϱhe^{ξy} = 0, 1 + ϱe^{ξx} = 0",
                     table_row="A.1", dini_type="A"),
    "A.2": _Template(_a2, {"h": ParamSpec(0.5, "0 ≠ h ≤ 1"), "kappa": _KAPPA},
                     _fixed((0.2, 0.8, 1.2, 2.0)), "x = y, x = 0, y = 0", table_row="A.2", dini_type="A"),
    "A.3a": _Template(_a3, {"h": ParamSpec(0.2, "0 ≠ h ≤ 1, |h| ≤ e^{−3λπ}"), "lam": ParamSpec(0.1, "λ > 0"),
                            "theta": _THETA},
                      _fixed((0.1, 0.6, 1.0, 1.8)), "sin(y − x) = 0, sin(x + θ) = 0, sin(y + θ) = 0",
                      table_row="A.3a", dini_type="A"),
    "A.3b": _Template(_a3, {"h": ParamSpec(0.5, "0 ≠ h ≤ 1, h ≠ ±1"), "kappa": _KAPPA_POS},
                      _fixed((0.3, 0.9, 1.3, 2.2)), "sin(y − x) = 0, sin x = 0, sin y = 0",
                      table_row="A.3b", dini_type="A"),
    "B.4": _Template(_b4, {"phi": _PHI, "xi": ParamSpec(0.5, "ξ ∈ (0,1) ∪ (1,4]"), "kappa": _KAPPA},
                     _fixed((0.3, 1.5, 0.2, 1.0)), "Im(Cz^ξ) = 0, 1 + Cz^ξ = 0", table_row="B.4", dini_type="B"),
    "B.5": _Template(_b5, {"phi": _PHI, "kappa": _KAPPA_POS},
                     _fixed((0.2, 1.2, 0.2, 1.2)), "y = 0, z = 0", table_row="B.5", dini_type="B"),
    "B.6a": _Template(_b6, {"phi": _PHI, "lam": ParamSpec(0.5, "λ > 0"), "theta": _THETA},
                      _fixed((0.3, 1.3, 0.2, 1.0)), "y = 0, sin(z + θ) = 0", table_row="B.6a", dini_type="B"),
    "B.6b": _Template(_b6, {"phi": _PHI, "kappa": _KAPPA_POS},
                      _fixed((0.3, 1.3, 0.2, 1.0)), "y = 0, sin z = 0", table_row="B.6b", dini_type="B"),
    "C.7": _Template(_c7, {"xi": ParamSpec(2.0, "ξ ∈ (0,1) ∪ (1,4], ξ ≠ 1/2"), "rho": ParamSpec(-1, "ϱ ∈ {±1}"),
                           "kappa": _KAPPA},
                     _fixed((0.5, 1.5, 0.5, 1.5)), "y = 0, y^{1/ξ} + x = 0, y = ϱ", table_row="C.7", dini_type="C"),
    "C.8": _Template(_c8, {"kappa": _KAPPA, "branch": ParamSpec(1, "знак y ∈ {±1}"),
                           "constant": ParamSpec(0.0, "константа интегрирования")},
                     _c8_chart, "y = 0, Y(y) + x = 0", table_row="C.8", dini_type="C",
                     description="Y(y) квадратурой от y0 = ±1; та же метрика через erf/erfi: метка C.8.erf"),
    "C.8.erf": _Template(_c8, {"kappa": _KAPPA, "branch": ParamSpec(1, "знак y ∈ {±1}"),
                               "constant": ParamSpec(0.0, "константа интегрирования")},
                         _c8_chart, "y = 0, Y(y) + x = 0", table_row="C.8", dini_type="C",
                         description="Y(y) через erf/erfi"),
    "C.9a": _Template(_c9, {"lam": ParamSpec(0.5, "λ > 0"), "theta": ParamSpec(0.0, "θ ∈ [0, 2π)"),
                            "constant": ParamSpec(0.0, "константа интегрирования")},
                      _fixed((4.0, 5.0, -1.0, 1.0)), "Y_λ(y) + x = 0", table_row="C.9a", dini_type="C"),
    "C.9b": _Template(_c9, {"kappa": _KAPPA_POS, "constant": ParamSpec(0.0, "константа интегрирования")},
                      _fixed((4.0, 5.0, -1.0, 1.0)), "Y_0(y) + x = 0", table_row="C.9b", dini_type="C"),
    "C.9.upsilon": _Template(_c9_upsilon, {"lam": ParamSpec(0.5, "λ ≥ 0"), "kappa": _KAPPA_POS},
                             _fixed((4.0, 5.0, -1.0, 1.0)), "Υ_λ(y) + x = 0", table_row="C.9", dini_type="C",
                             description="κ(Υ_λ(y) + x) dx dy, Υ_λ = Ξ′_λ; изометрична C.9a (λ > 0) и C.9b (λ = 0)"),
    "dom3.g1": _Template(_dom3_generator, {}, _fixed(_DOM3_CHART), "y² + x = 0",
                         description="(y² + x) dx dy"),
    "dom3.g2": _Template(_dom3_generator, {}, _fixed(_DOM3_CHART), "y² + x = 0, y = 0"),
    "dom3.g3": _Template(_dom3_generator, {}, _fixed(_DOM3_CHART), "y² + x = 0, 3x = y²"),
    "dom3.nf1": _Template(_dom3_normal_form, {"kappa": _KAPPA, "eps": ParamSpec(-1, "ε ∈ {±1}")},
                          _fixed(_DOM3_CHART), "y² + x = 0, y = ε"),
    "dom3.nf2": _Template(_dom3_normal_form, {"kappa": _KAPPA, "eps": _EPS_SIGN},
                          _fixed(_DOM3_CHART), "y² + x = 0, F(0, ε) = 0"),
    "dom3.nf3": _Template(_dom3_normal_form, {"kappa": _KAPPA, "eps": _EPS_SIGN, "c": ParamSpec(0.5, "c ∈ ℝ")},
                          _fixed(_DOM3_CHART), "y² + x = 0, F(ε, c) = 0"),
    "dom3.spherical": _Template(_dom3_spherical, {"theta": ParamSpec(1.0, "θ ∈ (0, π)"),
                                                  "phi": ParamSpec(0.7, "φ ∈ [0, 2π), при θ = π/2 φ ∉ {kπ/2}")},
                                _fixed(_DOM3_CHART), "y² + x = 0, 3x = y², det σ = 0"),
    "supint.quotient": _Template(_supint_quotient, {}, _fixed((0.5, 1.5, 0.5, 1.5)), "x² + y = 0",
                                 description="(x² + y) dx dy, X = x∂_x + 2y∂_y"),
    "dom1": _Template(_dom1, _DOM1, _fixed((-1.0, 1.0, -1.0, 1.0)), "q1 q3 = q2²",
                      description="e^{λx}(q1 dx² + 2 q2 dx dy + q3 dy²), X = ∂_x",
                      default_descriptions={"q1": "1 + y^2", "q2": "y / 2", "q3": "2"}),
}


def list_labels() -> List[str]:
    return sorted(_TEMPLATES)


def list_entries() -> Dict[str, Dict[str, str]]:
    """Метка → {параметр: ограничение}."""
    return {label: {k: s.constraint for k, s in _TEMPLATES[label].params.items()} for label in list_labels()}


def _resolve_params(label: str, params: Optional[Dict]) -> Dict:
    template = _TEMPLATES[label]
    params = dict(params or {})
    unknown = set(params) - set(template.params)
    if unknown:
        raise BadParam(f"{label}: неизвестные параметры {sorted(unknown)}")
    resolved = {}
    for name, spec in template.params.items():
        v = params.get(name, spec.default)
        if not callable(v):
            try:
                v = float(v)
            except (TypeError, ValueError):
                raise BadParam(f"{label}: параметр {name} = {v!r} не число")
            if not np.isfinite(v):
                raise BadParam(f"{label}: параметр {name} = {v} не конечен")
            if v.is_integer() and isinstance(spec.default, int):
                v = int(v)
        resolved[name] = v
    return resolved


def make(label: str, params: Optional[Dict] = None) -> CatalogEntry:
    """Строит запись каталога; нарушенное ограничение названо в BadParam."""
    if label not in _TEMPLATES:
        raise BadParam(f"Неизвестная метка каталога: {label}")
    p = _resolve_params(label, params)
    metric, X = _TEMPLATES[label].builder(label, p)
    logger.debug(f"Построена метрика {label} с параметрами {p}")
    return CatalogEntry(label=label, params=p, metric=metric, projective_field=X,
                        dini_partner=_TEMPLATES[label].dini_partner)


_DINI_KINDS = {"A": "dini.liouville", "B": "dini.complex", "C": "dini.jordan"}


def dini_pair(kind: str, params: Optional[Dict] = None) -> Tuple[CatalogEntry, CatalogEntry]:
    """Пара Дини (g, ḡ) типа A, B или C с общими функциями X, Y, h."""
    key = kind.upper()
    if key not in _DINI_KINDS:
        raise BadParam(f"Тип Дини {kind}: требуется A, B или C")
    base = _DINI_KINDS[key]
    return make(base, params), make(base + ".bar", params)


def schema() -> Dict:
    """Описание каталога для подкоманды catalog."""
    out = {}
    for label in list_labels():
        t = _TEMPLATES[label]
        params = {}
        for name, spec in t.params.items():
            default = t.default_descriptions.get(name, spec.default) if callable(spec.default) else spec.default
            params[name] = {"default": default, "constraint": spec.constraint}
        defaults = {k: s.default for k, s in t.params.items()}
        out[label] = {
            "params": params,
            "chart": [float(c) for c in t.chart(defaults)],
            "singular_locus": t.singular,
            "table_row": t.table_row or None,
            "dini_type": t.dini_type or None,
            "dini_partner": t.dini_partner,
            "description": t.description or None,
        }
    return out
