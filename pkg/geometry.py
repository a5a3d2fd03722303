"""
Геометрия на плоскости: метрики, символы Кристоффеля, проективные связности,
уравнения метризуемости, тензоры Бененти, тензоры Киллинга и интегралы
от проективных векторных полей.

Все поля — функции f(x, y), которые принимают как числа, так и джеты (см. jets.py).
"""

import logging
from dataclasses import dataclass
from typing import Any, Callable, Iterable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from config import DEFAULTS
from errors import DegenerateSigma, NullDirection, ProjConnError, SingularMetric, VerticalTangent
from jets import Scalar2Jet, absolute, power, value

logger = logging.getLogger(__name__)

ScalarField = Callable[[Any, Any], Any]
Chart = Tuple[float, float, float, float]

WHOLE_PLANE: Chart = (-np.inf, np.inf, -np.inf, np.inf)


def _as_jet(u) -> Scalar2Jet:
    return u if isinstance(u, Scalar2Jet) else Scalar2Jet(u)


def _lift_point(x, y) -> Tuple[Scalar2Jet, Scalar2Jet]:
    return Scalar2Jet.variable_x(x), Scalar2Jet.variable_y(y)


def _d(j: Scalar2Jet, k: int):
    return j.dx if k == 0 else j.dy


def _d2(j: Scalar2Jet, k: int, l: int):
    if k == l:
        return j.dxx if k == 0 else j.dyy
    return j.dxy


def _num(u) -> float:
    return float(np.real(value(u)))


@dataclass(frozen=True)
class Metric2:
    """Симметричная 2×2 метрика произвольной сигнатуры, хранятся g11, g12, g22."""

    g11: ScalarField
    g12: ScalarField
    g22: ScalarField
    chart: Chart = WHOLE_PLANE
    singular_locus: Optional[Callable[[float, float], float]] = None
    label: str = ""
    complex_components: Optional[Callable] = None

    def components(self, x, y) -> Tuple:
        return self.g11(x, y), self.g12(x, y), self.g22(x, y)

    def matrix(self, x: float, y: float) -> np.ndarray:
        a, b, c = (_num(v) for v in self.components(x, y))
        return np.array([[a, b], [b, c]])

    def det(self, x: float, y: float) -> float:
        return float(np.linalg.det(self.matrix(x, y)))

    def singular_distance(self, x: float, y: float) -> float:
        """Оценка расстояния до особого множества (inf, если оно не задано)."""
        if self.singular_locus is None:
            return np.inf
        return float(self.singular_locus(x, y))

    def in_chart(self, x: float, y: float, margin: float = 0.0) -> bool:
        xmin, xmax, ymin, ymax = self.chart
        return xmin + margin <= x <= xmax - margin and ymin + margin <= y <= ymax - margin

    def is_regular(self, x: float, y: float,
                   margin: float = DEFAULTS["singular_margin"],
                   det_tol: float = DEFAULTS["det_tol"]) -> bool:
        if not self.in_chart(x, y):
            return False
        if self.singular_distance(x, y) < margin:
            return False
        with np.errstate(all="ignore"):
            try:
                m = self.matrix(x, y)
            except (ZeroDivisionError, ValueError, OverflowError, ProjConnError):
                return False
        if not np.all(np.isfinite(m)):
            return False
        scale = max(np.max(np.abs(m)) ** 2, 1e-300)
        return abs(np.linalg.det(m)) > det_tol * scale

    def sample_points(self, n: int, rng: np.random.Generator,
                      margin: float = DEFAULTS["singular_margin"],
                      max_tries: int = 100000) -> np.ndarray:
        """n равномерно распределённых точек карты вне особого множества."""
        xmin, xmax, ymin, ymax = self.chart
        if not all(np.isfinite([xmin, xmax, ymin, ymax])):
            xmin, xmax = max(xmin, -2.0), min(xmax, 2.0)
            ymin, ymax = max(ymin, -2.0), min(ymax, 2.0)
        points = []
        rejected = 0
        while len(points) < n:
            if rejected > max_tries:
                raise SingularMetric(f"Не удалось выбрать {n} регулярных точек для {self.label}")
            x, y = rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)
            if self.is_regular(x, y, margin=margin):
                points.append((x, y))
            else:
                rejected += 1
        if rejected:
            logger.debug(f"{self.label}: отброшено {rejected} точек у особого множества")
        return np.array(points)


@dataclass(frozen=True)
class Christoffel2:
    """Γ^k_ij в точке, gamma[k, i, j]; симметрия по i, j выполняется по построению."""

    gamma: np.ndarray

    def __getitem__(self, idx):
        return self.gamma[idx]


@dataclass(frozen=True)
class ProjConn:
    """y_xx = f0 + f1 y_x + f2 y_x² + f3 y_x³."""

    f0: ScalarField
    f1: ScalarField
    f2: ScalarField
    f3: ScalarField
    joint: Optional[Callable[[Any, Any], Tuple]] = None

    def at(self, x, y) -> Tuple:
        if self.joint is not None:
            return self.joint(x, y)
        return self.f0(x, y), self.f1(x, y), self.f2(x, y), self.f3(x, y)

    def rhs(self, x, y, yx):
        f0, f1, f2, f3 = self.at(x, y)
        return f0 + yx * (f1 + yx * (f2 + yx * f3))


@dataclass(frozen=True)
class SigmaField:
    """Компоненты σ^ij взвешенного (2,0)-тензора."""

    s11: ScalarField
    s12: ScalarField
    s22: ScalarField

    def components(self, x, y) -> Tuple:
        return self.s11(x, y), self.s12(x, y), self.s22(x, y)

    def vector(self, x: float, y: float) -> np.ndarray:
        return np.array([_num(v) for v in self.components(x, y)])


@dataclass(frozen=True)
class VectorField2:
    X1: ScalarField
    X2: ScalarField

    def components(self, x, y) -> Tuple:
        return self.X1(x, y), self.X2(x, y)


@dataclass(frozen=True)
class QuadraticForm2:
    """Ковариантный симметричный тензор h_ij (квадратичный интеграл, тензор Киллинга)."""

    h11: ScalarField
    h12: ScalarField
    h22: ScalarField

    def components(self, x, y) -> Tuple:
        return self.h11(x, y), self.h12(x, y), self.h22(x, y)

    def matrix(self, x: float, y: float) -> np.ndarray:
        a, b, c = (_num(v) for v in self.components(x, y))
        return np.array([[a, b], [b, c]])

    def scaled(self, factor: float) -> "QuadraticForm2":
        return QuadraticForm2(
            lambda x, y: factor * self.h11(x, y),
            lambda x, y: factor * self.h12(x, y),
            lambda x, y: factor * self.h22(x, y),
        )


@dataclass(frozen=True)
class Benenti2:
    """Значение (1,1)-тензора L(g, ḡ) в точке."""

    L: np.ndarray

    def is_self_adjoint(self, g: np.ndarray, tol: float = 1e-10) -> bool:
        gl = g @ self.L
        return bool(np.max(np.abs(gl - gl.T)) <= tol * max(np.max(np.abs(gl)), 1e-300))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.L)


class ProjectiveFieldResidual(NamedTuple):
    residual: float
    mu: np.ndarray
    tensor: np.ndarray


def combine_sigmas(coeffs: Sequence[float], basis: Sequence[SigmaField]) -> SigmaField:
    """Линейная комбинация Σ c_k σ_k."""
    pairs = [(c, s) for c, s in zip(coeffs, basis) if c != 0]

    def comp(name):
        def f(x, y):
            total = 0.0
            for c, s in pairs:
                total = total + c * getattr(s, name)(x, y)
            return total
        return f

    return SigmaField(comp("s11"), comp("s12"), comp("s22"))


def _check_det(det, scale, det_tol: float, what: str = "g"):
    d = abs(_num(det))
    if not np.isfinite(d) or d <= det_tol * max(scale, 1e-300):
        raise SingularMetric(f"Вырожденная метрика: |det {what}| = {d:.3e}")


def christoffel(g: Metric2, p, det_tol: float = DEFAULTS["det_tol"]) -> Christoffel2:
    """
    Символы Кристоффеля связности Леви-Чивиты.

    Точка p может состоять из джетов: тогда Γ возвращаются джетами с точными
    производными (нужны третьи производные g в projective_field_residual).
    """
    x, y = p
    X, Y = _lift_point(x, y)
    j11, j12, j22 = (_as_jet(c) for c in g.components(X, Y))
    G = ((j11, j12), (j12, j22))
    det = j11.v * j22.v - j12.v * j12.v
    scale = max(abs(_num(j11.v)), abs(_num(j12.v)), abs(_num(j22.v))) ** 2
    _check_det(det, scale, det_tol)
    inv = ((j22.v / det, -j12.v / det), (-j12.v / det, j11.v / det))

    gamma = np.empty((2, 2, 2), dtype=object)
    for k in range(2):
        for i in range(2):
            for j in range(i, 2):
                total = 0.0
                for l in range(2):
                    total = total + inv[k][l] * (_d(G[l][j], i) + _d(G[l][i], j) - _d(G[i][j], l))
                gamma[k, i, j] = gamma[k, j, i] = 0.5 * total
    if not any(isinstance(v, Scalar2Jet) for v in gamma.flat):
        gamma = gamma.astype(float)
    return Christoffel2(gamma)


def _projective_coefficients(g: Metric2, x, y) -> Tuple:
    G = christoffel(g, (x, y)).gamma
    return (
        -G[1, 0, 0],
        G[0, 0, 0] - 2 * G[1, 0, 1],
        -(G[1, 1, 1] - 2 * G[0, 0, 1]),
        G[0, 1, 1],
    )


def proj_conn_from_metric(g: Metric2) -> ProjConn:
    """Проективная связность класса метрики g."""

    def field(idx):
        return lambda x, y: _projective_coefficients(g, x, y)[idx]

    return ProjConn(field(0), field(1), field(2), field(3),
                    joint=lambda x, y: _projective_coefficients(g, x, y))


def _sigma_components(g: Metric2, x, y) -> Tuple:
    g11, g12, g22 = g.components(x, y)
    det = g11 * g22 - g12 * g12
    w = power(absolute(det), 1.0 / 3.0) / det
    return w * g22, -w * g12, w * g11


def sigma_from_metric(g: Metric2) -> SigmaField:
    """σ = |det g|^{1/3} g⁻¹."""
    return SigmaField(
        lambda x, y: _sigma_components(g, x, y)[0],
        lambda x, y: _sigma_components(g, x, y)[1],
        lambda x, y: _sigma_components(g, x, y)[2],
    )


def _metric_components(s: SigmaField, x, y, det_tol: float) -> Tuple:
    s11, s12, s22 = s.components(x, y)
    det = s11 * s22 - s12 * s12
    scale = max(abs(_num(s11)), abs(_num(s12)), abs(_num(s22))) ** 2
    d = abs(_num(det))
    if not np.isfinite(d) or d <= det_tol * max(scale, 1e-300):
        raise DegenerateSigma(f"|det σ| = {d:.3e} ниже допуска")
    w = 1 / (det * absolute(det))
    return w * s22, -w * s12, w * s11


def metric_from_sigma(s: SigmaField, chart: Chart = WHOLE_PLANE,
                      singular_locus: Optional[Callable] = None, label: str = "",
                      det_tol: float = DEFAULTS["det_tol"]) -> Metric2:
    """g = σ⁻¹ / |det σ|; знак det σ совпадает со знаком det g."""
    return Metric2(
        lambda x, y: _metric_components(s, x, y, det_tol)[0],
        lambda x, y: _metric_components(s, x, y, det_tol)[1],
        lambda x, y: _metric_components(s, x, y, det_tol)[2],
        chart=chart,
        singular_locus=singular_locus,
        label=label,
    )


def metrizability_terms(pc: ProjConn, s: SigmaField, p) -> Tuple[Tuple, ...]:
    """Слагаемые четырёх уравнений метризуемости в точке p."""
    x, y = p
    X, Y = _lift_point(x, y)
    a, b, c = (_as_jet(v) for v in s.components(X, Y))
    f0, f1, f2, f3 = (_num(v) for v in pc.at(x, y))
    A, B, C = _num(a.v), _num(b.v), _num(c.v)
    return (
        (_num(c.dx), -2.0 / 3.0 * f1 * C, -2.0 * f0 * B),
        (_num(c.dy), -2.0 * _num(b.dx), -4.0 / 3.0 * f2 * C, -2.0 / 3.0 * f1 * B, 2.0 * f0 * A),
        (-2.0 * _num(b.dy), _num(a.dx), -2.0 * f3 * C, 2.0 / 3.0 * f2 * B, 4.0 / 3.0 * f1 * A),
        (_num(a.dy), 2.0 * f3 * B, 2.0 / 3.0 * f2 * A),
    )


def metrizability_residual(pc: ProjConn, s: SigmaField, p, relative: bool = False,
                           scale_floor: float = DEFAULTS["scale_floor"]) -> np.ndarray:
    """
    Левые части линейной системы для σ^ij в точке p.

    При relative=True все четыре невязки делятся на общий масштаб:
    max|слагаемое| по всей системе, но не меньше max|σ^ij| и scale_floor.
    """
    system = metrizability_terms(pc, s, p)
    out = np.array([sum(terms) for terms in system])
    if not relative:
        return out
    x, y = p
    sigma = max(abs(_num(v)) for v in s.components(x, y))
    scale = max(max(abs(t) for terms in system for t in terms), sigma, scale_floor)
    return out / scale


def benenti(g: Metric2, gbar: Metric2, p, det_tol: float = DEFAULTS["det_tol"]) -> Benenti2:
    """L(g, ḡ) = |det ḡ / det g|^{1/3} ḡ⁻¹ g."""
    x, y = p
    G, Gb = g.matrix(x, y), gbar.matrix(x, y)
    d, db = np.linalg.det(G), np.linalg.det(Gb)
    _check_det(d, np.max(np.abs(G)) ** 2, det_tol)
    _check_det(db, np.max(np.abs(Gb)) ** 2, det_tol, what="ḡ")
    return Benenti2(abs(db / d) ** (1.0 / 3.0) * np.linalg.solve(Gb, G))


def killing_residual(g: Metric2, K: QuadraticForm2, p, relative: bool = False,
                     scale_floor: float = DEFAULTS["scale_floor"]) -> np.ndarray:
    """
    Компоненты ∇_(k K_ij) для (ijk) = 111, 112, 122, 222.

    При relative=True делятся на общий масштаб: max|слагаемое| по всем компонентам,
    но не меньше max|K_ij| и scale_floor.
    """
    x, y = p
    Gamma = christoffel(g, p).gamma
    X, Y = _lift_point(x, y)
    k11, k12, k22 = (_as_jet(v) for v in K.components(X, Y))
    Kj = ((k11, k12), (k12, k22))
    Kv = np.array([[_num(k11.v), _num(k12.v)], [_num(k12.v), _num(k22.v)]])

    def nabla(k, i, j):
        terms = [_num(_d(Kj[i][j], k))]
        for a in range(2):
            terms.append(-Gamma[a, k, i] * Kv[a, j])
            terms.append(-Gamma[a, k, j] * Kv[i, a])
        return terms

    system = [nabla(k, i, j) + nabla(i, j, k) + nabla(j, k, i)
              for i, j, k in ((0, 0, 0), (0, 0, 1), (0, 1, 1), (1, 1, 1))]
    out = np.array([sum(terms) / 3.0 for terms in system])
    if not relative:
        return out
    scale = max(max(abs(t) for terms in system for t in terms), np.max(np.abs(Kv)), scale_floor)
    return out / scale


def _projective_integral_components(g: Metric2, X: VectorField2, x, y) -> Tuple:
    Gamma = christoffel(g, (x, y)).gamma
    PX, PY = _lift_point(x, y)
    gj = [_as_jet(v) for v in g.components(PX, PY)]
    G = ((gj[0], gj[1]), (gj[1], gj[2]))
    Xj = [_as_jet(v) for v in X.components(PX, PY)]
    lowered = [G[i][0] * Xj[0] + G[i][1] * Xj[1] for i in range(2)]

    def nabla(j, i):
        # ∇_j X_i
        total = _d(lowered[i], j)
        for k in range(2):
            total = total - Gamma[k, j, i] * lowered[k].v
        return total

    div = _d(Xj[0], 0) + _d(Xj[1], 1)
    for i in range(2):
        for j in range(2):
            div = div + Gamma[i, i, j] * Xj[j].v

    def h(i, j):
        return 0.5 * (nabla(j, i) + nabla(i, j)) - 2.0 / 3.0 * div * G[i][j].v

    return h(0, 0), h(0, 1), h(1, 1)


def killing_from_projective_field(g: Metric2, X: VectorField2) -> QuadraticForm2:
    """h_ij = X_(i;j) − (2/3) div X · g_ij: квадратичный интеграл от проективного поля X."""
    return QuadraticForm2(
        lambda x, y: _projective_integral_components(g, X, x, y)[0],
        lambda x, y: _projective_integral_components(g, X, x, y)[1],
        lambda x, y: _projective_integral_components(g, X, x, y)[2],
    )


def killing_from_pair(g: Metric2, gbar: Metric2) -> QuadraticForm2:
    """K = |det g / det ḡ|^{2/3} ḡ: тензор Киллинга g из проективно эквивалентной ḡ."""

    def comps(x, y):
        a, b, c = g.components(x, y)
        A, B, C = gbar.components(x, y)
        w = power(absolute((a * c - b * b) / (A * C - B * B)), 2.0 / 3.0)
        return w * A, w * B, w * C

    return QuadraticForm2(
        lambda x, y: comps(x, y)[0],
        lambda x, y: comps(x, y)[1],
        lambda x, y: comps(x, y)[2],
    )


def metric_from_killing(g: Metric2, K: QuadraticForm2, label: str = "") -> Metric2:
    """ḡ = (det g / det K)² K — метрика, проективно эквивалентная g."""

    def comps(x, y):
        a, b, c = g.components(x, y)
        A, B, C = K.components(x, y)
        dk = A * C - B * B
        if abs(_num(dk)) <= DEFAULTS["det_tol"] * max(abs(_num(A)), abs(_num(B)), abs(_num(C)), 1e-300) ** 2:
            raise SingularMetric("det K ≈ 0: метрика из тензора Киллинга не определена")
        w = ((a * c - b * b) / dk) ** 2
        return w * A, w * B, w * C

    return Metric2(
        lambda x, y: comps(x, y)[0],
        lambda x, y: comps(x, y)[1],
        lambda x, y: comps(x, y)[2],
        chart=g.chart,
        singular_locus=g.singular_locus,
        label=label or f"{g.label}.from_killing",
    )


def benenti_integral(g: Metric2, gbar: Metric2, p, xi: Sequence[float]) -> float:
    """I(ξ) = det(L) g(L⁻¹ξ, ξ)."""
    x, y = p
    L = benenti(g, gbar, p).L
    xi = np.asarray(xi, dtype=float)
    return float(np.linalg.det(L) * (np.linalg.solve(L, xi) @ g.matrix(x, y) @ xi))


def quadratic_value(h: QuadraticForm2, p, xi: Sequence[float]) -> float:
    x, y = p
    xi = np.asarray(xi, dtype=float)
    return float(xi @ h.matrix(x, y) @ xi)


def rational_integral(h: QuadraticForm2, g: Metric2, p, yx: float,
                      null_tol: float = DEFAULTS["null_tol"]) -> float:
    """(h11 + 2 h12 y_x + h22 y_x²) / (g11 + 2 g12 y_x + g22 y_x²)."""
    x, y = p
    g11, g12, g22 = (_num(v) for v in g.components(x, y))
    h11, h12, h22 = (_num(v) for v in h.components(x, y))
    terms = (g11, 2 * g12 * yx, g22 * yx * yx)
    den = sum(terms)
    if abs(den) <= null_tol * max(max(abs(t) for t in terms), 1e-300):
        raise NullDirection(f"g(ξ, ξ) ≈ 0 при y_x = {yx}")
    return (h11 + 2 * h12 * yx + h22 * yx * yx) / den


def projective_field_residual(g: Metric2, X: VectorField2, p) -> ProjectiveFieldResidual:
    """
    max|ℒ_X Γ^i_jk − μ_j δ^i_k − μ_k δ^i_j| и 1-форма μ_j = (1/3)(ℒ_X Γ)^a_aj.

    Γ считается в точке из джетов, поэтому ∂Γ точные (третьи производные g).
    """
    x0, y0 = p
    P = _lift_point(x0, y0)
    Gamma = np.vectorize(_as_jet, otypes=[object])(christoffel(g, P).gamma)
    Xj = [_as_jet(v) for v in X.components(*P)]
    G = np.array([[[_num(Gamma[k, i, j].v) for j in range(2)] for i in range(2)] for k in range(2)])
    dX = np.array([[_num(_d(Xj[i], a)) for a in range(2)] for i in range(2)])
    Xv = np.array([_num(Xj[0].v), _num(Xj[1].v)])

    lie = np.zeros((2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                total = _num(_d2(Xj[i], j, k))
                for a in range(2):
                    total += Xv[a] * _num(_d(Gamma[i, j, k], a))
                    total -= G[a, j, k] * dX[i, a]
                    total += G[i, a, k] * dX[a, j]
                    total += G[i, j, a] * dX[a, k]
                lie[i, j, k] = total

    mu = np.array([sum(lie[a, a, j] for a in range(2)) / 3.0 for j in range(2)])
    delta = np.eye(2)
    tensor = lie - np.einsum("j,ik->ijk", mu, delta) - np.einsum("k,ij->ijk", mu, delta)
    return ProjectiveFieldResidual(float(np.max(np.abs(tensor))), mu, tensor)


def lie_sigma_from_jets(sj: Sequence[Scalar2Jet], Xj: Sequence[Scalar2Jet]) -> Tuple:
    """(ℒ_X σ)^ij по джетам σ^11, σ^12, σ^22 и X^1, X^2 в одной точке."""
    S = ((sj[0], sj[1]), (sj[1], sj[2]))
    div = _d(Xj[0], 0) + _d(Xj[1], 1)

    def comp(i, j):
        total = 2.0 / 3.0 * div * S[i][j].v
        for a in range(2):
            total = total + Xj[a].v * _d(S[i][j], a)
            total = total - S[a][j].v * _d(Xj[i], a)
            total = total - S[i][a].v * _d(Xj[j], a)
        return total

    return comp(0, 0), comp(0, 1), comp(1, 1)


def _lie_sigma_components(s: SigmaField, X: VectorField2, x, y) -> Tuple:
    PX, PY = _lift_point(x, y)
    sj = [_as_jet(v) for v in s.components(PX, PY)]
    Xj = [_as_jet(v) for v in X.components(PX, PY)]
    return lie_sigma_from_jets(sj, Xj)


def lie_derivative_sigma(s: SigmaField, X: VectorField2) -> SigmaField:
    """(ℒ_X σ)^ij = X^a ∂_a σ^ij − σ^aj ∂_a X^i − σ^ia ∂_a X^j + (2/3)(∂_a X^a) σ^ij."""
    return SigmaField(
        lambda x, y: _lie_sigma_components(s, X, x, y)[0],
        lambda x, y: _lie_sigma_components(s, X, x, y)[1],
        lambda x, y: _lie_sigma_components(s, X, x, y)[2],
    )


def jet_project(t: float, x: float, y: float, xd: float, yd: float, xdd: float, ydd: float,
                tol: float = 1e-12) -> Tuple[float, float, float, float]:
    """(x, y, ẏ/ẋ, (ÿẋ − ẍẏ)/ẋ³)."""
    if abs(xd) <= tol:
        raise VerticalTangent(f"ẋ = {xd:.3e} при t = {t}")
    return x, y, yd / xd, (ydd * xd - xdd * yd) / xd ** 3


def quotient_ode_residual(pc: ProjConn, x: float, y: float, yx: float, yxx: float) -> float:
    return float(yxx - _num(pc.rhs(x, y, yx)))


def projective_equivalent(g: Metric2, gbar: Metric2, points: Iterable, rtol: float = 1e-9) -> bool:
    """Совпадают ли f0..f3 у g и ḡ во всех точках."""
    pc, pcb = proj_conn_from_metric(g), proj_conn_from_metric(gbar)
    for x, y in points:
        a = np.array([_num(v) for v in pc.at(x, y)])
        b = np.array([_num(v) for v in pcb.at(x, y)])
        if np.max(np.abs(a - b)) > rtol * max(1.0, np.max(np.abs(a))):
            return False
    return True
