"""
Действие ℒ_X на пространстве метризаций: нормальные формы I/II/III, потоки,
выделенные координаты (s, u), эквивалентность орбит и восстановление
проективного поля для семейства степени подвижности 3.

Коэффициенты u — столбцы в базисе σ: если σ = Σ u_i σ_i, то ℒ_X σ = Σ (M u)_i σ_i.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from config import DEFAULTS
from errors import BadParam, ExceptionalPoint, NoSolution, OnEigenspace, ZeroAction
from geometry import (Chart, SigmaField, VectorField2, combine_sigmas, lie_sigma_from_jets)
from jets import Scalar2Jet

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

# Собственные значения ℒ_X на (σ1, σ2, σ3) для X = 2x∂x + y∂y
DOM3_EIGENVALUES = (-5.0 / 3.0, -2.0 / 3.0, 4.0 / 3.0)

NORMAL_FORMS = {
    "I": lambda lam: np.array([[lam, 0.0], [0.0, 1.0]]),
    "II": lambda lam: np.array([[1.0, 0.0], [1.0, 1.0]]),
    "III": lambda lam: np.array([[lam, -1.0], [1.0, lam]]),
}


@dataclass(frozen=True)
class LieAction:
    """
    M = scale · P N P⁻¹, где N — нормальная форма случая.

    Коэффициенты в нормальном базисе: v = P⁻¹ u; замена X → X/scale приводит действие к N.
    """

    M: np.ndarray
    case: str
    lam: float
    scale: float = 1.0
    P: Optional[np.ndarray] = None

    @property
    def N(self) -> np.ndarray:
        return NORMAL_FORMS[self.case](self.lam)

    @property
    def subcase(self) -> str:
        if self.case == "III":
            return "III0" if self.lam == 0 else "IIIλ"
        return self.case

    def to_normal(self, u: Sequence[float]) -> np.ndarray:
        P = np.eye(2) if self.P is None else self.P
        return np.linalg.solve(P, np.asarray(u, dtype=float))

    def from_normal(self, v: Sequence[float]) -> np.ndarray:
        P = np.eye(2) if self.P is None else self.P
        return P @ np.asarray(v, dtype=float)


@dataclass(frozen=True)
class OrbitCoords:
    s: float
    u: float
    case: str
    component: int


def normal_action(case: str, lam: float = 1.0) -> LieAction:
    """Действие, уже записанное в нормальной форме."""
    if case not in NORMAL_FORMS:
        raise BadParam(f"Неизвестный случай {case}")
    if case == "III" and lam < 0:
        raise BadParam(f"Случай III: λ = {lam} < 0")
    if case == "II":
        lam = 1.0
    return LieAction(NORMAL_FORMS[case](lam), case, float(lam), 1.0, np.eye(2))


def classify(M, tol: float = 1e-10) -> LieAction:
    """Нормальная форма 2×2 матрицы ℒ_X по собственным значениям."""
    M = np.asarray(M, dtype=float)
    norm = np.linalg.norm(M)
    if norm < tol:
        raise ZeroAction(f"‖M‖ = {norm:.3e}: X действует нулём")
    tr, det = np.trace(M), np.linalg.det(M)
    disc = tr * tr - 4 * det

    if abs(disc) <= tol * norm * norm:
        mu = tr / 2
        A = M - mu * np.eye(2)
        if np.linalg.norm(A) <= 1e-9 * norm:
            return LieAction(M, "I", 1.0, float(mu), np.eye(2))
        if abs(mu) <= tol * norm:
            raise BadParam("Нильпотентное действие не приводится к нормальным формам I–III")
        A = A / mu
        w = max((np.array([1.0, 0.0]), np.array([0.0, 1.0])), key=lambda e: np.linalg.norm(A @ e))
        P = np.column_stack([w, A @ w])
        return LieAction(M, "II", 1.0, float(mu), P)

    if disc > 0:
        vals, vecs = np.linalg.eig(M)
        vals, vecs = np.real(vals), np.real(vecs)
        order = np.argsort(-np.abs(vals))
        a, b = vals[order]
        P = vecs[:, order]
        if abs(b) <= tol * norm:
            logger.warning("Нулевое собственное значение: нормировка |λ| ≥ 1 невозможна, λ = 0")
            return LieAction(M, "I", 0.0, float(a), P[:, ::-1])
        return LieAction(M, "I", float(a / b), float(b), P)

    alpha, beta = tr / 2, np.sqrt(-disc) / 2
    scale = beta * np.sign(alpha) if alpha != 0 else beta
    lam = abs(alpha) / beta
    B = M / scale
    vals, vecs = np.linalg.eig(B)
    k = int(np.argmax(np.imag(vals)))
    v = vecs[:, k]
    P = np.column_stack([np.imag(v), np.real(v)])
    return LieAction(M, "III", float(lam), float(scale), P)


def pullback_flow(action: LieAction, u: Sequence[float], t: float) -> np.ndarray:
    """u ↦ exp(t N) u в нормальных координатах."""
    return expm(t * action.N) @ np.asarray(u, dtype=float)


def component_count(action: LieAction) -> int:
    return {"I": 4, "II": 2, "III": 1}[action.case]


def distinguished_coords(u1: float, u2: float, action: LieAction, tol: float = 1e-14) -> OrbitCoords:
    """Выделенные координаты (s, u) точки (u1, u2) в нормальном базисе."""
    case, lam = action.case, action.lam
    if case == "I":
        if abs(u1) <= tol or abs(u2) <= tol:
            raise OnEigenspace(f"({u1}, {u2}) лежит на собственной прямой ℒ_X")
        return OrbitCoords(float(np.log(abs(u2))), float(abs(u1) / abs(u2) ** lam), "I",
                           2 * int(u1 < 0) + int(u2 < 0))
    if case == "II":
        if abs(u1) <= tol:
            raise OnEigenspace(f"u1 = {u1}: точка на собственной прямой ℒ_X")
        return OrbitCoords(float(np.log(abs(u1))), float(np.exp(u2 / u1) / abs(u1)), "II", int(u1 < 0))
    if abs(u1) <= tol and abs(u2) <= tol:
        raise OnEigenspace("(u1, u2) = 0")
    s = float(np.arctan2(u2, u1) % TWO_PI)
    r2 = u1 * u1 + u2 * u2
    if lam == 0:
        return OrbitCoords(s, float(r2), "III0", 0)
    # на спирали s ∈ ℝ: s ≡ угол (mod 2π), u ∈ [0, 2π)
    w = np.log(r2) / (2 * lam)
    u = float((w - s) % TWO_PI)
    return OrbitCoords(float(w - u), u, "IIIλ", 0)


def coefficients_from_distinguished(s: float, u: float, action: LieAction, component: int = 0) -> np.ndarray:
    """Обратное к distinguished_coords: (u1, u2) в нормальном базисе."""
    case, lam = action.case, action.lam
    if case == "I":
        if u <= 0:
            raise BadParam(f"Случай I: u = {u} ≤ 0")
        s1 = -1.0 if component & 2 else 1.0
        s2 = -1.0 if component & 1 else 1.0
        return np.array([s1 * u * np.exp(lam * s), s2 * np.exp(s)])
    if case == "II":
        if u <= 0:
            raise BadParam(f"Случай II: u = {u} ≤ 0")
        sign = -1.0 if component else 1.0
        return sign * np.exp(s) * np.array([1.0, s + np.log(u)])
    if lam == 0:
        if u <= 0:
            raise BadParam(f"Случай III: u = {u} ≤ 0")
        r = np.sqrt(u)
    else:
        r = np.exp(lam * (u + s))
    return r * np.array([np.cos(s), np.sin(s)])


def sigma_from_distinguished(s: float, u: float, action: LieAction,
                             basis: Tuple[SigmaField, SigmaField], component: int = 0) -> SigmaField:
    """σ = u1 σ1 + u2 σ2 для точки орбиты (s, u); базис уже в нормальной форме."""
    return combine_sigmas(coefficients_from_distinguished(s, u, action, component), basis)


def _close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def _eigenray(u: np.ndarray, action: LieAction, tol: float) -> Optional[Tuple]:
    """Для точек на собственных прямых: метка луча, иначе None."""
    u1, u2 = u
    z1, z2 = abs(u1) <= tol, abs(u2) <= tol
    if z1 and z2:
        return ("0",)
    if action.case == "I" and (z1 or z2):
        return ("u2", np.sign(u2)) if z1 else ("u1", np.sign(u1))
    if action.case == "II" and z1:
        return ("u2", np.sign(u2))
    return None


def orbit_equivalent(p: Sequence[float], q: Sequence[float], action: LieAction,
                     rtol: float = 1e-9, tol: float = 1e-14) -> bool:
    """Лежат ли p и q на одной орбите потока (нормальные координаты)."""
    p, q = np.asarray(p, dtype=float), np.asarray(q, dtype=float)
    rp, rq = _eigenray(p, action, tol), _eigenray(q, action, tol)
    if rp is not None or rq is not None:
        return rp == rq
    a, b = distinguished_coords(*p, action), distinguished_coords(*q, action)
    if a.component != b.component:
        return False
    if a.case == "IIIλ":
        d = abs(a.u - b.u) % TWO_PI
        return min(d, TWO_PI - d) <= rtol * TWO_PI
    return _close(a.u, b.u, rtol)


# --- Степень подвижности 3


def dom3_flow(u: Sequence[float], t: float, eigs: Sequence[float] = DOM3_EIGENVALUES) -> np.ndarray:
    return np.exp(np.asarray(eigs) * t) * np.asarray(u, dtype=float)


def spherical_coefficients(theta: float, phi: float) -> np.ndarray:
    """Строки коэффициентов σ, σ̄, σ̂ в базисе (σ1, σ2, σ3)."""
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    return np.array([
        [st * cp, st * sp, ct],
        [ct * cp, ct * sp, -st],
        [-sp, cp, 0.0],
    ])


# Таблица исключительных точек: σ, σ̄, σ̂ в базисе (σ1, σ2, σ3)
EXCEPTIONAL_ROWS: Dict[str, np.ndarray] = {
    "θ=π/2, φ=0": np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]], dtype=float),
    "θ=π/2, φ=π/2": np.array([[0, 1, 0], [0, 0, -1], [-1, 0, 0]], dtype=float),
    "θ=π/2, φ=π": spherical_coefficients(np.pi / 2, np.pi).round(15),
    "θ=π/2, φ=3π/2": spherical_coefficients(np.pi / 2, 1.5 * np.pi).round(15),
    "θ=0": spherical_coefficients(0.0, 0.0).round(15),
    "θ=π": spherical_coefficients(np.pi, 0.0).round(15),
}


def exceptional_row(theta: float, phi: float, tol: float = 1e-12) -> Optional[str]:
    """Метка строки таблицы исключительных точек или None."""
    if abs(theta) <= tol:
        return "θ=0"
    if abs(theta - np.pi) <= tol:
        return "θ=π"
    if abs(theta - np.pi / 2) <= tol:
        phi = phi % TWO_PI
        for k, name in enumerate(("0", "π/2", "π", "3π/2")):
            d = abs(phi - k * np.pi / 2)
            if min(d, TWO_PI - d) <= tol:
                return f"θ=π/2, φ={name}"
    return None


def dom3_parametrize(r: float, theta: float, phi: float) -> np.ndarray:
    """(u1, u2, u3) = (e^{−5r/3} sinθ cosφ, e^{−2r/3} sinθ sinφ, e^{4r/3} cosθ)."""
    if not 0 <= theta <= np.pi:
        raise BadParam(f"θ = {theta}: требуется θ ∈ (0, π)")
    row = exceptional_row(theta, phi)
    if row is not None:
        raise ExceptionalPoint(f"({theta}, {phi}) — исключительная точка, X гомотетично", row=row)
    direction = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    return dom3_flow(direction, r)


def flow_invariants(u: Sequence[float], eigs: Sequence[float]) -> Dict[Tuple[int, int], float]:
    """F_ij = |u_i|^{λ_j} / |u_j|^{λ_i}, i < j (индексы с единицы)."""
    u = np.abs(np.asarray(u, dtype=float))
    out = {}
    for i in range(len(u)):
        for j in range(i + 1, len(u)):
            out[(i + 1, j + 1)] = float(u[i] ** eigs[j] / u[j] ** eigs[i])
    return out


def collocation_grid(chart: Chart, n: int = 7, singular_locus=None,
                     margin: float = DEFAULTS["singular_margin"]) -> np.ndarray:
    xmin, xmax, ymin, ymax = chart
    points = [(x, y) for x in np.linspace(xmin, xmax, n) for y in np.linspace(ymin, ymax, n)]
    if singular_locus is not None:
        points = [p for p in points if singular_locus(*p) >= margin]
    return np.array(points)


def _sigma_jets(basis: Sequence[SigmaField], points: np.ndarray) -> List[List]:
    out = []
    for s in basis:
        row = []
        for x, y in points:
            comps = s.components(Scalar2Jet.variable_x(x), Scalar2Jet.variable_y(y))
            row.append([c if isinstance(c, Scalar2Jet) else Scalar2Jet(c) for c in comps])
        out.append(row)
    return out


def lie_action_matrix(basis: Sequence[SigmaField], X: VectorField2, points: np.ndarray) -> np.ndarray:
    """Матрица ℒ_X на базисе σ методом наименьших квадратов по точкам."""
    jets = _sigma_jets(basis, points)
    B = np.array([[float(c.v) for pt in row for c in pt] for row in jets]).T
    M = np.zeros((len(basis), len(basis)))
    for k, row in enumerate(jets):
        rhs = []
        for (x, y), sj in zip(points, row):
            Xj = [c if isinstance(c, Scalar2Jet) else Scalar2Jet(c)
                  for c in X.components(Scalar2Jet.variable_x(x), Scalar2Jet.variable_y(y))]
            rhs.extend(float(v) for v in lie_sigma_from_jets(sj, Xj))
        M[:, k] = np.linalg.lstsq(B, np.array(rhs), rcond=None)[0]
    return M


class RecoveredField(NamedTuple):
    field: VectorField2
    residual: float
    coefficients: np.ndarray
    monomials: List[Tuple[int, int]]


def _monomials(degree: int) -> List[Tuple[int, int]]:
    return [(a, d - a) for d in range(degree + 1) for a in range(d, -1, -1)]


def _polynomial_field(coefficients: np.ndarray, monomials: List[Tuple[int, int]]) -> VectorField2:
    n = len(monomials)

    def component(c):
        terms = [(ck, a, b) for ck, (a, b) in zip(c, monomials) if ck != 0]

        def f(x, y):
            total = 0.0
            for ck, a, b in terms:
                total = total + ck * x ** a * y ** b
            return total
        return f

    return VectorField2(component(coefficients[:n]), component(coefficients[n:]))


def recover_projective_field(basis: Sequence[SigmaField], eigs: Sequence[float], degree: int = 3,
                             chart: Chart = (0.5, 1.5, 0.5, 1.0), singular_locus=None,
                             tol: float = 1e-6, grid: int = 7) -> RecoveredField:
    """
    Полиномиальное X степени ≤ degree из ℒ_X σ_k = λ_k σ_k на сетке grid × grid.

    Система решается наименьшими квадратами с нормировкой столбцов.
    """
    points = collocation_grid(chart, grid, singular_locus)
    monomials = _monomials(degree)
    n_unknowns = 2 * len(monomials)
    if 3 * len(basis) * len(points) < 3 * n_unknowns:
        raise BadParam(f"Мало точек коллокации: {len(points)} для {n_unknowns} неизвестных")

    jets = _sigma_jets(basis, points)
    rhs = np.array([lam * float(c.v) for lam, row in zip(eigs, jets) for pt in row for c in pt])

    columns = []
    for comp in range(2):
        for a, b in monomials:
            col = []
            for row in jets:
                for (x, y), sj in zip(points, row):
                    m = Scalar2Jet.variable_x(x) ** a * Scalar2Jet.variable_y(y) ** b
                    Xj = [m, Scalar2Jet(0.0)] if comp == 0 else [Scalar2Jet(0.0), m]
                    col.extend(float(v) for v in lie_sigma_from_jets(sj, Xj))
            columns.append(col)
    A = np.array(columns).T
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    sol = np.linalg.lstsq(A / scale, rhs, rcond=None)[0]
    coefficients = sol / scale
    residual = float(np.linalg.norm(A @ coefficients - rhs) / max(np.linalg.norm(rhs), 1e-300))
    logger.info(f"Восстановление X степени {degree}: относительная невязка {residual:.3e}")
    if residual > tol:
        raise NoSolution(f"Невязка {residual:.3e} > {tol:.1e} для степени {degree}", residual=residual)
    return RecoveredField(_polynomial_field(coefficients, monomials), residual, coefficients, monomials)
