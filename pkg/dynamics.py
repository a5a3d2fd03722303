"""
Интегрирование геодезических и фактор-уравнения проективной связности,
контроль первых интегралов, алгебраические траектории сверхинтегрируемого
семейства и проверка функциональной независимости интегралов.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp

from config import DEFAULTS
from errors import (AtVerticalTangent, BadParam, LeftChart, NoRealRoot, ProjConnError, SingularMetric,
                    StepUnderflow, TurningPoint)
from geometry import (Chart, Metric2, ProjConn, QuadraticForm2, SigmaField, christoffel, jet_project,
                      metric_from_sigma, rational_integral)
from jets import Scalar2Jet, absolute, power

logger = logging.getLogger(__name__)

GEODESIC_COLUMNS = ["t", "x", "y", "xd", "yd"]
QUOTIENT_COLUMNS = ["x", "y", "yx"]


@dataclass(frozen=True)
class GeodesicState:
    t: float
    x: float
    y: float
    xd: float
    yd: float


@dataclass(frozen=True)
class QuotientState:
    x: float
    y: float
    yx: float


@dataclass(frozen=True)
class IntegratorOptions:
    method: str = "RK45"
    rtol: float = DEFAULTS["ode_rtol"]
    atol: float = DEFAULTS["ode_atol"]
    npoints: int = DEFAULTS["npoints"]
    margin: float = DEFAULTS["singular_margin"]
    max_slope: float = 1e8


@dataclass
class Trajectory:
    """Выборка решения: строки состояний в порядке GEODESIC_COLUMNS или QUOTIENT_COLUMNS."""

    kind: str
    data: np.ndarray
    columns: List[str]
    extra: Dict[str, np.ndarray] = field(default_factory=dict)

    def states(self) -> List:
        cls = GeodesicState if self.kind == "geodesic" else QuotientState
        return [cls(*row) for row in self.data]

    def to_frame(self) -> pd.DataFrame:
        df = pd.DataFrame(self.data, columns=self.columns)
        for name, values in self.extra.items():
            df[name] = values
        return df

    def __len__(self) -> int:
        return len(self.data)


@dataclass
class IntegralMonitor:
    name: str
    evaluator: Callable
    reference: Optional[float] = None
    bound: float = 1e-7
    max_drift: float = 0.0


@dataclass(frozen=True)
class MonitorResult:
    name: str
    reference: float
    max_drift: float
    bound: float
    flagged: bool


@dataclass(frozen=True)
class TrajectoryConstants:
    c1: float
    c2: float
    k: Optional[float] = None


def _chart_distance(chart: Chart, x: float, y: float) -> float:
    xmin, xmax, ymin, ymax = chart
    return min(x - xmin, xmax - x, y - ymin, ymax - y)


def _check_start(metric_chart: Chart, singular, x: float, y: float, margin: float):
    if _chart_distance(metric_chart, x, y) < 0:
        raise BadParam(f"Начальная точка ({x}, {y}) вне карты")
    if singular is not None and singular(x, y) < margin:
        raise BadParam(f"Начальная точка ({x}, {y}) у особого множества")


def _solve(rhs, span, y0, events, opts: IntegratorOptions, what: str):
    t_eval = np.linspace(span[0], span[1], opts.npoints)
    sol = solve_ivp(rhs, span, y0, method=opts.method, t_eval=t_eval, events=events,
                    rtol=opts.rtol, atol=opts.atol, dense_output=True)
    if sol.status == -1:
        if "step size" in (sol.message or "").lower():
            raise StepUnderflow(f"{what}: {sol.message}")
        raise ProjConnError(f"{what}: {sol.message}")
    return sol


def _geodesic_acceleration(g: Metric2, x: float, y: float, xd: float, yd: float) -> Tuple[float, float]:
    G = christoffel(g, (x, y)).gamma
    v = (xd, yd)
    acc = [-sum(G[k, i, j] * v[i] * v[j] for i in range(2) for j in range(2)) for k in range(2)]
    return float(acc[0]), float(acc[1])


def integrate_geodesic(g: Metric2, s0: GeodesicState, t1: float,
                       opts: IntegratorOptions = IntegratorOptions()) -> Trajectory:
    """ÿ^k + Γ^k_ij ẏ^i ẏ^j = 0 от s0.t до t1; выход из карты — LeftChart с последним состоянием."""
    _check_start(g.chart, g.singular_locus, s0.x, s0.y, opts.margin)

    def rhs(t, s):
        try:
            ax, ay = _geodesic_acceleration(g, s[0], s[1], s[2], s[3])
        except SingularMetric:
            ax, ay = np.nan, np.nan
        return [s[2], s[3], ax, ay]

    def leave(t, s):
        d = _chart_distance(g.chart, s[0], s[1])
        if g.singular_locus is not None:
            d = min(d, g.singular_distance(s[0], s[1]) - opts.margin)
        return d

    leave.terminal = True
    leave.direction = -1

    sol = _solve(rhs, (s0.t, t1), [s0.x, s0.y, s0.xd, s0.yd], [leave], opts, "Геодезическая")
    data = np.column_stack([sol.t, sol.y.T]) if len(sol.t) else np.empty((0, 5))
    traj = Trajectory("geodesic", data, list(GEODESIC_COLUMNS))
    if sol.status == 1:
        te, se = sol.t_events[0][0], sol.y_events[0][0]
        last = GeodesicState(float(te), *map(float, se))
        logger.warning(f"Геодезическая покинула карту при t = {te:.6g}")
        raise LeftChart(f"Геодезическая покинула карту при t = {te:.6g}", last_state=last, samples=traj)
    if not np.all(np.isfinite(data)):
        raise LeftChart("Геодезическая дошла до вырождения метрики", samples=traj)
    logger.debug(f"Геодезическая {g.label}: {len(data)} точек, t ∈ [{s0.t}, {t1}]")
    return traj


def integrate_quotient(pc: ProjConn, q0: QuotientState, x1: float,
                       opts: IntegratorOptions = IntegratorOptions(),
                       chart: Optional[Chart] = None, singular=None) -> Trajectory:
    """y_xx = f0 + f1 y_x + f2 y_x² + f3 y_x³ от q0.x до x1."""
    if chart is not None:
        _check_start(chart, singular, q0.x, q0.y, opts.margin)

    def rhs(x, s):
        return [s[1], float(pc.rhs(x, s[0], s[1]))]

    def leave(x, s):
        d = opts.max_slope - abs(s[1])
        if chart is not None:
            d = min(d, _chart_distance(chart, x, s[0]))
        if singular is not None:
            d = min(d, singular(x, s[0]) - opts.margin)
        return d

    leave.terminal = True
    leave.direction = -1

    sol = _solve(rhs, (q0.x, x1), [q0.y, q0.yx], [leave], opts, "Фактор-уравнение")
    data = np.column_stack([sol.t, sol.y.T]) if len(sol.t) else np.empty((0, 3))
    traj = Trajectory("quotient", data, list(QUOTIENT_COLUMNS))
    if sol.status == 1:
        xe, se = sol.t_events[0][0], sol.y_events[0][0]
        raise LeftChart(f"Решение покинуло карту при x = {xe:.6g}",
                        last_state=QuotientState(float(xe), float(se[0]), float(se[1])), samples=traj)
    return traj


def project_geodesic(g: Metric2, traj: Trajectory) -> Trajectory:
    """Геодезическая → (x, y, y_x, y_xx) через jet_project."""
    rows = []
    for s in traj.states():
        ax, ay = _geodesic_acceleration(g, s.x, s.y, s.xd, s.yd)
        rows.append(jet_project(s.t, s.x, s.y, s.xd, s.yd, ax, ay))
    data = np.array(rows)
    return Trajectory("quotient", data[:, :3], list(QUOTIENT_COLUMNS), extra={"yxx": data[:, 3]})


def monitor(traj: Trajectory, monitors: Sequence[IntegralMonitor], scale_floor: float = 1.0) -> List[MonitorResult]:
    """Максимальный дрейф |F − F_ref| / max(|F_ref|, scale_floor) для каждого монитора."""
    results = []
    states = traj.states()
    for m in monitors:
        values = np.array([m.evaluator(s) for s in states])
        ref = m.reference if m.reference is not None else float(values[0])
        drift = float(np.max(np.abs(values - ref))) / max(abs(ref), scale_floor) if len(values) else 0.0
        m.reference, m.max_drift = ref, drift
        flagged = not drift <= m.bound
        if flagged:
            logger.warning(f"Монитор {m.name}: дрейф {drift:.3e} > {m.bound:.1e}")
        traj.extra[m.name] = values
        results.append(MonitorResult(m.name, ref, drift, m.bound, flagged))
    return results


# --- Мониторы


def hamiltonian_monitor(g: Metric2, bound: float = 1e-8) -> IntegralMonitor:
    """H = ½ g_ij ẋ^i ẋ^j."""
    def H(s: GeodesicState) -> float:
        v = np.array([s.xd, s.yd])
        return float(0.5 * v @ g.matrix(s.x, s.y) @ v)
    return IntegralMonitor("H", H, bound=bound)


def quadratic_monitor(name: str, K: QuadraticForm2, bound: float = 1e-7) -> IntegralMonitor:
    """K_ij ẋ^i ẋ^j."""
    def I(s: GeodesicState) -> float:
        v = np.array([s.xd, s.yd])
        return float(v @ K.matrix(s.x, s.y) @ v)
    return IntegralMonitor(name, I, bound=bound)


def rational_monitor(name: str, h: QuadraticForm2, g: Metric2, bound: float = 1e-7) -> IntegralMonitor:
    return IntegralMonitor(name, lambda q: rational_integral(h, g, (q.x, q.y), q.yx), bound=bound)


def supint_I1(x: float, y: float, yx: float) -> float:
    return (2 * x * yx - (y + x * x)) / yx


def supint_I2(x: float, y: float, yx: float) -> float:
    return (9 * (y + x * x) * yx * yx - 4 * x * (x * x + 9 * y) * yx + 12 * y * (x * x + y)) / yx


def sphere_integral(x: float, y: float, yx: float) -> float:
    """f = (sin³y cos x cos y + sin²y sin x y_x)/(sin²y + y_x²)."""
    s = np.sin(y)
    return (s ** 3 * np.cos(x) * np.cos(y) + s * s * np.sin(x) * yx) / (s * s + yx * yx)


def quotient_integral_monitors(kind: str, bound: float = 1e-7) -> List[IntegralMonitor]:
    """Готовые рациональные интегралы: "supint" → Ĩ1, Ĩ2; "sphere" → f."""
    if kind == "supint":
        return [IntegralMonitor("I1", lambda q: supint_I1(q.x, q.y, q.yx), bound=bound),
                IntegralMonitor("I2", lambda q: supint_I2(q.x, q.y, q.yx), bound=bound)]
    if kind == "sphere":
        return [IntegralMonitor("f", lambda q: sphere_integral(q.x, q.y, q.yx), bound=bound)]
    raise BadParam(f"Неизвестный набор интегралов: {kind}")


# --- Алгебраические траектории сверхинтегрируемого семейства


def measure_constants(q: QuotientState, k: Optional[float] = None) -> TrajectoryConstants:
    """c̃1 = Ĩ1, c̃2 = Ĩ2 в состоянии фактор-системы."""
    if q.yx == 0:
        raise BadParam("y_x = 0: интегралы Ĩ1, Ĩ2 не определены")
    return TrajectoryConstants(supint_I1(q.x, q.y, q.yx), supint_I2(q.x, q.y, q.yx), k)


def trajectory_polynomial(c: TrajectoryConstants, x: float, y: float) -> float:
    c1, c2 = c.c1, c.c2
    return (x ** 4 + 4 * c1 * x ** 3 - 6 * x * x * y - 12 * c1 * x * y + 9 * y * y
            - 2 * c2 * x + 12 * c1 * c1 * y + c1 * c2)


def _discriminant(c: TrajectoryConstants, x: float) -> float:
    """Дискриминант квадратного уравнения по y, делённый на 36: (2x − c̃1)(c̃2 − 4c̃1³)."""
    return (2 * x - c.c1) * (c.c2 - 4 * c.c1 ** 3)


def _roots(c: TrajectoryConstants, x: float, tol: float) -> Tuple[float, float]:
    disc = _discriminant(c, x)
    scale = max(1.0, abs(2 * x - c.c1) * abs(c.c2 - 4 * c.c1 ** 3))
    if disc < -tol * scale:
        raise NoRealRoot(f"Нет вещественных корней при x = {x}: дискриминант {36 * disc:.3e}")
    w = np.sqrt(max(disc, 0.0))
    base = x * x + 2 * c.c1 * x - 2 * c.c1 ** 2
    return (base + w) / 3, (base - w) / 3


def _check_slope(c: TrajectoryConstants, x: float, y: float, tol: float = 1e-6):
    c1, c2 = c.c1, c.c2
    Py = -6 * x * x - 12 * c1 * x + 18 * y + 12 * c1 * c1
    if abs(Py) <= 1e-9 * max(1.0, abs(y), x * x):
        return
    Px = 4 * x ** 3 + 12 * c1 * x * x - 12 * x * y - 12 * c1 * y - 2 * c2
    implicit, ode = -Px / Py, (x * x + y) / (2 * x - c1)
    if abs(implicit - ode) > tol * max(1.0, abs(ode)):
        logger.error(f"Наклон корня {implicit:.6g} не совпадает с ОДУ {ode:.6g} при x = {x}")


def trajectory_solve(c: TrajectoryConstants, x: float, branch: str = "plus", tol: float = 1e-12) -> float:
    """Корень 9y² + (−6x² − 12c̃1x + 12c̃1²)y + (x⁴ + 4c̃1x³ − 2c̃2x + c̃1c̃2) = 0."""
    if abs(2 * x - c.c1) <= tol * max(1.0, abs(x)):
        raise AtVerticalTangent(f"2x − c̃1 ≈ 0 при x = {x}")
    plus, minus = _roots(c, x, tol)
    if branch not in ("plus", "minus"):
        raise BadParam(f"Ветвь {branch}: требуется plus или minus")
    y = plus if branch == "plus" else minus
    _check_slope(c, x, y)
    return y


def trace_curve(c: TrajectoryConstants, xs: Sequence[float], branch: str = "auto",
                y0: Optional[float] = None, tol: float = 1e-12) -> np.ndarray:
    """
    y(x) вдоль xs; в режиме auto берётся корень, ближайший к предыдущему
    (к y0 для первой точки, если он задан).
    """
    if branch != "auto":
        return np.array([trajectory_solve(c, x, branch, tol) for x in xs])
    out = []
    prev = y0
    for x in xs:
        if abs(2 * x - c.c1) <= tol * max(1.0, abs(x)):
            raise AtVerticalTangent(f"2x − c̃1 ≈ 0 при x = {x}")
        plus, minus = _roots(c, x, tol)
        y = plus if prev is None or abs(plus - prev) <= abs(minus - prev) else minus
        out.append(y)
        prev = y
    return np.array(out)


def reparametrize(c: TrajectoryConstants, x0: float, y0: float, t1: float, direction: int = 1,
                  opts: IntegratorOptions = IntegratorOptions(),
                  max_turning_points: int = DEFAULTS["max_turning_points"],
                  tol: float = 1e-8) -> Trajectory:
    """
    Натуральная параметризация траектории метрики (x² + y) dx dy уровня H = k.

    ẋ² = k(2x − c̃1)/(x² + y)². Замена 2x − c̃1 = sgn(k) ξ² даёт гладкое
    ξ̇ = ±√|k|/(x² + y); переход ξ через ноль — точка поворота, при которой
    y переходит на другую ветвь корня.
    """
    k = c.k
    if k is None or k == 0:
        raise BadParam("k = 0: вырожденная изотропная параметризация")
    eps = 1.0 if k > 0 else -1.0
    if eps * (2 * x0 - c.c1) < -tol:
        raise BadParam(f"k(2x0 − c̃1) < 0: ẋ не вещественно")
    if abs(trajectory_polynomial(c, x0, y0)) > 1e-6 * max(1.0, x0 ** 4, y0 * y0):
        raise BadParam(f"({x0}, {y0}) не лежит на траектории c̃ = ({c.c1}, {c.c2})")
    D = eps * (c.c2 - 4 * c.c1 ** 3)
    if D < -tol:
        raise NoRealRoot("sgn(k)(c̃2 − 4c̃1³) < 0: траектория не вещественна")
    rootD = np.sqrt(max(D, 0.0))
    xi_abs = np.sqrt(max(eps * (2 * x0 - c.c1), 0.0))
    if rootD > 0:
        xi0 = (3 * y0 - x0 * x0 - 2 * c.c1 * x0 + 2 * c.c1 ** 2) / rootD
        if abs(abs(xi0) - xi_abs) > 1e-6 * max(1.0, xi_abs):
            raise BadParam(f"({x0}, {y0}) не согласовано с ветвями корня")
    else:
        xi0 = xi_abs

    def position(xi: float) -> Tuple[float, float]:
        x = (c.c1 + eps * xi * xi) / 2
        y = (x * x + 2 * c.c1 * x - 2 * c.c1 ** 2 + xi * rootD) / 3
        return x, y

    x_start, y_start = position(xi0)
    q0 = x_start * x_start + y_start
    if q0 == 0:
        raise BadParam("x² + y = 0 в начальной точке")
    # знак ξ̇ выбирается так, чтобы знак ẋ совпал с direction
    lead = eps * xi0 if xi0 != 0 else 1.0
    sign = direction * np.sign(lead) * np.sign(q0)
    speed = np.sqrt(abs(k))

    def rhs(t, s):
        x, y = position(s[0])
        return [sign * speed / (x * x + y)]

    def turning(t, s):
        return s[0]

    def singular(t, s):
        x, y = position(s[0])
        return abs(x * x + y) - opts.margin

    singular.terminal = True
    singular.direction = -1

    sol = _solve(rhs, (0.0, t1), [xi0], [turning, singular], opts, "Репараметризация")
    flips = len(sol.t_events[0])
    if flips > max_turning_points:
        raise TurningPoint(f"{flips} точек поворота > {max_turning_points}")

    xi = sol.y[0]
    x, y = position(xi)
    xid = sign * speed / (x * x + y)
    xd = eps * xi * xid
    yd = ((2 * x + 2 * c.c1) * eps * xi + rootD) / 3 * xid
    data = np.column_stack([sol.t, x, y, xd, yd])
    traj = Trajectory("geodesic", data, list(GEODESIC_COLUMNS), extra={"xi": xi})
    if sol.status == 1 and len(sol.t_events[1]):
        raise LeftChart("Траектория дошла до x² + y = 0", samples=traj)
    logger.debug(f"Репараметризация: {len(sol.t)} точек, точек поворота {flips}")
    return traj


# --- Независимость интегралов


def _inverse_jets(g: Metric2, x: float, y: float):
    X, Y = Scalar2Jet.variable_x(x), Scalar2Jet.variable_y(y)
    a, b, c = (v if isinstance(v, Scalar2Jet) else Scalar2Jet(v) for v in g.components(X, Y))
    det = a * c - b * b
    if abs(det.v) <= DEFAULTS["det_tol"] * max(abs(a.v), abs(b.v), abs(c.v)) ** 2:
        raise SingularMetric(f"det = {det.v:.3e} в ({x}, {y})")
    return (c / det, -b / det, a / det), det


def integrals_jacobian(metrics: Sequence[Metric2], p, momenta) -> np.ndarray:
    """4×3 матрица производных (H, I, J) по (x, y, p_x, p_y)."""
    x, y = p
    px, py = momenta
    inv_g, det_g = _inverse_jets(metrics[0], x, y)
    cols = []
    for n, g in enumerate(metrics):
        inv, det = (inv_g, det_g) if n == 0 else _inverse_jets(g, x, y)
        w = 0.5 if n == 0 else power(absolute(det_g / det), 2.0 / 3.0)
        A = [w * e for e in inv]
        F = A[0] * px * px + 2 * A[1] * px * py + A[2] * py * py
        a11, a12, a22 = (float(e.v) if isinstance(e, Scalar2Jet) else float(e) for e in A)
        cols.append([float(F.dx), float(F.dy), 2 * (a11 * px + a12 * py), 2 * (a12 * px + a22 * py)])
    return np.array(cols).T


def _unit_columns(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    norms = np.linalg.norm(A, axis=0, keepdims=True)
    return np.divide(A, norms, out=np.zeros_like(A), where=norms > 0)


def independence_rank(sigmas: Sequence[SigmaField], p, momenta,
                      rank_rtol: float = DEFAULTS["rank_rtol"]) -> int:
    """
    Численный ранг якобиана (H, I, J) по SVD с порогом rank_rtol · σ_max.

    Градиенты интегралов различаются по величине на много порядков, поэтому
    каждый столбец якобиана сначала нормируется на единицу (нулевой остаётся нулевым).
    """
    metrics = [metric_from_sigma(s) for s in sigmas]
    A = _unit_columns(integrals_jacobian(metrics, p, momenta))
    sv = np.linalg.svd(A, compute_uv=False)
    if sv[0] == 0:
        return 0
    return int(np.sum(sv > rank_rtol * sv[0]))
