"""
Командная строка: каталог метрик, проверки, интегрирование геодезических и
фактор-уравнения, траектории сверхинтегрируемых систем, классификация ℒ_X.

Коды выхода: 0 — все проверки пройдены, 1 — численный порог нарушен,
2 — ошибка параметров или конфигурации.
"""

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from catalog import CatalogEntry, dom3_basis, make, schema, spherical_sigma
from config import load_config
from dynamics import (GEODESIC_COLUMNS, QUOTIENT_COLUMNS, GeodesicState, IntegratorOptions, QuotientState,
                      TrajectoryConstants, hamiltonian_monitor, independence_rank, integrate_geodesic,
                      integrate_quotient, monitor, quadratic_monitor, quotient_integral_monitors,
                      rational_monitor, reparametrize, trajectory_polynomial, trajectory_solve)
from errors import (AtVerticalTangent, BadParam, ExceptionalPoint, LeftChart, NoRealRoot, OnEigenspace,
                    ProjConnError, ZeroAction)
from geometry import (killing_from_projective_field, killing_residual, metrizability_residual,
                      proj_conn_from_metric, projective_field_residual, sigma_from_metric)
from metrization import (DOM3_EIGENVALUES, classify, collocation_grid, component_count, dom3_parametrize,
                         lie_action_matrix, recover_projective_field)
from reports import SCHEMA_VERSION, TOOL, Report, __version__, write_csv, write_plot_script
from special_functions import upsilon_xi_gap, xi_ode_residual, y1_ode_residual, y_lambda_ode_residual

logger = logging.getLogger(__name__)

USAGE_ERRORS = (BadParam, ExceptionalPoint, ZeroAction, OnEigenspace)

# Формулы выделенных координат (s, u) по случаям нормальной формы
DISTINGUISHED_FORMULAS = {
    "I": "s = ln|u2|, u = |u1|/|u2|^λ; компонента по знакам (u1, u2)",
    "II": "s = ln|u1|, u = e^{u2/u1}/|u1|; компонента по знаку u1",
    "III0": "s = atan2(u2, u1) ∈ [0, 2π), u = u1² + u2²; орбиты — окружности, пространство 𝕊¹ × ℝ",
    "IIIλ": "u = (ln r/λ − atan2(u2, u1)) mod 2π, s = ln r/λ − u; орбиты — логарифмические спирали",
}


@dataclass
class RunConfig:
    """Всё, что нужно для повторения запуска."""

    subcommand: str
    label: Optional[str] = None
    params: Dict[str, Any] = field(default_factory=dict)
    options: Dict[str, Any] = field(default_factory=dict)
    seed: int = 42
    settings: Dict[str, Any] = field(default_factory=dict)


def _parse_value(raw: str):
    try:
        return float(raw)
    except ValueError:
        try:
            return complex(raw.replace("i", "j"))
        except ValueError:
            raise BadParam(f"Значение параметра {raw!r} не число")


def _collect_params(pairs: List[str], extra: List[str]) -> Dict[str, Any]:
    """--param k=v и свободные пары --k v (--k=v)."""
    params: Dict[str, Any] = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise BadParam(f"--param {pair}: ожидается имя=значение")
        k, v = pair.split("=", 1)
        params[k.strip()] = _parse_value(v)
    i = 0
    while i < len(extra):
        token = extra[i]
        if not token.startswith("--"):
            raise BadParam(f"Лишний аргумент: {token}")
        name = token[2:]
        if "=" in name:
            name, v = name.split("=", 1)
            i += 1
        elif i + 1 < len(extra):
            v = extra[i + 1]
            i += 2
        else:
            raise BadParam(f"Нет значения у {token}")
        params[name] = _parse_value(v)
    return params


def _normalize_params(label: str, params: Dict[str, Any]) -> Dict[str, Any]:
    """
    --C для строк B: C = e^{iφ} с |C| = 1 переводится в φ = arg C ∈ [0, 2π).

    Остальные параметры вещественные.
    """
    params = dict(params)
    if "C" in params:
        C = complex(params.pop("C"))
        if abs(abs(C) - 1) > 1e-12:
            raise BadParam(f"{label}: |C| = {abs(C):.6g}, а --C задаёт C = e^{{iφ}} и требует |C| = 1; "
                           "можно передать --phi")
        params["phi"] = float(np.angle(C) % (2 * np.pi))
    for k, v in params.items():
        if isinstance(v, complex):
            if v.imag != 0:
                raise BadParam(f"{label}: параметр {k} = {v} не вещественный")
            params[k] = v.real
    return params


def _entry(args, extra: List[str]) -> CatalogEntry:
    params = _normalize_params(args.label, _collect_params(args.param, extra))
    return make(args.label, params)


def _run_config(args, config: Dict, entry: Optional[CatalogEntry] = None) -> Dict:
    options = {k: v for k, v in vars(args).items() if k not in ("handler", "param", "label", "seed", "config")}
    rc = RunConfig(args.command, getattr(args, "label", None),
                   entry.params if entry is not None else {}, options, config["seed"], config)
    return asdict(rc)


def _options(args, config: Dict) -> IntegratorOptions:
    return IntegratorOptions(method=args.method, rtol=config["ode_rtol"], atol=config["ode_atol"],
                             npoints=args.npoints, margin=config["singular_margin"])


def _emit(report: Report, args) -> int:
    if getattr(args, "xlsx", None):
        report.write_xlsx(args.xlsx)
    if getattr(args, "report", None):
        report.write_json(args.report)
    else:
        print(report.to_json())
    logger.info(f"{report.command}: {'пройдено' if report.passed else 'не пройдено'}")
    return 0 if report.passed else 1


def _write_table(df: pd.DataFrame, path: Optional[str], args, x: str, ys: List[str], title: str):
    if not path:
        return
    write_csv(df, path)
    if args.emit_plot_script:
        write_plot_script(path, x, ys, list(df.columns), title)


# --- catalog


def cmd_catalog(args, extra: List[str], config: Dict) -> int:
    if extra:
        raise BadParam(f"Лишние аргументы: {extra}")
    entries = schema()
    if args.label:
        if args.label not in entries:
            raise BadParam(f"Неизвестная метка каталога: {args.label}")
        entries = {args.label: entries[args.label]}
    if args.filter:
        f = args.filter
        entries = {k: v for k, v in entries.items() if f in k or v["dini_type"] == f.upper()}
        if not entries:
            raise BadParam(f"Фильтр {f!r} не выбрал ни одной метки")
    doc = {"schema": SCHEMA_VERSION, "tool": TOOL, "version": __version__, "count": len(entries),
           "entries": entries}
    text = json.dumps(doc, ensure_ascii=False, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)
    return 0


# --- check


def _max_over(points, fn) -> float:
    return max((float(fn(x, y)) for x, y in points), default=0.0)


def _proj_conn_gap(g, h, points) -> float:
    pc, ph = proj_conn_from_metric(g), proj_conn_from_metric(h)

    def gap(x, y):
        a = np.real(np.array([complex(v) for v in pc.at(x, y)]))
        b = np.real(np.array([complex(v) for v in ph.at(x, y)]))
        return np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)))

    return _max_over(points, gap)


def cmd_check(args, extra: List[str], config: Dict) -> int:
    entry = _entry(args, extra)
    g = entry.metric
    report = Report("check", _run_config(args, config, entry))
    rng = np.random.default_rng(config["seed"])
    points = g.sample_points(args.npoints, rng, margin=config["singular_margin"])
    report.add_points(points)
    logger.info(f"Проверка {entry.label} на {len(points)} точках")

    pc, sigma = proj_conn_from_metric(g), sigma_from_metric(g)
    report.add_check("metrizability", _max_over(
        points, lambda x, y: np.max(np.abs(metrizability_residual(pc, sigma, (x, y), relative=True)))),
        config["residual_rtol"])

    X = entry.projective_field
    if X is not None:
        K = killing_from_projective_field(g, X)
        report.add_check("killing", _max_over(
            points, lambda x, y: np.max(np.abs(killing_residual(g, K, (x, y), relative=True)))), 1e-6)
        report.add_check("projective_field", _max_over(
            points, lambda x, y: projective_field_residual(g, X, (x, y)).residual), 1e-6)

    if g.complex_components is not None:
        def imaginary(x, y):
            comps = np.array([complex(np.asarray(c)) for c in g.complex_components(x, y)])
            return np.max(np.abs(comps.imag)) / max(np.max(np.abs(comps)), 1e-300)
        report.add_check("imaginary_part", _max_over(points, imaginary), 1e-9)

    if entry.dini_partner is not None:
        partner = make(entry.dini_partner, entry.params)
        report.add_check("dini_partner", _proj_conn_gap(g, partner.metric, points), 1e-9,
                         partner=entry.dini_partner)

    if entry.label in ("C.8", "C.8.erf"):
        report.add_check("y1_ode", _max_over(points, lambda x, y: abs(y1_ode_residual(y))), 1e-7)
        other = "C.8.erf" if entry.label == "C.8" else "C.8"
        report.add_check("c8_representations", _proj_conn_gap(g, make(other, entry.params).metric, points),
                         1e-7, other=other)
    if entry.label in ("C.9a", "C.9b"):
        lam, constant = entry.params.get("lam", 0.0), entry.params["constant"]
        report.add_check("y_lambda_ode", _max_over(
            points, lambda x, y: abs(y_lambda_ode_residual(y, lam, constant))), 1e-7)
    if entry.label == "C.9.upsilon":
        lam = entry.params["lam"]
        report.add_check("xi_ode", _max_over(points, lambda x, y: abs(xi_ode_residual(y, lam))), 1e-7)
        report.add_check("upsilon_is_xi_prime", _max_over(points, lambda x, y: upsilon_xi_gap(y, lam)), 1e-7)

    if entry.label.startswith("dom3."):
        basis = dom3_basis()
        recovered = recover_projective_field(basis, DOM3_EIGENVALUES)
        report.add_check("recovered_field", recovered.residual, 1e-6)
        grid = collocation_grid(g.chart, 5)
        M = lie_action_matrix(basis, recovered.field, grid)
        eigs = np.sort(np.real(np.linalg.eigvals(M)))
        report.add_check("recovered_eigenvalues", float(np.max(np.abs(eigs - np.sort(DOM3_EIGENVALUES)))), 1e-6,
                         eigenvalues=eigs)
    return _emit(report, args)


# --- geodesic / quotient


def cmd_geodesic(args, extra: List[str], config: Dict) -> int:
    entry = _entry(args, extra)
    g = entry.metric
    report = Report("geodesic", _run_config(args, config, entry))
    s0 = GeodesicState(0.0, args.x, args.y, args.xd, args.yd)
    monitors = [hamiltonian_monitor(g)]
    if entry.projective_field is not None:
        monitors.append(quadratic_monitor("K", killing_from_projective_field(g, entry.projective_field)))

    try:
        traj = integrate_geodesic(g, s0, args.t1, _options(args, config))
    except LeftChart as e:
        if e.last_state is None or e.samples is None or len(e.samples) == 0:
            raise
        traj = e.samples
        report.extra["truncated_at"] = asdict(e.last_state)
        report.add_check("left_chart", 1.0, 0.0, passed=False, message=str(e))

    for r in monitor(traj, monitors):
        report.add_check(f"drift_{r.name}", r.max_drift, r.bound, reference=r.reference)
    df = traj.to_frame()
    report.add_table("Траектория", df)
    _write_table(df, args.out, args, "t", GEODESIC_COLUMNS[1:3], f"Геодезическая {entry.label}")
    return _emit(report, args)


def _quotient_monitors(entry: CatalogEntry):
    if entry.label == "sphere":
        return quotient_integral_monitors("sphere")
    if entry.label == "supint.quotient":
        return quotient_integral_monitors("supint")
    if entry.projective_field is not None:
        return [rational_monitor("K", killing_from_projective_field(entry.metric, entry.projective_field),
                                 entry.metric)]
    return []


def cmd_quotient(args, extra: List[str], config: Dict) -> int:
    entry = _entry(args, extra)
    g = entry.metric
    report = Report("quotient", _run_config(args, config, entry))
    pc = proj_conn_from_metric(g)
    q0 = QuotientState(args.x, args.y, args.yx)
    try:
        traj = integrate_quotient(pc, q0, args.x1, _options(args, config), chart=g.chart, singular=g.singular_locus)
    except LeftChart as e:
        if e.last_state is None or e.samples is None or len(e.samples) == 0:
            raise
        traj = e.samples
        report.extra["truncated_at"] = asdict(e.last_state)
        report.add_check("left_chart", 1.0, 0.0, passed=False, message=str(e))

    for r in monitor(traj, _quotient_monitors(entry)):
        report.add_check(f"drift_{r.name}", r.max_drift, r.bound, reference=r.reference)
    df = traj.to_frame()
    report.add_table("Фактор", df)
    _write_table(df, args.out, args, "x", [QUOTIENT_COLUMNS[1]], f"Фактор-уравнение {entry.label}")
    return _emit(report, args)


# --- superintegrable


def _curve_frame(c: TrajectoryConstants, xs: np.ndarray):
    rows, empty = [], []
    for x in xs:
        row = {"x": float(x)}
        for branch in ("plus", "minus"):
            try:
                row[f"y_{branch}"] = trajectory_solve(c, x, branch)
            except (NoRealRoot, AtVerticalTangent):
                row[f"y_{branch}"] = float("nan")
        if np.isnan(row["y_plus"]):
            empty.append(float(x))
        rows.append(row)
    return pd.DataFrame(rows, columns=["x", "y_plus", "y_minus"]), empty


def cmd_superintegrable(args, extra: List[str], config: Dict) -> int:
    if extra:
        raise BadParam(f"Лишние аргументы: {extra}")
    report = Report("superintegrable", _run_config(args, config))
    try:
        dom3_parametrize(0.0, args.theta, args.phi)
    except ExceptionalPoint as e:
        raise ExceptionalPoint(f"{e}: гомотетичное вырождение, строка таблицы {e.row}", row=e.row)

    c = TrajectoryConstants(args.c1, args.c2, args.k)
    curve, empty = _curve_frame(c, np.linspace(args.xmin, args.xmax, args.npoints))
    report.add_table("Кривая", curve)
    if empty:
        report.extra["no_real_root_x"] = empty
        logger.warning(f"Нет вещественных корней в {len(empty)} точках окна")
    if args.c1 == 0 and args.c2 == 0:
        gap = float(np.nanmax(np.abs(curve["y_plus"] - curve["x"] ** 2 / 3)))
        report.add_check("curve_x2_over_3", gap, 1e-10)

    y0 = trajectory_solve(c, args.x0, args.branch)
    traj = reparametrize(c, args.x0, y0, args.t1, args.direction, _options(args, config),
                         max_turning_points=config["max_turning_points"])
    df = traj.to_frame()
    x, y, xd, yd = df["x"].values, df["y"].values, df["xd"].values, df["yd"].values
    scale = abs(args.k)
    report.add_check("hamiltonian", float(np.max(np.abs((x * x + y) * xd * yd - args.k))) / scale, 1e-6)
    report.add_check("ydot", float(np.max(np.abs(yd * yd * (2 * x - args.c1) - args.k))) / scale, 1e-6)
    on_curve = [abs(trajectory_polynomial(c, xi, yi)) / max(1.0, xi ** 4, yi * yi) for xi, yi in zip(x, y)]
    report.add_check("on_curve", float(max(on_curve)), 1e-8)
    report.add_table("Траектория", df)

    sigmas = spherical_sigma(args.theta, args.phi)
    rng = np.random.default_rng(config["seed"])
    host = make("dom3.spherical", {"theta": args.theta, "phi": args.phi % (2 * np.pi)}).metric
    candidates = host.sample_points(4 * args.rank_points, rng, margin=config["singular_margin"])
    rank_rows = []
    for px, py in candidates:
        if len(rank_rows) == args.rank_points:
            break
        momenta = rng.normal(size=2)
        try:
            rank = independence_rank(sigmas, (px, py), momenta, config["rank_rtol"])
        except ProjConnError as e:
            logger.warning(f"Точка ({px:.4g}, {py:.4g}) пропущена: {e}")
            continue
        rank_rows.append({"x": px, "y": py, "p_x": momenta[0], "p_y": momenta[1], "rank": rank})
    report.add_points([(r["x"], r["y"]) for r in rank_rows])
    ranks = pd.DataFrame(rank_rows, columns=["x", "y", "p_x", "p_y", "rank"])
    report.add_table("Ранг", ranks)
    report.add_check("independence_rank", float(np.sum(ranks["rank"] < 3)), 0.0)
    report.add_check("rank_points_missing", float(args.rank_points - len(ranks)), 0.0)

    if args.out:
        _write_table(df, f"{args.out}_trajectory.csv", args, "x", ["y"], "Траектория (x(t), y(t))")
        _write_table(curve, f"{args.out}_curve.csv", args, "x", ["y_plus", "y_minus"], "Алгебраическая кривая")
        write_csv(ranks, f"{args.out}_rank.csv")
    return _emit(report, args)


# --- classify


def _matrix(text: str) -> np.ndarray:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise BadParam(f"--m {text}: ожидаются четыре числа через запятую")
    if len(values) != 4:
        raise BadParam(f"--m {text}: ожидаются четыре числа, получено {len(values)}")
    return np.array(values).reshape(2, 2)


def cmd_classify(args, extra: List[str], config: Dict) -> int:
    if extra:
        raise BadParam(f"Лишние аргументы: {extra}")
    report = Report("classify", _run_config(args, config))
    if args.m is not None:
        M = _matrix(args.m)
    elif args.labels and len(args.labels) == 2:
        entries = [make(label) for label in args.labels]
        X = entries[0].projective_field
        if X is None:
            raise BadParam(f"{args.labels[0]}: проективное поле не задано")
        basis = [sigma_from_metric(e.metric) for e in entries]
        M = lie_action_matrix(basis, X, collocation_grid(entries[0].metric.chart, 5,
                                                         entries[0].metric.singular_locus))
    else:
        raise BadParam("Нужна матрица --m или две метки --label")
    action = classify(M)
    report.extra.update({
        "matrix": M,
        "case": action.case,
        "subcase": action.subcase,
        "lambda": action.lam,
        "scale": action.scale,
        "components": component_count(action),
        "formulas": DISTINGUISHED_FORMULAS[action.subcase],
    })
    logger.info(f"Случай {action.subcase}, λ = {action.lam:.6g}, компонент {component_count(action)}")
    return _emit(report, args)


# --- разбор аргументов


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("--seed", type=int, default=None, help="зерно выборки точек (PROJCONN_SEED)")
    common.add_argument("--config", default=None, help="путь к config.json")

    outputs = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    outputs.add_argument("--report", default=None, help="JSON-отчёт (по умолчанию stdout)")
    outputs.add_argument("--xlsx", default=None, help="копия таблиц отчёта в Excel")

    run = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    run.add_argument("--out", default=None, help="CSV с выборкой решения")
    run.add_argument("--emit-plot-script", action="store_true", help="скрипт gnuplot рядом с CSV")
    run.add_argument("--npoints", type=int, default=100)
    run.add_argument("--method", default="RK45", choices=["RK45", "DOP853"])

    labelled = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    labelled.add_argument("--label", required=True)
    labelled.add_argument("--param", action="append", default=[], help="параметр имя=значение")

    parser = argparse.ArgumentParser(prog=TOOL, description=__doc__, allow_abbrev=False,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", parents=[common], allow_abbrev=False, help="схема каталога")
    p.add_argument("--label", default=None)
    p.add_argument("--filter", default=None, help="подстрока метки или тип Дини A/B/C")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_catalog)

    p = sub.add_parser("check", parents=[common, outputs, labelled], allow_abbrev=False,
                       help="проверки метризуемости и интегралов")
    p.add_argument("--npoints", type=int, default=100)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("geodesic", parents=[common, outputs, labelled, run], allow_abbrev=False,
                       help="геодезическая с мониторами интегралов")
    for name, default in (("--x", 0.0), ("--y", np.pi / 2), ("--xd", 1.0), ("--yd", 0.0), ("--t1", 1.0)):
        p.add_argument(name, type=float, default=default)
    p.set_defaults(handler=cmd_geodesic)

    p = sub.add_parser("quotient", parents=[common, outputs, labelled, run], allow_abbrev=False,
                       help="решение фактор-уравнения")
    for name, default in (("--x", 0.0), ("--y", 1.0), ("--yx", 0.5), ("--x1", 1.0)):
        p.add_argument(name, type=float, default=default)
    p.set_defaults(handler=cmd_quotient)

    p = sub.add_parser("superintegrable", parents=[common, outputs, run], allow_abbrev=False,
                       help="траектории сверхинтегрируемой системы")
    for name, default in (("--theta", 1.0), ("--phi", 0.7), ("--c1", 0.0), ("--c2", 0.0), ("--k", 1.0),
                          ("--x0", 1.0), ("--t1", 0.5), ("--xmin", 0.5), ("--xmax", 2.0)):
        p.add_argument(name, type=float, default=default)
    p.add_argument("--branch", default="plus", choices=["plus", "minus"])
    p.add_argument("--direction", type=int, default=1, choices=[-1, 1])
    p.add_argument("--rank-points", type=int, default=20)
    p.set_defaults(handler=cmd_superintegrable)

    p = sub.add_parser("classify", parents=[common, outputs], allow_abbrev=False,
                       help="нормальная форма действия ℒ_X")
    p.add_argument("--m", default=None, help="элементы 2×2 матрицы по строкам: a,b,c,d")
    p.add_argument("--label", dest="labels", action="append", default=None,
                   help="две метки, σ которых задают пространство")
    p.set_defaults(handler=cmd_classify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    config = load_config(args.config)
    logging.basicConfig(
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        level=getattr(logging, str(config["log_level"]).upper(), logging.INFO),
    )
    if args.seed is not None:
        config["seed"] = args.seed

    try:
        return args.handler(args, extra, config)
    except USAGE_ERRORS as e:
        logger.error(f"{args.command}: {type(e).__name__}: {e}")
        print(json.dumps({"error": type(e).__name__, "message": str(e), "row": getattr(e, "row", None)},
                         ensure_ascii=False), file=sys.stderr)
        return 2
    except ProjConnError as e:
        logger.error(f"{args.command}: {type(e).__name__}: {e}")
        print(json.dumps({"error": type(e).__name__, "message": str(e)}, ensure_ascii=False), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
