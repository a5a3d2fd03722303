"""
Тесты динамики: геодезические, фактор-уравнение, алгебраические траектории, ранг интегралов
"""

import numpy as np
import pytest

from catalog import dom3_basis, make, spherical_sigma
from dynamics import (GeodesicState, IntegralMonitor, IntegratorOptions, QuotientState, TrajectoryConstants,
                      hamiltonian_monitor, independence_rank, integrate_geodesic, integrate_quotient,
                      measure_constants, monitor, project_geodesic, quotient_integral_monitors, reparametrize,
                      trace_curve, trajectory_polynomial, trajectory_solve)
from errors import AtVerticalTangent, BadParam, LeftChart, NoRealRoot, ProjConnError
from geometry import combine_sigmas, proj_conn_from_metric, quotient_ode_residual
from metrization import spherical_coefficients


def test_sphere_equator_conserves_energy(sphere):
    traj = integrate_geodesic(sphere.metric, GeodesicState(0.0, 0.0, np.pi / 2, 1.0, 0.0), 1.0)
    assert len(traj) == IntegratorOptions().npoints
    (result,) = monitor(traj, [hamiltonian_monitor(sphere.metric)])
    assert result.reference == pytest.approx(0.5)
    assert result.max_drift < 1e-8
    assert not result.flagged
    np.testing.assert_allclose(traj.to_frame()["y"], np.pi / 2, atol=1e-9)


def test_geodesic_leaves_chart(sphere):
    with pytest.raises(LeftChart) as e:
        integrate_geodesic(sphere.metric, GeodesicState(0.0, 0.0, np.pi / 2, 1.0, 0.0), 10.0)
    assert e.value.last_state.x == pytest.approx(3.0, abs=1e-6)
    assert e.value.last_state.t == pytest.approx(3.0, abs=1e-6)
    assert len(e.value.samples) > 0


def test_geodesic_start_outside_chart(sphere):
    with pytest.raises(BadParam):
        integrate_geodesic(sphere.metric, GeodesicState(0.0, 5.0, 1.0, 1.0, 0.0), 1.0)


def test_unsafe_monitor_is_flagged(sphere):
    traj = integrate_geodesic(sphere.metric, GeodesicState(0.0, 0.0, np.pi / 2, 1.0, 0.0), 1.0)
    (result,) = monitor(traj, [IntegralMonitor("x2", lambda s: s.x ** 2)])
    assert result.flagged
    assert "x2" in traj.to_frame().columns


def test_sphere_quotient_integral(sphere, rng):
    pc = proj_conn_from_metric(sphere.metric)
    for _ in range(10):
        q0 = QuotientState(rng.uniform(-0.5, 0.5), rng.uniform(1.2, 1.9), rng.uniform(-0.3, 0.3))
        traj = integrate_quotient(pc, q0, q0.x + 0.5, chart=sphere.metric.chart,
                                  singular=sphere.metric.singular_locus)
        (result,) = monitor(traj, quotient_integral_monitors("sphere"))
        assert result.max_drift < 1e-7


def test_supint_quotient_follows_algebraic_curve(supint, rng):
    pc = proj_conn_from_metric(supint.metric)
    for _ in range(20):
        q0 = QuotientState(rng.uniform(0.8, 1.2), rng.uniform(0.8, 1.2), rng.uniform(0.3, 1.0))
        traj = integrate_quotient(pc, q0, q0.x + 0.15)
        drifts = monitor(traj, quotient_integral_monitors("supint"))
        assert all(r.max_drift < 1e-7 for r in drifts)
        c = measure_constants(q0)
        xs, ys = traj.data[:, 0], traj.data[:, 1]
        curve = trace_curve(c, xs, "auto", y0=q0.y)
        assert np.max(np.abs(curve - ys)) < 1e-6


def test_unknown_integral_set():
    with pytest.raises(BadParam):
        quotient_integral_monitors("torus")


def test_zero_slope_has_no_constants():
    with pytest.raises(BadParam):
        measure_constants(QuotientState(1.0, 1.0, 0.0))


@pytest.mark.parametrize("x", [-1.5, -0.4, 0.7, 2.0])
def test_parabola_for_zero_constants(x):
    c = TrajectoryConstants(0.0, 0.0)
    for branch in ("plus", "minus"):
        assert trajectory_solve(c, x, branch) == pytest.approx(x * x / 3, abs=1e-10)


def test_no_real_root():
    with pytest.raises(NoRealRoot):
        trajectory_solve(TrajectoryConstants(0.0, 1.0), -1.0)


def test_vertical_tangent():
    with pytest.raises(AtVerticalTangent):
        trajectory_solve(TrajectoryConstants(1.0, 10.0), 0.5)


def test_bad_branch():
    with pytest.raises(BadParam):
        trajectory_solve(TrajectoryConstants(0.0, 0.0), 1.0, branch="left")


@pytest.mark.parametrize("branch", ["plus", "minus"])
def test_root_slope_matches_first_integral(branch):
    c = TrajectoryConstants(0.2, 1.0)
    x, h = 1.0, 1e-5
    y = trajectory_solve(c, x, branch)
    slope = (trajectory_solve(c, x + h, branch) - trajectory_solve(c, x - h, branch)) / (2 * h)
    assert slope == pytest.approx((x * x + y) / (2 * x - c.c1), rel=1e-6)
    assert abs(trajectory_polynomial(c, x, y)) < 1e-10


def test_reparametrized_parabola():
    c = TrajectoryConstants(0.0, 0.0, k=1.0)
    traj = reparametrize(c, 1.0, 1.0 / 3.0, 0.5)
    g = make("supint.quotient").metric
    (result,) = monitor(traj, [hamiltonian_monitor(g)])
    assert result.reference == pytest.approx(0.5, rel=1e-6)
    assert result.max_drift < 1e-6
    for s in traj.states():
        assert s.yd == pytest.approx((s.x ** 2 + s.y) / (2 * s.x - c.c1) * s.xd, rel=1e-6)
        assert s.y == pytest.approx(s.x ** 2 / 3, rel=1e-10)
    assert traj.data[-1, 1] > 1.0


def test_reparametrization_stops_at_singular_locus():
    c = TrajectoryConstants(0.2, 1.0, k=1.0)
    y0 = trajectory_solve(c, 0.3, "plus")
    with pytest.raises(LeftChart) as e:
        reparametrize(c, 0.3, y0, 2.0, direction=-1)
    x = e.value.samples.data[:, 1]
    assert np.all(np.diff(x) <= 1e-12)


def test_reparametrization_rejects_bad_input():
    with pytest.raises(BadParam):
        reparametrize(TrajectoryConstants(0.0, 0.0, k=0.0), 1.0, 1.0 / 3.0, 0.5)
    with pytest.raises(BadParam):
        reparametrize(TrajectoryConstants(0.0, 0.0, k=1.0), 1.0, 2.0, 0.5)


def test_spherical_integrals_are_independent(rng):
    sigmas = spherical_sigma(1.0, 0.7)
    g = make("dom3.spherical", {"theta": 1.0, "phi": 0.7}).metric
    ranks = []
    for p in g.sample_points(20, rng):
        try:
            ranks.append(independence_rank(sigmas, p, rng.uniform(-1, 1, size=2)))
        except ProjConnError:
            continue
    assert len(ranks) >= 5
    assert set(ranks) == {3}


def test_repeated_metric_lowers_rank():
    s, _, shat = spherical_sigma(1.0, 0.7)
    g = make("dom3.spherical", {"theta": 1.0, "phi": 0.7}).metric
    p = g.sample_points(1, np.random.default_rng(7))[0]
    assert independence_rank((s, s, shat), p, (0.4, -0.3)) < 3
    assert independence_rank(spherical_sigma(1.0, 0.7), p, (0.0, 0.0)) == 0


def test_rank_ignores_scale_of_integrals(rng):
    # σ → cσ умножает I на c^7: столбцы якобиана расходятся на десятки порядков
    basis = dom3_basis()
    rows = spherical_coefficients(1.0, 0.7)
    sigmas = [combine_sigmas(c * row, basis) for c, row in zip((1.0, 10.0, 0.1), rows)]
    g = make("dom3.spherical", {"theta": 1.0, "phi": 0.7}).metric
    ranks = []
    for p in g.sample_points(10, rng):
        try:
            ranks.append(independence_rank(sigmas, p, rng.uniform(-1, 1, size=2)))
        except ProjConnError:
            continue
    assert ranks
    assert set(ranks) == {3}


@pytest.mark.parametrize("label,start,t1", [
    ("sphere", (0.0, 1.2, 1.0, 0.3), 0.8),
    ("dini.liouville", (0.0, 0.0, 0.5, 0.2), 0.5),
    ("flat", (0.0, 0.0, 1.0, 0.5), 1.0),
    ("supint.quotient", (1.0, 1.0, 0.2, 0.2), 0.5),
])
def test_geodesics_cover_quotient_solutions(label, start, t1):
    g = make(label).metric
    pc = proj_conn_from_metric(g)
    traj = integrate_geodesic(g, GeodesicState(0.0, *start), t1)
    projected = project_geodesic(g, traj)
    for (x, y, yx), yxx in zip(projected.data, projected.extra["yxx"]):
        assert abs(quotient_ode_residual(pc, x, y, yx, yxx)) < 1e-6 * max(1.0, abs(yxx))
