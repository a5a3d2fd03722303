"""
Тесты пространства метризаций: нормальные формы ℒ_X, выделенные координаты, семейство dom3
"""

import numpy as np
import pytest
from scipy.linalg import expm

from catalog import dom3_basis, dom3_projective_field, make
from errors import BadParam, ExceptionalPoint, NoSolution, OnEigenspace, ZeroAction
from geometry import lie_derivative_sigma, projective_field_residual, sigma_from_metric
from metrization import (DOM3_EIGENVALUES, EXCEPTIONAL_ROWS, classify, coefficients_from_distinguished,
                         collocation_grid, component_count, distinguished_coords, dom3_flow, dom3_parametrize,
                         exceptional_row, flow_invariants, lie_action_matrix, normal_action, orbit_equivalent,
                         pullback_flow, recover_projective_field, sigma_from_distinguished,
                         spherical_coefficients)

TWO_PI = 2 * np.pi

ACTIONS = [("I", 2.0), ("II", 1.0), ("III", 0.0), ("III", 0.3)]


def _circular(a: float, b: float) -> float:
    d = (a - b) % TWO_PI
    return min(d, TWO_PI - d)


def _generic_point(rng) -> np.ndarray:
    # вдали от собственных прямых: e^{u2/u1} в случае II остаётся конечным
    return rng.uniform(0.2, 2.0, size=2) * rng.choice([-1.0, 1.0], size=2)


def test_classify_diagonal():
    action = classify([[2.0, 0.0], [0.0, 1.0]])
    assert action.case == "I"
    assert action.lam == pytest.approx(2.0)
    assert component_count(action) == 4


def test_classify_rotation():
    action = classify([[0.0, -1.0], [1.0, 0.0]])
    assert (action.case, action.subcase) == ("III", "III0")
    assert action.lam == pytest.approx(0.0)
    assert component_count(action) == 1


def test_classify_jordan_block():
    action = classify([[1.0, 0.0], [1.0, 1.0]])
    assert action.case == "II"
    assert component_count(action) == 2


def test_classify_errors():
    with pytest.raises(ZeroAction):
        classify(np.zeros((2, 2)))
    with pytest.raises(BadParam):
        classify([[0.0, 1.0], [0.0, 0.0]])


@pytest.mark.parametrize("M", [
    [[3.0, 1.0], [0.5, -2.0]],
    [[1.0, -2.0], [3.0, 0.5]],
    [[2.0, 1.0], [0.0, 2.0]],
])
def test_classify_reconstructs_matrix(M):
    action = classify(M)
    P = action.P
    np.testing.assert_allclose(action.scale * P @ action.N @ np.linalg.inv(P), M, atol=1e-10)


@pytest.mark.parametrize("case,lam", ACTIONS)
def test_distinguished_coordinates_along_flow(case, lam, rng):
    action = normal_action(case, lam)
    for _ in range(500):
        u = _generic_point(rng)
        t = rng.uniform(-1, 1)
        a = distinguished_coords(*u, action)
        b = distinguished_coords(*pullback_flow(action, u, t), action)
        assert a.component == b.component
        if action.subcase == "IIIλ":
            assert _circular(a.u, b.u) < 1e-10
        else:
            assert b.u == pytest.approx(a.u, rel=1e-10)
        if case == "III":
            assert _circular(b.s, a.s + t) < 1e-10
        else:
            assert b.s == pytest.approx(a.s + t, abs=1e-10)


@pytest.mark.parametrize("case,lam", ACTIONS)
def test_inverse_of_distinguished_coordinates(case, lam, rng):
    action = normal_action(case, lam)
    for _ in range(20):
        u = _generic_point(rng)
        c = distinguished_coords(*u, action)
        np.testing.assert_allclose(coefficients_from_distinguished(c.s, c.u, action, c.component), u, rtol=1e-9)


def test_component_counts():
    counts = [component_count(normal_action(case, lam)) for case, lam in ACTIONS]
    assert counts == [4, 2, 1, 1]


def test_points_on_eigenlines():
    with pytest.raises(OnEigenspace):
        distinguished_coords(0.0, 1.0, normal_action("I", 2.0))
    with pytest.raises(OnEigenspace):
        distinguished_coords(0.0, 1.0, normal_action("II"))


@pytest.mark.parametrize("case,lam", ACTIONS)
def test_orbit_equivalence_against_flow_search(case, lam, rng):
    action = normal_action(case, lam)
    step = expm(0.005 * action.N)
    mats = [expm(-3.0 * action.N)]
    for _ in range(1200):
        mats.append(step @ mats[-1])
    mats = np.array(mats)
    for _ in range(200):
        p = _generic_point(rng)
        if rng.uniform() < 0.5:
            q = pullback_flow(action, p, rng.uniform(-3, 3))
            assert orbit_equivalent(p, q, action)
        else:
            q = rng.uniform(-2, 2, size=2)
            flows = mats @ p
            near = np.min(np.linalg.norm(flows - q, axis=1))
            if near > 0.05:
                assert not orbit_equivalent(p, q, action)


def test_opposite_components_are_not_equivalent():
    action = normal_action("I", 2.0)
    assert not orbit_equivalent([1.0, 1.0], [-1.0, 1.0], action)


def test_spherical_coefficients_orthonormal():
    R = spherical_coefficients(1.0, 0.7)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-14)


def test_exceptional_points():
    with pytest.raises(ExceptionalPoint) as e:
        dom3_parametrize(0.0, np.pi / 2, 0.0)
    assert e.value.row == "θ=π/2, φ=0"
    np.testing.assert_array_equal(EXCEPTIONAL_ROWS["θ=π/2, φ=0"][0], [1.0, 0.0, 0.0])
    for name, (theta, phi) in {
        "θ=π/2, φ=0": (np.pi / 2, 0.0), "θ=π/2, φ=π/2": (np.pi / 2, np.pi / 2),
        "θ=π/2, φ=π": (np.pi / 2, np.pi), "θ=π/2, φ=3π/2": (np.pi / 2, 1.5 * np.pi),
        "θ=0": (0.0, 0.3), "θ=π": (np.pi, 0.3),
    }.items():
        assert exceptional_row(theta, phi) == name
        computed, table = spherical_coefficients(theta, phi if name.startswith("θ=π/2") else 0.0), EXCEPTIONAL_ROWS[name]
        for row_c, row_t in zip(computed, table):
            assert np.allclose(row_c, row_t, atol=1e-12) or np.allclose(row_c, -row_t, atol=1e-12)
    assert exceptional_row(1.0, 0.7) is None


def test_parametrize_rejects_theta_out_of_range():
    with pytest.raises(BadParam):
        dom3_parametrize(0.0, 4.0, 0.2)


def test_flow_invariants_constant(rng):
    u = dom3_parametrize(0.3, 1.0, 0.7)
    before = flow_invariants(u, DOM3_EIGENVALUES)
    after = flow_invariants(dom3_flow(u, rng.uniform(-1, 1)), DOM3_EIGENVALUES)
    for key in before:
        assert after[key] == pytest.approx(before[key], rel=1e-10)


def test_lie_action_matrix_on_dom3_basis():
    grid = collocation_grid((0.5, 1.5, 0.5, 1.0), 4)
    M = lie_action_matrix(dom3_basis(), dom3_projective_field(), grid)
    np.testing.assert_allclose(M, np.diag(DOM3_EIGENVALUES), atol=1e-9)


def test_recover_projective_field():
    recovered = recover_projective_field(dom3_basis(), DOM3_EIGENVALUES)
    assert recovered.residual < 1e-6
    X1, X2 = recovered.field.components(1.0, 0.7)
    assert X1 == pytest.approx(2.0, abs=1e-5)
    assert X2 == pytest.approx(0.7, abs=1e-5)


def test_recover_projective_field_without_solution():
    with pytest.raises(NoSolution) as e:
        recover_projective_field(dom3_basis(), (1.0, 2.0, 3.0))
    assert e.value.residual > 1e-6
    with pytest.raises(NoSolution):
        recover_projective_field(dom3_basis(), (1.0, 1.0, 1.0))


def test_recover_flat_homothety():
    flat = make("flat").metric
    sigma = sigma_from_metric(flat)
    recovered = recover_projective_field([sigma], (-2.0 / 3.0,))
    assert recovered.residual < 1e-10
    coeffs = dict(zip(recovered.monomials, recovered.coefficients[:len(recovered.monomials)]))
    coeffs_y = dict(zip(recovered.monomials, recovered.coefficients[len(recovered.monomials):]))
    assert coeffs[(1, 0)] + coeffs_y[(0, 1)] == pytest.approx(2.0)
    for (a, b), c in list(coeffs.items()) + list(coeffs_y.items()):
        if a + b > 1:
            assert abs(c) < 1e-8
    lie = lie_derivative_sigma(sigma, recovered.field)
    np.testing.assert_allclose(lie.vector(0.8, 0.6), -2.0 / 3.0 * sigma.vector(0.8, 0.6), atol=1e-9)
    assert projective_field_residual(flat, recovered.field, (0.8, 0.6)).residual < 1e-8


def test_sigma_from_distinguished_combines_basis(rng):
    action = normal_action("I", 2.0)
    basis = dom3_basis()[:2]
    u = _generic_point(rng)
    c = distinguished_coords(*u, action)
    sigma = sigma_from_distinguished(c.s, c.u, action, basis, c.component)
    expected = u[0] * basis[0].vector(1.0, 0.7) + u[1] * basis[1].vector(1.0, 0.7)
    np.testing.assert_allclose(sigma.vector(1.0, 0.7), expected, rtol=1e-10, atol=1e-12)
