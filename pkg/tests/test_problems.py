import math

import numpy as np
import pytest

from dpg import MaterialTensor, Scheme, TrialCoefficients, assemble
from mesh import build_initial_mesh, notched_square, refine_uniform, unit_square
from problems import (
    DEFAULT_OPENING, ManufacturedSolution, corner_exponent_newton, corner_subdivision, eval_singular,
    exact_cell_means, get_problem, measure_errors, shear_force_energy, shear_force_magnitude, singular_problem,
    smooth_problem, solve_corner_exponent, zero_problem,
)
from utils.error_handler import RootFindingError


@pytest.fixture(scope="module")
def params():
    return solve_corner_exponent(DEFAULT_OPENING)


def _laplacian(params, points):
    return np.trace(eval_singular(params, points)[2], axis1=1, axis2=2)


def test_corner_exponent_values(params):
    assert 0.66 <= params.alpha <= 0.68
    assert 1.22 <= params.C <= 1.25
    assert params.lam == pytest.approx(1.0 + params.alpha)


def test_newton_agrees_with_bracketing(params):
    alpha, c = corner_exponent_newton(params.omega, 0.6, 1.0)
    assert alpha == pytest.approx(params.alpha, abs=1e-10)
    assert c == pytest.approx(params.C, abs=1e-10)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_clamped_conditions_on_both_edges(params, r, sign):
    phi = sign * params.omega / 2.0
    point = np.array([[r * math.cos(phi), r * math.sin(phi)]])
    u, grad, _ = eval_singular(params, point)
    normal = np.array([-math.sin(phi), math.cos(phi)])
    assert abs(u[0]) < 1e-12
    assert abs(grad[0] @ normal) < 1e-12


def test_singular_solution_is_biharmonic(params):
    h = 1e-3
    for point in ([0.4, 0.3], [-0.2, 0.5], [0.3, -0.6]):
        p = np.array([point])
        shifts = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
        lap = _laplacian(params, p + shifts).sum() - 4.0 * _laplacian(params, p)[0]
        scale = abs(_laplacian(params, p)[0]) / np.hypot(*point) ** 2
        assert abs(lap / h**2) < 1e-3 * scale


def test_shear_force_matches_gradient_of_laplacian(params):
    h = 1e-5
    p = np.array([[0.3, 0.4]])
    gx = (_laplacian(params, p + [h, 0.0]) - _laplacian(params, p - [h, 0.0]))[0] / (2 * h)
    gy = (_laplacian(params, p + [0.0, h]) - _laplacian(params, p - [0.0, h]))[0] / (2 * h)
    assert shear_force_magnitude(params, p)[0] == pytest.approx(math.hypot(gx, gy), rel=1e-6)


def test_shear_force_is_not_square_integrable(params):
    rhos = np.array([0.01, 0.005, 0.0025])
    energies = np.array([shear_force_energy(params, rho) for rho in rhos])
    assert np.all(np.diff(energies) > 0)
    slope = np.polyfit(np.log(rhos), np.log(energies), 1)[0]
    assert slope == pytest.approx(2.0 * params.alpha - 2.0, abs=0.1)


def test_corner_exponent_rejects_bad_opening():
    with pytest.raises(ValueError):
        solve_corner_exponent(0.5 * math.pi)
    with pytest.raises(ValueError):
        notched_square(1.6 * math.pi)


def test_convex_opening_has_no_singularity():
    params = solve_corner_exponent(math.pi)
    assert params.alpha == pytest.approx(1.0)


def test_missing_root_raises(monkeypatch):
    monkeypatch.setattr("problems.singular._GRID", 2)
    monkeypatch.setattr("problems.singular._BRACKET", (0.01, 0.02))
    with pytest.raises(RootFindingError):
        solve_corner_exponent(DEFAULT_OPENING)


def test_smooth_load_at_centre():
    problem = smooth_problem()
    assert problem.f(np.array([[0.5, 0.5]]))[0] == pytest.approx(5.0, rel=1e-12)
    assert problem.u(np.array([[0.5, 0.5]]))[0] == pytest.approx(1.0 / 256.0)


def test_smooth_load_scales_with_material():
    soft = smooth_problem(MaterialTensor.isotropic(0.3))
    # ℂ 对 divDiv 作用：f = (1−ν)Δ²u + νΔ²u = Δ²u
    assert soft.f(np.array([[0.5, 0.5]]))[0] == pytest.approx(5.0, rel=1e-12)


def test_smooth_boundary_trace_is_clamped():
    problem = smooth_problem()
    mesh = refine_uniform(problem.initial_mesh())
    trace = problem.boundary_trace(mesh)
    np.testing.assert_allclose(trace.as_array(), 0.0, atol=1e-15)


def test_singular_boundary_trace_vanishes_at_corner():
    problem = singular_problem()
    mesh = problem.initial_mesh()
    data = problem.boundary_trace(mesh).as_array()
    corner = int(np.argmin(np.hypot(*mesh.vertices.T)))
    np.testing.assert_array_equal(data[corner], 0.0)
    assert np.abs(data).max() > 0


def test_cell_means_reproduce_error_identity():
    # u = x²y：误差平方 = ∫|u|² − Σ|T|·ū_T²
    quadratic = ManufacturedSolution(
        name="x2y",
        domain_factory=unit_square,
        u=lambda p: p[:, 0] ** 2 * p[:, 1],
        gradient=lambda p: np.column_stack([2 * p[:, 0] * p[:, 1], p[:, 0] ** 2]),
        hessian=lambda p: np.stack([np.column_stack([2 * p[:, 1], 2 * p[:, 0]]),
                                    np.column_stack([2 * p[:, 0], 0 * p[:, 0]])], axis=1),
    )
    mesh = refine_uniform(build_initial_mesh(*unit_square()))
    coefficients = TrialCoefficients.zeros(assemble(mesh, Scheme.theta()))
    u_mean, g_mean, m_mean = exact_cell_means(mesh, quadratic)
    coefficients.u, coefficients.theta, coefficients.M = u_mean, g_mean, m_mean
    errors = measure_errors(mesh, coefficients, quadratic)
    assert errors.err_u**2 == pytest.approx(1.0 / 15.0 - mesh.areas @ u_mean**2, rel=1e-10)
    theta_sq = 29.0 / 45.0 - mesh.areas @ np.sum(g_mean**2, axis=1)
    assert errors.err_theta**2 == pytest.approx(theta_sq, rel=1e-10)


def test_zero_problem_errors_vanish(square_mesh):
    system = assemble(square_mesh, Scheme.plain())
    errors = measure_errors(square_mesh, TrialCoefficients.zeros(system), zero_problem())
    assert errors.as_dict() == {"err_u": 0.0, "err_theta": None, "err_M": 0.0}


def test_corner_subdivision_covers_triangle():
    triangle = np.array([[0.0, 0.0], [1.0, 0.0], [0.2, 0.9]])
    pieces = corner_subdivision(triangle, 0, 4)
    assert len(pieces) == 9
    areas = [0.5 * abs(np.linalg.det(np.column_stack([p[1] - p[0], p[2] - p[0]]))) for p in pieces]
    assert sum(areas) == pytest.approx(0.45, rel=1e-14)
    assert min(areas) > 0


def test_get_problem():
    assert get_problem("smooth").name == "smooth"
    assert get_problem("zero").has_load is False
    with pytest.raises(ValueError):
        get_problem("cantilever")
    with pytest.raises(ValueError):
        get_problem("singular", MaterialTensor.isotropic(0.3))
