import numpy as np
import pytest
from scipy.linalg import svdvals

from dpg import (
    LocalDpgSystem, LocalTestSpace, MaterialTensor, Scheme, assemble, local_b, local_gram, local_load,
    scheme_consistency_check, solve_problem, symmetry_defect,
)
from dpg.local import b_rows_tau, b_rows_xi
from fortin.certify import random_affine_map
from mesh import AffineMap
from poly import FieldKind, PolyField
from problems import smooth_problem, zero_problem
from transforms import push_vector

SCHEMES = [Scheme.theta(), Scheme.plain(4), Scheme.plain(2)]


@pytest.mark.parametrize("scheme, dim", [(SCHEMES[0], 75), (SCHEMES[1], 55), (SCHEMES[2], 28)])
def test_test_space_dimensions(scheme, dim):
    space = LocalTestSpace(scheme, AffineMap.identity())
    assert space.dim == dim
    assert local_b(AffineMap.identity(), scheme).shape == (dim, scheme.n_trial)


@pytest.mark.parametrize("scheme", SCHEMES)
def test_gram_is_spd_on_random_elements(rng, scheme):
    for _ in range(10):
        G = local_gram(random_affine_map(rng, h=rng.uniform(0.05, 1.0)), scheme)
        np.testing.assert_allclose(G, G.T, atol=1e-12 * np.abs(G).max())
        assert np.linalg.eigvalsh(G).min() > 0


def _constant_deflection(scheme):
    """u ≡ 1 与 û ≡ 1（顶点值 1，梯度 0）"""
    layout = scheme.trial_layout
    k = np.zeros(scheme.n_trial)
    k[layout["u"]] = 1.0
    k[layout["uhat"].start + np.array([0, 3, 6])] = 1.0
    return k


@pytest.mark.parametrize("scheme", SCHEMES[:2])
def test_b_kernel_is_constant_deflection(scheme, skewed_map):
    for amap in (AffineMap.identity(), skewed_map):
        B = local_b(amap, scheme)
        np.testing.assert_allclose(B @ _constant_deflection(scheme), 0.0, atol=1e-12 * np.abs(B).max())
        sigma = svdvals(B)
        # 零度恰为 1
        assert sigma[-1] < 1e-10 * sigma[0]
        assert sigma[-2] > 1e-8


def test_u_column_sees_divergence(skewed_map):
    scheme = Scheme.theta()
    tau_hat = PolyField.vector(PolyField.scalar({(1, 0): skewed_map.J}), PolyField.scalar({}))
    tau = push_vector(skewed_map, tau_hat)  # div τ = 1
    row = b_rows_tau(scheme, skewed_map, tau)
    assert row[scheme.trial_layout["u"]][0] == pytest.approx(skewed_map.area, rel=1e-12)


def test_moment_column_sees_identity(skewed_map):
    scheme = Scheme.theta()
    one, zero = PolyField.scalar({(0, 0): 1.0}), PolyField.scalar({})
    xi = PolyField.tensor(one, one, zero).with_map(skewed_map)
    row = b_rows_xi(scheme, skewed_map, xi)[scheme.trial_layout["M"]]
    # M = identity 对应 xx、yy 两列之和
    assert row[0] + row[1] == pytest.approx(2.0 * skewed_map.area, rel=1e-12)
    assert row[2] == pytest.approx(0.0, abs=1e-14)


def test_load_vector_pairs_with_z(skewed_map):
    scheme = Scheme.theta()
    space = LocalTestSpace(scheme, skewed_map)
    l = local_load(skewed_map, scheme, lambda pts: np.ones(len(pts)))
    z_block = space.blocks[0]
    # ẑ₀ 为常数 √2，其余正交基与常数正交
    assert l[z_block][0] == pytest.approx(-np.sqrt(2.0) * skewed_map.area, rel=1e-12)
    np.testing.assert_allclose(l[z_block][1:], 0.0, atol=1e-13)
    assert np.all(l[z_block.stop:] == 0.0)


def test_residual_norm_matches_explicit_solve(rng, skewed_map):
    system = LocalDpgSystem.build(skewed_map, Scheme.theta(), lambda pts: pts[:, 0])
    x = rng.standard_normal(Scheme.theta().n_trial)
    r = system.l - system.B @ x
    assert system.residual_norm2(x) == pytest.approx(r @ np.linalg.solve(system.G, r), rel=1e-9)


@pytest.mark.parametrize("scheme", SCHEMES[:2])
def test_assembled_matrix_is_symmetric_and_thread_independent(fine_square_mesh, scheme):
    problem = smooth_problem()
    serial = assemble(fine_square_mesh, scheme, problem.f, problem.boundary_trace(fine_square_mesh))
    parallel = assemble(fine_square_mesh, scheme, problem.f, problem.boundary_trace(fine_square_mesh),
                        threads=3)
    assert symmetry_defect(serial.A) <= 1e-12 * abs(serial.A).max()
    np.testing.assert_array_equal(serial.A.toarray(), parallel.A.toarray())
    np.testing.assert_array_equal(serial.rhs, parallel.rhs)


def test_zero_problem_has_zero_solution(criss_cross_mesh):
    solution = solve_problem(criss_cross_mesh, Scheme.theta(), zero_problem())
    np.testing.assert_array_equal(solution.coefficients.x, 0.0)
    assert solution.ndof == solution.system.layout.counts.total


def test_galerkin_orthogonality(fine_square_mesh):
    solution = solve_problem(fine_square_mesh, Scheme.theta(), smooth_problem())
    system = solution.system
    residual = system.A @ solution.coefficients.x - system.rhs
    assert np.linalg.norm(residual) <= 1e-8 * np.linalg.norm(system.rhs)
    assert solution.coefficients.qhat.constraint_residual(fine_square_mesh) < 1e-12


def test_solution_keeps_boundary_data(fine_square_mesh):
    problem = smooth_problem()
    solution = solve_problem(fine_square_mesh, Scheme.plain(4), problem)
    boundary = problem.boundary_trace(fine_square_mesh)
    idx = np.flatnonzero(fine_square_mesh.vertex_is_boundary)
    np.testing.assert_array_equal(solution.coefficients.uhat.as_array()[idx], boundary.as_array()[idx])
    assert solution.coefficients.theta is None


def test_schemes_agree_on_same_mesh(fine_square_mesh):
    report = scheme_consistency_check(fine_square_mesh, smooth_problem())
    assert np.isfinite(report.u_difference) and np.isfinite(report.M_difference)
    assert report.M_difference < 0.5


def test_material_tensor_validation():
    C = MaterialTensor.isotropic(0.3)
    m = PolyField.random(FieldKind.TENSOR, 2, np.random.default_rng(0))
    np.testing.assert_allclose(C.apply_inverse(C.apply(m)).coeffs, m.coeffs, atol=1e-13)
    assert MaterialTensor.identity().is_identity
    with pytest.raises(ValueError):
        MaterialTensor.isotropic(0.7)
    with pytest.raises(ValueError):
        MaterialTensor(np.array([[1.0, 0.0, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]))


def test_scheme_validation():
    assert Scheme.theta().n_trial == 24
    assert Scheme.plain().n_trial == 22
    with pytest.raises(ValueError):
        Scheme.plain(3)
    with pytest.raises(ValueError):
        Scheme("theta", MaterialTensor.identity(), 2)


def test_solution_minimizes_residual(fine_square_mesh, rng):
    solution = solve_problem(fine_square_mesh, Scheme.theta(), smooth_problem())
    system = solution.system
    x = solution.coefficients.x
    best = system.residual_norm2(x).sum()
    for i in rng.choice(system.ndof, size=20, replace=False):
        for step in (1e-3, -1e-3):
            perturbed = x.copy()
            perturbed[i] += step
            assert system.residual_norm2(perturbed).sum() >= best * (1 - 1e-12)


def test_gram_condition_is_recorded(skewed_map):
    system = LocalDpgSystem.build(skewed_map, Scheme.theta())
    assert np.isfinite(system.condition)
    assert system.condition >= 1.0


@pytest.mark.parametrize("scheme", SCHEMES[:2])
def test_global_matrix_admits_cholesky(criss_cross_mesh, scheme):
    system = assemble(criss_cross_mesh, scheme, None, smooth_problem().boundary_trace(criss_cross_mesh))
    np.linalg.cholesky(system.A.toarray())
