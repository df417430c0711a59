import numpy as np
import pytest

from conftest import compose
from dpg import divdiv_norm
from fortin import (
    MODES, SaddleSystem, build_dual_basis, build_dual_basis_gg, certify_constraint_ranks, ddiv_operator,
    divdiv_vector_operator, fortin_ddiv, fortin_divdiv_vector, fortin_ggrad, fortin_ggrad_element,
    orthogonality_residuals, random_affine_map, run_fortin_certification, verify_fortin_boundedness,
)
from mesh import AffineMap
from poly import FieldKind, PolyField, cell_integral
from traces import qhat_functionals
from transforms import push_tensor, push_vector
from utils.error_handler import CertificationError

A3_REFERENCE = np.array([
    [-1.0 / 6.0, -1.0, 1.0 / 6.0],
    [1.0 / 6.0, -1.0 / 3.0, -1.0 / 2.0],
    [-1.0 / 2.0, 1.0 / 3.0, -1.0 / 6.0],
])


def test_reference_dual_basis_matrix():
    dual = build_dual_basis_gg()
    np.testing.assert_allclose(dual.A3, A3_REFERENCE, atol=1e-12)
    assert np.linalg.det(dual.A3) == pytest.approx(-1.0 / 3.0, rel=1e-12)
    assert np.linalg.det(dual.A1) == pytest.approx(1.0 / 216.0, rel=1e-12)
    assert dual.det == pytest.approx(-1.0 / 648.0, rel=1e-12)
    assert dual.triangular_defect() < 1e-13
    assert dual.duality_residual() < 1e-12


def test_dual_basis_on_random_element(rng):
    dual = build_dual_basis(random_affine_map(rng, h=0.3))
    assert dual.duality_residual() < 1e-10
    assert dual.triangular_defect() < 1e-12


def test_corrupted_dual_basis_is_rejected():
    with pytest.raises(CertificationError) as info:
        build_dual_basis(AffineMap.identity(), corrupt=True)
    assert info.value.block == "dual_basis"


def test_ggrad_preserves_moment_functionals(rng, skewed_map):
    z = PolyField.random(FieldKind.SCALAR, 6, rng, amap=skewed_map)
    pz = fortin_ggrad_element(z)
    assert pz.degree == 3
    np.testing.assert_allclose(qhat_functionals(skewed_map, pz), qhat_functionals(skewed_map, z), atol=1e-11)


def test_ggrad_preserves_quadratic_functionals():
    amap = AffineMap.identity()
    z = PolyField.scalar({(2, 0): 1.0}, amap=amap)
    np.testing.assert_allclose(qhat_functionals(amap, fortin_ggrad_element(z)),
                               [0.0, 1.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 1.0, 0.0], atol=1e-13)


def test_ggrad_preserves_hessian_moments(skewed_map):
    z = compose(lambda p: p[:, 0] ** 3 + p[:, 1] ** 3, skewed_map, 3)
    pz = fortin_ggrad_element(z)
    np.testing.assert_allclose(cell_integral(pz.hessian()), cell_integral(z.hessian()), atol=1e-11)


def test_ggrad_keeps_affine_functions(rng, skewed_map):
    z = PolyField.random(FieldKind.SCALAR, 1, rng, amap=skewed_map)
    pz = fortin_ggrad_element(z)
    np.testing.assert_allclose(pz.with_degree(1).coeffs, z.coeffs, atol=1e-12)
    assert pz.top_degree_norm(1) < 1e-12


def test_ggrad_on_mesh(criss_cross_mesh, rng):
    mesh = criss_cross_mesh
    pieces = [PolyField.random(FieldKind.SCALAR, 4, rng, amap=mesh.affine_map(t)) for t in range(mesh.n_triangles)]
    projected = fortin_ggrad(pieces, mesh)
    for t, (z, pz) in enumerate(zip(pieces, projected)):
        np.testing.assert_allclose(pz.coeffs, fortin_ggrad_element(z, mesh.affine_map(t)).coeffs)
    with pytest.raises(ValueError):
        fortin_ggrad(pieces[:-1], mesh)
    with pytest.raises(ValueError):
        fortin_ggrad_element(PolyField.random(FieldKind.SCALAR, 2, rng))


def test_constraint_blocks_have_full_rank():
    vector_system = divdiv_vector_operator().system
    ddiv_system = ddiv_operator().system
    assert vector_system.shape == (65, 35)
    assert ddiv_system.shape == (45, 15)
    assert vector_system.check_rank() > 1e-8
    assert ddiv_system.check_rank() > 1e-8
    certificates = certify_constraint_ranks(strict=True)
    assert all(c.passed for c in certificates)


@pytest.mark.parametrize("block", ["dual_basis", "divdiv_vector", "ddiv"])
def test_corrupted_blocks_are_reported(block):
    with pytest.raises(CertificationError) as info:
        certify_constraint_ranks(corrupt=block, strict=True)
    assert info.value.block == block
    certificates = certify_constraint_ranks(corrupt=block, strict=False)
    assert {c.block for c in certificates if not c.passed} == {block}
    with pytest.raises(ValueError):
        certify_constraint_ranks(corrupt="ggrad")


def test_saddle_system_solves_constrained_minimum():
    system = SaddleSystem("toy", np.eye(2), np.array([[1.0], [1.0]]))
    x = system.solve(np.zeros((2, 1)), np.array([[2.0]]))
    np.testing.assert_allclose(x[:, 0], [1.0, 1.0])
    with pytest.raises(CertificationError):
        SaddleSystem("flat", np.eye(2), np.zeros((2, 1))).check_rank()
    with pytest.raises(ValueError):
        SaddleSystem("bad", np.eye(3), np.ones((2, 1)))


def test_distance_mode_reproduces_discrete_inputs(rng, skewed_map):
    vec_op, dd_op = divdiv_vector_operator(), ddiv_operator()
    x = rng.standard_normal(vec_op.system.n_trial)
    xi = push_tensor(skewed_map, vec_op.xi_trial.combine(x))
    tau = push_vector(skewed_map, vec_op.tau_trial.combine(x))
    pxi, ptau = fortin_divdiv_vector(xi, tau, mode="distance")
    np.testing.assert_allclose(pxi.coeffs, xi.coeffs, atol=1e-9)
    np.testing.assert_allclose(ptau.coeffs, tau.coeffs, atol=1e-9)

    q = push_tensor(skewed_map, dd_op.trial.combine(rng.standard_normal(dd_op.system.n_trial)))
    np.testing.assert_allclose(fortin_ddiv(q, mode="distance").coeffs, q.coeffs, atol=1e-9)


@pytest.mark.parametrize("mode", MODES)
def test_orthogonality_commutativity_and_idempotence(mode):
    residuals = orthogonality_residuals(np.random.default_rng(7), samples=3, mode=mode)
    assert {"ggrad.kernel", "ddiv.commute_divdiv", "divdiv_vector.idempotence"} <= set(residuals)
    worst = max(residuals, key=residuals.get)
    assert residuals[worst] < 1e-9, worst


def test_norm_mode_does_not_increase_reference_norm(rng):
    q = PolyField.random(FieldKind.TENSOR, 4, rng)
    star = ddiv_operator()(q, mode="norm")
    assert divdiv_norm(star) <= divdiv_norm(q) * (1 + 1e-10)


def test_boundedness_report():
    report = verify_fortin_boundedness(n=3, seed=11, mode="distance")
    assert report.finite
    assert report.stable
    for name, ratio in report.discrete_ratio.items():
        assert ratio <= 1.0 + 1e-8, name
    assert set(report.h_ratios) == {"ggrad", "divdiv_vector", "ddiv"}
    with pytest.raises(ValueError):
        verify_fortin_boundedness(n=0)


def test_full_certification_passes():
    report = run_fortin_certification(samples=4, seed=3)
    assert report.passed, report.to_text()
    assert report.boundedness is not None
    assert "全部通过" in report.to_text()


def test_certification_records_failures_without_raising():
    strict = run_fortin_certification(tolerance=1e-15, samples=2, seed=3)
    assert not strict.passed
    corrupted = run_fortin_certification(samples=2, seed=3, corrupt="ddiv")
    assert "ddiv" in corrupted.failed_blocks
    assert "FAIL" in corrupted.to_text()


def test_unknown_mode_is_rejected(rng):
    with pytest.raises(ValueError):
        fortin_ddiv(PolyField.random(FieldKind.TENSOR, 2, rng), mode="energy")
