import numpy as np
import pytest

from conftest import compose
from mesh import AffineMap, edge_frames, reference_edge_points, refine
from poly import FieldKind, PolyField, l2_inner
from traces import (
    BoundaryTraceP32, DeflectionTraceDofs, DofLayout, MomentTraceDofs, assemble_qhat_constraints, count_dofs,
    edge_trace, local_trace_of, pair_qhat, pair_uhat_divdiv, pair_uhat_divdiv_vector, qhat_functionals,
    qhat_nullspace_basis,
)


def _volume_pairing(xi, tau, z):
    """∫(div τ)z + ∫(τ − DivΞ)·∇z − ∫Ξ:ε∇z"""
    return float(l2_inner(tau.div(), z) + l2_inner(tau - xi.div_rows(), z.grad()) - l2_inner(xi, z.hessian()))


def _enriched_trace(amap, z):
    """P^{3,2} 迹参数：顶点数据加每条边的中点法向导数修正"""
    vertex = local_trace_of(amap, z)
    grad = z.grad()
    params = np.zeros(3)
    for k, frame in enumerate(edge_frames(amap)):
        pts = reference_edge_points(k, np.array([0.0, 0.5, 1.0]))
        dn = grad.eval(pts) @ frame.normal
        params[k] = dn[1] - 0.5 * (dn[0] + dn[2])
    return BoundaryTraceP32.from_vector(np.concatenate([vertex, params]))


def test_dof_counts(fine_square_mesh):
    mesh = fine_square_mesh
    counts = count_dofs(mesh, "theta")
    assert counts.uhat == 3 * mesh.n_interior_vertices
    assert counts.qhat == 2 * mesh.n_edges + 3 * mesh.n_triangles - mesh.n_interior_vertices
    assert counts.fields == 6 * mesh.n_triangles
    assert count_dofs(mesh, "plain").fields == 4 * mesh.n_triangles
    layout = DofLayout.build(mesh, "theta")
    assert layout.ndof == counts.total
    with pytest.raises(ValueError):
        count_dofs(mesh, "mixed")


def test_qhat_nullspace_satisfies_constraints(fine_square_mesh):
    C = assemble_qhat_constraints(fine_square_mesh).toarray()
    Z = qhat_nullspace_basis(fine_square_mesh).toarray()
    np.testing.assert_allclose(C @ Z, 0.0, atol=1e-14)
    assert np.linalg.matrix_rank(Z) == Z.shape[1]
    assert Z.shape[1] == Z.shape[0] - np.linalg.matrix_rank(C)


def test_qhat_annihilates_clamped_c1_functions(criss_cross_mesh, rng):
    mesh = refine(criss_cross_mesh, [0, 1])

    def bubble(pts):
        x, y = pts[:, 0], pts[:, 1]
        return (x * (1 - x) * y * (1 - y)) ** 2

    pieces = [compose(bubble, mesh.affine_map(t), 8) for t in range(mesh.n_triangles)]
    Z = qhat_nullspace_basis(mesh)
    for j in rng.choice(Z.shape[1], size=min(20, Z.shape[1]), replace=False):
        qhat = MomentTraceDofs(Z[:, j].toarray().ravel())
        assert abs(qhat.pair(mesh, pieces)) < 1e-10
        assert qhat.constraint_residual(mesh) == 0.0


def test_qhat_functionals_of_quadratic():
    amap = AffineMap.identity()
    z = PolyField.scalar({(2, 0): 1.0}, amap=amap)  # x²
    values = qhat_functionals(amap, z)
    # 顶点值、边平均、∫_E n·∇z
    expected = [0.0, 1.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 1.0, 0.0]
    np.testing.assert_allclose(values, expected, atol=1e-14)
    assert pair_qhat(np.eye(9)[4], amap, z) == pytest.approx(1.0 / 3.0)


def test_uhat_pairing_divergence_theorem():
    amap = AffineMap.identity()
    dofs = local_trace_of(amap, PolyField.scalar({(1, 0): 1.0}, amap=amap))
    xi = PolyField.zeros(FieldKind.TENSOR, 0, amap=amap)
    tau = PolyField.vector(PolyField.scalar({(0, 0): 1.0}), PolyField.scalar({})).with_map(amap)
    assert float(pair_uhat_divdiv_vector(dofs, amap, xi, tau)) == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("sample", range(4))
def test_uhat_pairing_matches_volume_form(rng, skewed_map, sample):
    z = PolyField.random(FieldKind.SCALAR, 2, rng, amap=skewed_map)
    xi = PolyField.random(FieldKind.TENSOR, 4, rng, amap=skewed_map)
    tau = PolyField.random(FieldKind.VECTOR, 3, rng, amap=skewed_map)
    dofs = local_trace_of(skewed_map, z)
    assert float(pair_uhat_divdiv_vector(dofs, skewed_map, xi, tau)) == pytest.approx(
        _volume_pairing(xi, tau, z), abs=1e-11)
    assert float(pair_uhat_divdiv(dofs, skewed_map, xi)) == pytest.approx(
        _volume_pairing(xi, xi.div_rows(), z), abs=1e-11)


def test_enriched_trace_is_exact_for_cubics(rng, skewed_map):
    z = PolyField.random(FieldKind.SCALAR, 3, rng, amap=skewed_map)
    xi = PolyField.random(FieldKind.TENSOR, 4, rng, amap=skewed_map)
    tau = PolyField.random(FieldKind.VECTOR, 3, rng, amap=skewed_map)
    trace = _enriched_trace(skewed_map, z)
    assert float(pair_uhat_divdiv_vector(trace, skewed_map, xi, tau)) == pytest.approx(
        _volume_pairing(xi, tau, z), abs=1e-11)
    np.testing.assert_array_equal(trace.restrict(), local_trace_of(skewed_map, z))


def test_hermite_edge_trace_reproduces_cubic_values(skewed_map):
    z = PolyField.scalar({(2, 1): 1.0}, amap=skewed_map)
    dofs = local_trace_of(skewed_map, z)
    s = np.linspace(0.0, 1.0, 7)
    for k in range(3):
        trace = edge_trace(dofs, skewed_map, k, s)
        np.testing.assert_allclose(trace.value, z.values(reference_edge_points(k, s)), atol=1e-13)


def test_deflection_dofs_on_mesh(criss_cross_mesh):
    mesh = criss_cross_mesh
    dofs = DeflectionTraceDofs.sample(mesh, lambda p: p[:, 0] + p[:, 1], lambda p: np.ones((len(p), 2)))
    assert dofs.free_vector(mesh).tolist() == [1.0, 1.0, 1.0]
    boundary = dofs.boundary_only(mesh)
    assert np.all(boundary.as_array()[mesh.interior_vertices] == 0.0)
    np.testing.assert_array_equal(dofs.local(mesh, 0)[:3], dofs.as_array()[mesh.triangles[0, 0]])
    with pytest.raises(ValueError):
        edge_trace(np.zeros(7), mesh.affine_map(0), 0)
