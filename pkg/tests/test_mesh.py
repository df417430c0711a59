import numpy as np
import pytest

from mesh import (
    Domain, Mesh, SeedTriangulation, build_initial_mesh, genealogy, load_mesh, notched_square,
    polygon_area, prolongate, refine, refine_uniform, unit_square, unit_square_grid,
)
from utils.error_handler import MeshError


def _interior_edges(mesh):
    return np.flatnonzero(~mesh.edge_is_boundary)


def test_unit_square_counts(square_mesh):
    assert (square_mesh.n_vertices, square_mesh.n_edges, square_mesh.n_triangles) == (4, 5, 2)
    assert square_mesh.euler_characteristic() == 1
    assert square_mesh.n_interior_vertices == 0


def test_refinement_edge_is_longest(notched_mesh):
    X = notched_mesh.vertices[notched_mesh.triangles]
    lengths = np.linalg.norm(X[:, [1, 2, 0]] - X, axis=2)
    assert np.all(lengths[:, 1] >= lengths.max(axis=1) * (1.0 - 1e-12))


def test_normals_flip_across_interior_edges(fine_square_mesh):
    mesh = fine_square_mesh
    for e in _interior_edges(mesh):
        (tp, tm), (kp, km) = mesh.e2t[e], mesh.e2l[e]
        n_plus = mesh.edge_frame(tp, kp).normal
        n_minus = mesh.edge_frame(tm, km).normal
        np.testing.assert_allclose(n_plus, -n_minus, atol=1e-14)


def test_boundary_normals_point_outward(criss_cross_mesh):
    mesh = criss_cross_mesh
    for e in np.flatnonzero(mesh.edge_is_boundary):
        t, k = mesh.e2t[e, 0], mesh.e2l[e, 0]
        frame = mesh.edge_frame(t, k)
        midpoint = frame.endpoints.mean(axis=0)
        assert np.dot(midpoint - mesh.centroids[t], frame.normal) > 0


@pytest.mark.parametrize("factory", [unit_square, notched_square])
def test_area_is_preserved_by_refinement(factory):
    domain, seed = factory()
    mesh = build_initial_mesh(domain, seed)
    for _ in range(3):
        mesh = refine_uniform(mesh)
        assert mesh.areas.sum() == pytest.approx(polygon_area(domain.polygon), rel=1e-12)
    assert np.all(mesh.areas > 0)


def test_uniform_refinement_quadruples(criss_cross_mesh):
    fine = refine_uniform(criss_cross_mesh)
    assert fine.n_triangles == 4 * criss_cross_mesh.n_triangles
    np.testing.assert_allclose(np.sort(fine.areas), np.full(fine.n_triangles, 1.0 / 16.0))
    assert fine.h_max == pytest.approx(criss_cross_mesh.h_max / 2.0)


def test_nvb_keeps_shape_regularity(criss_cross_mesh, rng):
    mesh = criss_cross_mesh
    initial_angle = mesh.min_angles().min()
    for _ in range(6):
        marked = rng.choice(mesh.n_triangles, size=max(1, mesh.n_triangles // 4), replace=False)
        refined = refine(mesh, marked)
        family = genealogy(refined)
        assert all(len(family[int(t)]) >= 2 for t in marked)
        assert refined.euler_characteristic() == 1
        assert refined.areas.sum() == pytest.approx(1.0, rel=1e-12)
        mesh = refined
    assert mesh.min_angles().min() >= initial_angle - 1e-12


def test_refine_without_marks_is_identity(square_mesh):
    same = refine(square_mesh, [])
    np.testing.assert_array_equal(same.triangles, square_mesh.triangles)
    np.testing.assert_array_equal(same.parent, [0, 1])


def test_refine_rejects_unknown_element(square_mesh):
    with pytest.raises(ValueError):
        refine(square_mesh, [5])
    with pytest.raises(ValueError):
        refine(square_mesh, [0], rule="red-green")


def test_prolongate_follows_parents(square_mesh):
    fine = refine(square_mesh, [0])
    values = prolongate(np.array([1.0, 2.0]), fine)
    np.testing.assert_array_equal(values, np.array([1.0, 2.0])[fine.parent])


def test_clockwise_seed_is_rejected():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    domain = Domain("cw", verts)
    with pytest.raises(MeshError):
        build_initial_mesh(domain, SeedTriangulation(verts, np.array([[0, 2, 1]])))


def test_degenerate_seed_is_rejected():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(MeshError):
        build_initial_mesh(Domain("line", verts), SeedTriangulation(verts, np.array([[0, 1, 2]])))


def test_hanging_node_is_rejected():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [0.5, 0.5]])
    tris = np.array([[0, 1, 2], [1, 3, 4], [4, 3, 2]])
    domain, _ = unit_square()
    with pytest.raises(MeshError):
        build_initial_mesh(domain, SeedTriangulation(verts, tris))


def test_inconsistent_orientation_is_rejected():
    with pytest.raises(MeshError):
        Mesh(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
             np.array([[0, 1, 2], [0, 1, 3]]))


def test_dump_and_load(tmp_path, notched_mesh):
    mesh = refine(notched_mesh, [0, 2])
    path = mesh.dump(tmp_path / "mesh.txt")
    header = path.read_text(encoding="utf-8").split("\n")[0]
    assert header == f"{mesh.n_vertices} {mesh.n_edges} {mesh.n_triangles}"
    loaded = load_mesh(path)
    np.testing.assert_array_equal(loaded.triangles, mesh.triangles)
    np.testing.assert_array_equal(loaded.vertex_is_boundary, mesh.vertex_is_boundary)


def test_unit_square_grid_seed():
    mesh = build_initial_mesh(*unit_square_grid(4))
    assert (mesh.n_vertices, mesh.n_edges, mesh.n_triangles) == (25, 56, 32)
    assert mesh.n_interior_vertices == 9
    assert mesh.areas.sum() == pytest.approx(1.0, rel=1e-14)
    np.testing.assert_allclose(mesh.areas, 1.0 / 32.0, rtol=1e-12)
    with pytest.raises(ValueError):
        unit_square_grid(0)
