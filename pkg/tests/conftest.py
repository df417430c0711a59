import numpy as np
import pytest

from mesh import AffineMap, build_initial_mesh, criss_cross_square, notched_square, refine_uniform, unit_square
from poly import FieldKind, PolyField, eval_monomials


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def square_mesh():
    return build_initial_mesh(*unit_square())


@pytest.fixture
def criss_cross_mesh():
    return build_initial_mesh(*criss_cross_square())


@pytest.fixture
def fine_square_mesh(criss_cross_mesh):
    return refine_uniform(criss_cross_mesh)


@pytest.fixture
def notched_mesh():
    return build_initial_mesh(*notched_square())


@pytest.fixture
def skewed_map():
    return AffineMap.from_vertices(np.array([[0.2, 0.1], [1.3, 0.4], [0.5, 1.2]]))


def compose(func, amap, degree):
    """全局多项式 func 在单元上的复合系数场（主格点插值，对 degree 次多项式精确）"""
    pts = np.array([(i / degree, j / degree) for i in range(degree + 1) for j in range(degree + 1 - i)])
    V = eval_monomials(degree, pts)
    coeffs = np.linalg.solve(V, func(amap.to_physical(pts)))
    return PolyField(FieldKind.SCALAR, degree, coeffs[None, :], amap)
