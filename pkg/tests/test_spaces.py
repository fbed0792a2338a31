import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unfittedfem.assembly import normal_jumps
from unfittedfem.errors import GeometryError
from unfittedfem.geometry import CUT, INTERIOR, ActiveMesh
from unfittedfem.mesh import build_crisscross
from unfittedfem.quadrature import map_triangles
from unfittedfem.spaces import (
    ScalarSpaceP1,
    VectorSpaceZ,
    build_scalar_space,
    build_vector_space,
    evaluate,
    interpolate_nodal,
)

from conftest import setup


def one_cell_mesh(kind=INTERIOR):
    bg = build_crisscross(2)
    level = -np.ones(bg.n_vertices)
    return ActiveMesh(bg, level.copy(), level, np.array([3]), np.array([kind], dtype=np.int8), 0.0)


def test_single_triangle_space():
    space = build_scalar_space(one_cell_mesh())
    assert space.n_dofs == 3
    np.testing.assert_allclose(space.grads.sum(axis=1), 0.0, atol=1e-14)


def test_vector_space_needs_cut_cells():
    with pytest.raises(GeometryError):
        build_vector_space(one_cell_mesh(INTERIOR))
    z = build_vector_space(one_cell_mesh(CUT))
    assert z.n_nodes == 3 and z.n_dofs == 6


@pytest.mark.parametrize("n", [16, 33])
def test_dof_counts_match_vertex_incidence(n):
    _, mesh, _, space, zspace = setup("flower", n)
    touched = set()
    cut_touched = set()
    for c, tri in enumerate(mesh.cell_vertices):
        touched.update(int(v) for v in tri)
        if mesh.kind[c] == CUT:
            cut_touched.update(int(v) for v in tri)
    assert space.n_dofs == len(touched)
    assert sorted(touched) == list(space.vertices)
    assert zspace.n_nodes == len(cut_touched)
    assert sorted(cut_touched) == list(zspace.vertices)
    np.testing.assert_array_equal(np.unique(space.cell_dofs), np.arange(space.n_dofs))


def test_partition_of_unity():
    _, mesh, _, space, _ = setup("flower", 16)
    np.testing.assert_allclose(space.grads.sum(axis=1), 0.0, atol=1e-12)
    rng = np.random.default_rng(0)
    cells = rng.integers(0, mesh.n_cells, 50)
    w = rng.dirichlet(np.ones(3), 50)
    pts = np.einsum("ck,ckd->cd", w, mesh.cell_coords[cells])
    lam = space.barycentric(cells, pts)
    np.testing.assert_allclose(lam.sum(axis=1), 1.0, atol=1e-14)
    np.testing.assert_allclose(lam, w, atol=1e-12)


def test_interpolation_examples():
    _, mesh, _, space, _ = setup("flower", 16)
    np.testing.assert_array_equal(interpolate_nodal(space, lambda x, y: 1.0), np.ones(space.n_dofs))
    u = interpolate_nodal(space, lambda x, y: x)
    np.testing.assert_array_equal(u, space.coords[:, 0])
    g = space.cell_gradient(u)
    np.testing.assert_allclose(g, np.tile([1.0, 0.0], (mesh.n_cells, 1)), atol=1e-12)


def _interp_error(n):
    _, mesh, _, space, _ = setup("flower", n)
    u = interpolate_nodal(space, lambda x, y: np.sin(x) * np.exp(y))
    pts, w, _ = map_triangles(mesh.cell_coords, 4)
    cells = np.broadcast_to(np.arange(mesh.n_cells)[:, None], pts.shape[:2])
    e = np.sin(pts[..., 0]) * np.exp(pts[..., 1]) - space.values_at(u, cells, pts)
    return np.sqrt(np.sum(w * e * e))


def test_interpolation_error_is_second_order():
    ratio = _interp_error(16) / _interp_error(32)
    assert 3.5 < ratio < 4.5


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 10**6))
def test_linear_reproduction(a, b, c, seed):
    _, mesh, _, space, _ = setup("flower", 16)
    u = interpolate_nodal(space, lambda x, y: a + b * x + c * y)
    rng = np.random.default_rng(seed)
    cell = int(rng.integers(mesh.n_cells))
    w = rng.dirichlet(np.ones(3))
    p = w @ mesh.cell_coords[cell]
    val, grad = evaluate(space, u, cell, p)
    assert val == pytest.approx(a + b * p[0] + c * p[1], abs=1e-13 * (1 + abs(a) + abs(b) + abs(c)))
    np.testing.assert_allclose(grad, [b, c], atol=1e-12 * (1 + abs(b) + abs(c)))


def test_linear_fields_have_no_jumps():
    _, mesh, _, space, _ = setup("flower", 16)
    u = interpolate_nodal(space, lambda x, y: 1 + 2 * x - 3 * y)
    internal = np.flatnonzero(mesh.facets.right >= 0)
    assert np.max(np.abs(normal_jumps(space, u, internal))) < 1e-12


def test_evaluate_examples():
    _, mesh, _, space, _ = setup("flower", 16)
    rng = np.random.default_rng(3)
    coeffs = rng.standard_normal(space.n_dofs)
    cell = 7
    local = coeffs[space.cell_dofs[cell]]
    val, _ = evaluate(space, coeffs, cell, mesh.cell_coords[cell][1])
    assert val == pytest.approx(local[1], abs=1e-14)
    val, _ = evaluate(space, coeffs, cell, mesh.cell_coords[cell].mean(axis=0))
    assert val == pytest.approx(local.mean(), abs=1e-14)
    with pytest.raises(ValueError):
        evaluate(space, coeffs, cell, mesh.cell_coords[cell][0] + 10.0)


def test_vector_interpolation_layout():
    _, _, _, _, z = setup("flower", 16)
    v = z.interpolate(lambda x, y: (x, 2 * y))
    np.testing.assert_array_equal(v[: z.n_nodes], z.coords[:, 0])
    np.testing.assert_array_equal(v[z.n_nodes:], 2 * z.coords[:, 1])
    assert isinstance(z, VectorSpaceZ) and isinstance(setup("flower", 16)[3], ScalarSpaceP1)
