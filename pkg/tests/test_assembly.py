import numpy as np
import pytest
import scipy.sparse as sp

from unfittedfem.assembly import (
    SchemeParams,
    assemble_dirichlet,
    assemble_neumann,
    assemble_robin,
    combine_dirichlet,
    combine_flux,
    ghost_penalty,
    lumped_masses,
)
from unfittedfem.errors import AssemblyError
from unfittedfem.geometry import BoundaryDiscretization
from unfittedfem.solver import solve_direct
from unfittedfem.spaces import interpolate_nodal

from conftest import setup

DIRICHLET_PARAMS = SchemeParams(gamma=1.0, sigma=0.01)
NEUMANN_PARAMS = SchemeParams(gamma_div=1.0, gamma_1=10.0, sigma=0.01)


def dense(A):
    return A.toarray() if sp.issparse(A) else np.asarray(A)


@pytest.mark.parametrize("n", [16, 33])
def test_dirichlet_patch(n):
    p, mesh, bdry, V, _ = setup("flower", n, "linear")
    system = assemble_dirichlet(p, mesh, bdry, V, DIRICHLET_PARAMS)
    assert not system.symmetric and system.n == V.n_dofs
    u = solve_direct(system).solution
    assert np.max(np.abs(u - interpolate_nodal(V, p.exact_u))) < 1e-10


@pytest.mark.parametrize("n", [16, 33])
def test_neumann_patch(n):
    p, mesh, bdry, V, Z = setup("flower", n, "linear")
    system = assemble_neumann(p, mesh, bdry, V, Z, NEUMANN_PARAMS)
    assert system.constraint_rows == 1
    assert system.n == V.n_dofs + Z.n_dofs + 1
    u, y, lam = system.split(solve_direct(system).solution)
    m = lumped_masses(V)
    ue = interpolate_nodal(V, p.exact_u)
    ue -= m @ ue / m.sum()
    assert np.max(np.abs(u - ue)) < 1e-9
    gx, gy = p.grad_u(0.0, 0.0)
    assert np.max(np.abs(y[: Z.n_nodes] + gx)) < 1e-9
    assert np.max(np.abs(y[Z.n_nodes:] + gy)) < 1e-9
    assert abs(lam[0]) < 1e-9


@pytest.mark.parametrize("n", [16, 33])
def test_robin_patch(n):
    p, mesh, bdry, V, Z = setup("flower", n, "linear")
    system = assemble_robin(p, mesh, bdry, V, Z, NEUMANN_PARAMS)
    assert system.constraint_rows == 0 and system.n == V.n_dofs + Z.n_dofs
    u, y, _ = system.split(solve_direct(system).solution)
    assert np.max(np.abs(u - interpolate_nodal(V, p.exact_u))) < 1e-9


def test_lumped_masses_are_exact_p1_integrals():
    _, mesh, _, V, _ = setup("flower", 16)
    m = lumped_masses(V)
    assert m.sum() == pytest.approx(mesh.area, rel=1e-14)
    # integral of x over the active domain two ways
    x = V.coords[:, 0]
    centroid_x = mesh.cell_coords[..., 0].mean(axis=1)
    assert m @ x == pytest.approx(np.sum(mesh.cell_areas * centroid_x), abs=1e-15)


def test_neumann_mean_constraint_holds():
    p, mesh, bdry, V, Z = setup("flower", 32)
    system = assemble_neumann(p, mesh, bdry, V, Z, NEUMANN_PARAMS)
    report = solve_direct(system)
    assert report.residual_norm < 1e-10
    u, _, _ = system.split(report.solution)
    assert abs(lumped_masses(V) @ u) < 1e-10 * np.linalg.norm(u)


def test_robin_solvable_flower():
    p, mesh, bdry, V, Z = setup("flower", 32)
    report = solve_direct(assemble_robin(p, mesh, bdry, V, Z, NEUMANN_PARAMS))
    assert report.residual_norm < 1e-10


def test_neumann_kernel_without_constraint():
    p, mesh, bdry, V, Z = setup("flower", 16)
    system = assemble_neumann(p, mesh, bdry, V, Z, NEUMANN_PARAMS)
    n = system.n - 1
    A = system.matrix[:n, :n]
    e = np.zeros(n)
    e[: V.n_dofs] = 1.0
    assert np.linalg.norm(A @ e) < 1e-12 * sp.linalg.norm(A)


def test_dirichlet_coercive_on_random_vectors(rng):
    p, mesh, bdry, V, _ = setup("flower", 16)
    A = assemble_dirichlet(p, mesh, bdry, V, DIRICHLET_PARAMS).matrix
    for _ in range(100):
        v = rng.standard_normal(V.n_dofs)
        assert v @ (A @ v) > 0


def test_dirichlet_parameter_linearity():
    p, mesh, bdry, V, _ = setup("flower", 16)
    h = mesh.h
    system = assemble_dirichlet(p, mesh, bdry, V, DIRICHLET_PARAMS)
    t = system.terms
    bare = combine_dirichlet(t, SchemeParams(gamma=0.0, sigma=0.0), h)
    expected = system.matrix - (1.0 / h) * t["boundary_mass"] - (0.01 * h) * t["ghost"]
    assert abs(bare - expected).max() < 1e-12 * abs(system.matrix).max()
    # two-point extrapolation in each parameter
    for name in ("gamma", "sigma"):
        a = combine_dirichlet(t, SchemeParams(**{name: 1.0}), h)
        b = combine_dirichlet(t, SchemeParams(**{name: 2.0}), h)
        c = combine_dirichlet(t, SchemeParams(**{name: 5.0}), h)
        assert abs(a + 4.0 * (b - a) - c).max() < 1e-12 * abs(c).max()


def test_flux_parameter_linearity():
    p, mesh, bdry, V, Z = setup("flower", 16)
    h = mesh.h
    t = assemble_robin(p, mesh, bdry, V, Z, NEUMANN_PARAMS).terms
    for name, values in (("gamma_div", (1.0, 2.0, 5.0)), ("gamma_1", (1.0, 2.0, 5.0)),
                         ("sigma", (0.1, 0.2, 0.5))):
        a, b, c = (combine_flux(t, SchemeParams(**{name: v}), h, robin=True) for v in values)
        s = (values[2] - values[0]) / (values[1] - values[0])
        assert abs(a + s * (b - a) - c).max() < 1e-12 * abs(c).max()
    # affine in 1/kappa
    a, b, c = (combine_flux(t, SchemeParams(kappa=k), h, robin=True) for k in (1.0, 0.5, 0.2))
    assert abs(a + 4.0 * (b - a) - c).max() < 1e-12 * abs(c).max()


def test_graddiv_h_squared_scaling():
    p, mesh, bdry, V, Z = setup("flower", 16)
    h = mesh.h
    t = assemble_robin(p, mesh, bdry, V, Z, NEUMANN_PARAMS).terms
    scaled = combine_flux(t, SchemeParams(gamma_div=10.0, graddiv_scaling="h_squared"), h)
    plain = combine_flux(t, SchemeParams(gamma_div=10.0 * h * h), h)
    assert abs(scaled - plain).max() < 1e-14 * abs(plain).max()


def test_robin_minus_neumann_is_boundary_mass():
    p, mesh, bdry, V, Z = setup("flower", 16)
    kappa = 1e8
    params = SchemeParams(kappa=kappa)
    rob = assemble_robin(p, mesh, bdry, V, Z, params)
    neu = assemble_neumann(p, mesh, bdry, V, Z, params)
    n = rob.n
    diff = rob.matrix - neu.matrix[:n, :n]
    expected = (1.0 / kappa) * rob.terms["boundary_mass"]
    assert abs(diff - expected).max() < 1e-14 * abs(rob.matrix).max()


def test_ghost_blocks_positive_semidefinite(rng):
    _, mesh, _, V, _ = setup("flower", 16)
    for facets in (mesh.facets.f_gamma, mesh.facets.gamma_h_int):
        G = ghost_penalty(V, facets)
        assert abs(G - G.T).max() < 1e-14 * abs(G).max()
        for _ in range(50):
            v = rng.standard_normal(V.n_dofs)
            assert v @ (G @ v) >= -1e-12
        assert np.linalg.eigvalsh(dense(G)).min() > -1e-10 * abs(G).max()


def test_boundary_terms_exact_for_polynomials():
    p, mesh, bdry, V, _ = setup("disk", 32)
    t = assemble_dirichlet(p, mesh, bdry, V, DIRICHLET_PARAMS).terms
    one = np.ones(V.n_dofs)
    assert one @ (t["boundary_mass"] @ one) == pytest.approx(bdry.total_length, rel=1e-13)
    # int_Gamma x * y over segments, quadrature order 2 is exact for P1 x P1
    x = V.coords[:, 0]
    y = V.coords[:, 1]
    a, b = bdry.p0, bdry.p1
    exact = np.sum(bdry.length * (a[:, 0] * a[:, 1] / 3 + b[:, 0] * b[:, 1] / 3
                                  + (a[:, 0] * b[:, 1] + b[:, 0] * a[:, 1]) / 6))
    assert x @ (t["boundary_mass"] @ y) == pytest.approx(exact, rel=1e-12)
    # divergence theorem on the active domain: int_{Gamma_h} dx/dn = length-weighted n_x sum = 0
    assert abs(one @ (t["active_flux"] @ x)) < 1e-13


def test_linear_system_split_and_dump(tmp_path):
    p, mesh, bdry, V, Z = setup("flower", 16)
    system = assemble_neumann(p, mesh, bdry, V, Z, NEUMANN_PARAMS)
    x = np.arange(system.n, dtype=float)
    u, y, extra = system.split(x)
    assert len(u) == V.n_dofs and len(y) == Z.n_dofs and len(extra) == 1
    path = tmp_path / "A.txt"
    system.dump(path)
    rows = np.loadtxt(path)
    A = sp.coo_matrix((rows[:, 2], (rows[:, 0].astype(int), rows[:, 1].astype(int))), shape=system.matrix.shape)
    assert abs(A - system.matrix).max() == 0.0


def test_duplicate_triplets_summed():
    from unfittedfem.assembly import sparse
    A = sparse(np.array([0, 0, 1]), np.array([1, 1, 0]), np.array([1.0, 2.0, 4.0]), (2, 2))
    np.testing.assert_array_equal(A.toarray(), [[0.0, 3.0], [4.0, 0.0]])


def test_assembly_deterministic():
    p, mesh, bdry, V, Z = setup("flower", 16)
    a = assemble_neumann(p, mesh, bdry, V, Z, NEUMANN_PARAMS)
    b = assemble_neumann(p, mesh, bdry, V, Z, NEUMANN_PARAMS)
    assert (a.matrix != b.matrix).nnz == 0
    np.testing.assert_array_equal(a.rhs, b.rhs)


def test_parameter_validation():
    p, mesh, bdry, V, Z = setup("flower", 16)
    with pytest.raises(AssemblyError):
        SchemeParams(sigma=-1.0)
    with pytest.raises(AssemblyError):
        SchemeParams(graddiv_scaling="cubic")
    with pytest.raises(AssemblyError):
        assemble_dirichlet(p, mesh, bdry, V, SchemeParams(gamma=0.0))
    with pytest.raises(AssemblyError):
        assemble_neumann(p, mesh, bdry, V, Z, SchemeParams(gamma_1=0.0))
    with pytest.raises(AssemblyError):
        assemble_robin(p, mesh, bdry, V, Z, SchemeParams(kappa=0.0))
    empty = BoundaryDiscretization(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0),
                                   np.zeros(0, dtype=int))
    with pytest.raises(AssemblyError):
        assemble_dirichlet(p, mesh, empty, V, DIRICHLET_PARAMS)
