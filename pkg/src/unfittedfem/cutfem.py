"""Classical CutFEM baselines that integrate over the clipped cut cells.

Volume terms run over the polygonal domain (exact clipping of each cut
cell by the linear interpolant of the level set); boundary terms use the
same boundary segments as the cut-free schemes.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .assembly import (
    LinearSystem,
    SchemeParams,
    append_mean_constraint,
    boundary_load,
    boundary_mass,
    boundary_normal_trace,
    ghost_penalty,
    lumped_masses,
    segment_quadrature,
    sparse,
    stiffness,
)
from .errors import AssemblyError
from .quadrature import map_triangles

VARIANTS = ("lagrange_p0", "nitsche_sym", "nitsche_asym", "neumann")

#: stabilization values used with each variant by default
DEFAULT_PARAMS = {
    "lagrange_p0": SchemeParams(sigma=0.01),
    "nitsche_sym": SchemeParams(gamma=5.0, sigma=0.1),
    "nitsche_asym": SchemeParams(gamma=1.0, sigma=0.01),
    "neumann": SchemeParams(sigma=0.01),
}


def domain_stiffness(space):
    """``int_Omega grad u . grad v``: P1 gradients are constant, so clipped areas suffice."""
    return stiffness(space, areas=space.mesh.clipped_areas)


def domain_load(space, f, degree=2):
    tri, owner = space.mesh.inside_triangles
    pts, w, _ = map_triangles(tri, degree)
    lam = space.barycentric(np.broadcast_to(owner[:, None], pts.shape[:2]), pts)
    local = np.einsum("tq,tqi->ti", f(pts[..., 0], pts[..., 1]) * w, lam)
    return np.bincount(space.cell_dofs[owner].ravel(), weights=local.ravel(), minlength=space.n_dofs)


def assemble_cutfem(problem, mesh, bdry, space, variant, params: SchemeParams = None) -> LinearSystem:
    if variant not in VARIANTS:
        raise AssemblyError(f"unknown CutFEM variant {variant!r}; known: {VARIANTS}")
    params = DEFAULT_PARAMS[variant] if params is None else params
    h = mesh.h
    sq = segment_quadrature(space, bdry)
    K = domain_stiffness(space)
    load = domain_load(space, problem.f)
    pts = sq["points"]
    reg = mesh.facets

    if variant in ("nitsche_sym", "nitsche_asym"):
        N = boundary_normal_trace(space, sq)  # row v: int u dv/dn
        M = boundary_mass(space, sq)
        G = ghost_penalty(space, reg.f_gamma)
        g = problem.g_dirichlet(pts[..., 0], pts[..., 1])
        sign = -1.0 if variant == "nitsche_sym" else 1.0
        A = (K - N.T + sign * N + (params.gamma / h) * M + (params.sigma * h) * G).tocsr()
        rhs = (load + sign * boundary_load(space, sq, g, normal_derivative=True)
               + (params.gamma / h) * boundary_load(space, sq, g))
        return LinearSystem(matrix=A, rhs=rhs, n_u=space.n_dofs,
                            symmetric=variant == "nitsche_sym",
                            terms={"stiffness": K, "trace_normal": N, "boundary_mass": M, "ghost": G})

    if variant == "neumann":
        G = ghost_penalty(space, reg.f_gamma)
        A = (K + (params.sigma * h) * G).tocsr()
        g = problem.g_neumann(pts[..., 0], pts[..., 1],
                              np.broadcast_to(bdry.normal[:, None, :], pts.shape))
        rhs = load + boundary_load(space, sq, g)
        A, rhs = append_mean_constraint(A, rhs, lumped_masses(space))
        return LinearSystem(matrix=A, rhs=rhs, n_u=space.n_dofs, constraint_rows=1,
                            symmetric=True, terms={"stiffness": K, "ghost": G})

    # P0 multipliers, one per cut cell (= one per boundary segment)
    nu = space.n_dofs
    ns = len(bdry)
    basis_int = np.einsum("sq,sqi->si", sq["weights"], sq["lam"])
    C = sparse(np.broadcast_to(np.arange(ns)[:, None], basis_int.shape), sq["dofs"], basis_int, (ns, nu))
    slot = np.full(mesh.n_cells, -1, dtype=np.int64)
    slot[bdry.cell] = np.arange(ns)
    fc = reg.f_gamma_cut
    pair = np.column_stack([slot[reg.left[fc]], slot[reg.right[fc]]])
    jump = np.array([1.0, -1.0])
    local = reg.length[fc][:, None, None] * jump[None, :, None] * jump[None, None, :]
    J = sparse(np.broadcast_to(pair[:, :, None], local.shape),
               np.broadcast_to(pair[:, None, :], local.shape), local, (ns, ns))
    A = sp.bmat([[K, C.T], [C, -(params.sigma * h) * J]], format="csr")
    g = problem.g_dirichlet(pts[..., 0], pts[..., 1])
    rhs = np.concatenate([load, (g * sq["weights"]).sum(axis=1)])
    return LinearSystem(matrix=A, rhs=rhs, n_u=nu, n_multipliers=ns, symmetric=True,
                        terms={"stiffness": K, "coupling": C, "multiplier_jump": J})
