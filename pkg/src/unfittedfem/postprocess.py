"""Error norms over the physical domain, triple norms and consistency diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import (
    active_boundary_flux,
    boundary_mass,
    boundary_normal_trace,
    ghost_penalty,
    normal_jumps,
    segment_quadrature,
    stiffness,
)
from .geometry import facet_outside_parts
from .quadrature import map_segments, map_triangles

ERROR_DEGREE = 4


@dataclass
class ErrorReport:
    l2_rel: float
    h1_rel: float
    l2_meanfree_rel: float
    gamma_l2: float
    triple_norm: float


def _inside_quadrature(space, degree=ERROR_DEGREE):
    tri, owner = space.mesh.inside_triangles
    pts, w, _ = map_triangles(tri, degree)
    cells = np.broadcast_to(owner[:, None], pts.shape[:2])
    return pts, w, cells, owner


def error_norms(problem, u_h, space, y_h=None, zspace=None, scheme="dirichlet") -> ErrorReport:
    """Relative errors of a P1 solution against the exact solution, over the polygonal domain.

    ``triple_norm`` is the energy norm of the error that matches ``scheme``
    (``"neumann"``/``"robin"`` need ``y_h`` and ``zspace``).
    """
    pts, w, cells, owner = _inside_quadrature(space)
    x, y = pts[..., 0], pts[..., 1]
    u = problem.exact_u(x, y)
    ux, uy = problem.grad_u(x, y)
    uh = space.values_at(u_h, cells, pts)
    gh = space.cell_gradient(u_h)[owner]
    e = u - uh
    ex = ux - gh[:, None, 0]
    ey = uy - gh[:, None, 1]

    area = w.sum()
    u2 = np.sum(w * u * u)
    c = np.sum(w * e) / area
    l2 = np.sqrt(np.sum(w * e * e) / u2)
    l2_mf = np.sqrt(np.sum(w * (e - c) ** 2) / u2)
    h1 = np.sqrt(np.sum(w * (ex * ex + ey * ey)) / np.sum(w * (ux * ux + uy * uy)))

    bdry = space.mesh.boundary
    spts, sw, _ = map_segments(bdry.p0, bdry.p1, 3)
    scells = np.broadcast_to(bdry.cell[:, None], spts.shape[:2])
    eg = problem.exact_u(spts[..., 0], spts[..., 1]) - space.values_at(u_h, scells, spts)
    gamma_l2 = np.sqrt(np.sum(sw * eg * eg))

    if scheme in ("neumann", "robin"):
        triple = _triple_error_neumann(problem, u_h, y_h, space, zspace)
    else:
        triple = _triple_error_dirichlet(problem, u_h, space, gamma_l2)
    return ErrorReport(float(l2), float(h1), float(min(l2_mf, l2)), float(gamma_l2), float(triple))


def _grad_error_active(problem, u_h, space, cells=None):
    mesh = space.mesh
    cells = np.arange(mesh.n_cells) if cells is None else cells
    pts, w, _ = map_triangles(mesh.cell_coords[cells], ERROR_DEGREE)
    ux, uy = problem.grad_u(pts[..., 0], pts[..., 1])
    gh = space.cell_gradient(u_h, cells)
    return pts, w, ux - gh[:, None, 0], uy - gh[:, None, 1]


def _triple_error_dirichlet(problem, u_h, space, gamma_l2):
    _, w, ex, ey = _grad_error_active(problem, u_h, space)
    return np.sqrt(np.sum(w * (ex * ex + ey * ey)) + gamma_l2**2 / space.mesh.h)


def _triple_error_neumann(problem, u_h, y_h, space, zspace):
    mesh = space.mesh
    _, w, ex, ey = _grad_error_active(problem, u_h, space)
    semi = np.sum(w * (ex * ex + ey * ey))
    # flux error e_y = -grad u - y_h: div e_y = f - div y_h, e_y + grad e_u = -(y_h + grad u_h)
    cut = zspace.cells
    pts, wc, bary = map_triangles(mesh.cell_coords[cut], ERROR_DEGREE)
    nz = zspace.n_nodes
    nodes = zspace.cell_nodes[zspace.slot_of_cell[cut]]
    yx, yy = y_h[:nz][nodes], y_h[nz:][nodes]
    g = space.grads[cut]
    div_y = np.einsum("ck,ck->c", yx, g[:, :, 0]) + np.einsum("ck,ck->c", yy, g[:, :, 1])
    fq = problem.f(pts[..., 0], pts[..., 1])
    div_term = np.sum(wc * (fq - div_y[:, None]) ** 2)
    gh = space.cell_gradient(u_h, cut)
    sx = np.einsum("qk,ck->cq", bary, yx) + gh[:, None, 0]
    sy = np.einsum("qk,ck->cq", bary, yy) + gh[:, None, 1]
    match = np.sum(wc * (sx * sx + sy * sy))
    fac = mesh.facets.gamma_h_int
    jumps = normal_jumps(space, u_h, fac)
    jump_term = mesh.h * np.sum(mesh.facets.length[fac] * jumps**2)
    return np.sqrt(semi + div_term + match + jump_term)


def triple_norm_dirichlet(v, space, bdry=None):
    """``sqrt(|v|_{1,Omega_h}^2 + ||v||_{0,Gamma}^2 / h)`` for a P1 coefficient vector."""
    bdry = space.mesh.boundary if bdry is None else bdry
    sq = segment_quadrature(space, bdry)
    K = stiffness(space)
    M = boundary_mass(space, sq)
    return float(np.sqrt(max(v @ (K @ v) + (v @ (M @ v)) / space.mesh.h, 0.0)))


def triple_norm_neumann(v, z, space, zspace):
    """Energy norm of the pair ``(v, z)`` in the mixed Neumann setting.

    ``|v|_1^2 + ||div z||^2 + ||z + grad v||^2`` (the last two on cut cells)
    plus ``h ||[dv/dn]||^2`` on the cut/interior interface facets.
    """
    mesh = space.mesh
    semi = v @ (stiffness(space) @ v)
    cut = zspace.cells
    nz = zspace.n_nodes
    nodes = zspace.cell_nodes[zspace.slot_of_cell[cut]]
    zx, zy = z[:nz][nodes], z[nz:][nodes]
    g = space.grads[cut]
    area = space.areas[cut]
    div = np.einsum("ck,ck->c", zx, g[:, :, 0]) + np.einsum("ck,ck->c", zy, g[:, :, 1])
    gv = space.cell_gradient(v, cut)
    mass = (np.ones((3, 3)) + np.eye(3)) / 12.0
    match = 0.0
    for comp, zc in ((0, zx), (1, zy)):
        w = zc + gv[:, comp, None]  # P1 nodal values of z_c + d_c v on each cell
        match += np.sum(area * np.einsum("ci,ij,cj->c", w, mass, w))
    fac = mesh.facets.gamma_h_int
    jumps = normal_jumps(space, v, fac)
    total = semi + np.sum(area * div**2) + match + mesh.h * np.sum(mesh.facets.length[fac] * jumps**2)
    return float(np.sqrt(max(total, 0.0)))


def ibp_identity(v, space, bdry=None):
    """Both sides of the strip identity for a P1 function ``v``.

    Left: ``int_{Gamma_h} dv/dn v - int_Gamma dv/dn v``.
    Right: ``int_{B_h} |grad v|^2 - sum_F int_{F cap B_h} v [dv/dn]`` over
    the internal facets owned by cut cells, with ``B_h`` the strip between
    the polygonal boundary and the active-domain boundary.
    """
    mesh = space.mesh
    bdry = mesh.boundary if bdry is None else bdry
    sq = segment_quadrature(space, bdry)
    lhs = v @ (active_boundary_flux(space) @ v) - v @ (boundary_normal_trace(space, sq) @ v)

    tri, owner = mesh.outside_triangles
    d1 = tri[:, 1] - tri[:, 0]
    d2 = tri[:, 2] - tri[:, 0]
    areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    g = space.cell_gradient(v)
    strip = np.sum(areas * np.einsum("cd,cd->c", g[owner], g[owner]))

    fac = mesh.facets.f_gamma
    p0, p1 = facet_outside_parts(mesh, fac)
    pts, w, _ = map_segments(p0, p1, 2)
    cells = np.broadcast_to(mesh.facets.left[fac][:, None], pts.shape[:2])
    vals = space.values_at(v, cells, pts)
    jumps = normal_jumps(space, v, fac)
    facet_term = np.sum(np.sum(w * vals, axis=1) * jumps)
    return float(lhs), float(strip - facet_term)


def convergence_slope(points) -> float:
    """Least-squares slope of log(error) against log(h)."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 3:
        raise ValueError("need at least 3 (h, error) pairs")
    if np.any(pts <= 0):
        raise ValueError("h and error values must be positive")
    slope, _ = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)
    return float(slope)
