"""Linear systems of the cut-free fictitious-domain schemes.

No integral here runs over the physical domain or over parts of cut cells:
volume terms use whole active cells, boundary terms use the polygonal
boundary segments, and the ghost penalty uses full mesh facets.

Each scheme is the weighted sum of a few parameter-free term matrices
(``dirichlet_terms``, ``flux_terms``), which keeps the parameter dependence
explicit and lets diagnostics reuse the same blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from .errors import AssemblyError
from .quadrature import map_segments, map_triangles
from .spaces import ScalarSpaceP1, VectorSpaceZ

SEGMENT_ORDER = 2
VOLUME_DEGREE = 2


@dataclass(frozen=True)
class SchemeParams:
    gamma: float = 1.0
    sigma: float = 0.01
    gamma_div: float = 1.0
    gamma_1: float = 10.0
    kappa: float = 1.0
    graddiv_scaling: str = "constant"  # or "h_squared"

    def __post_init__(self):
        for name in ("gamma", "sigma", "gamma_div", "gamma_1", "kappa"):
            if getattr(self, name) < 0:
                raise AssemblyError(f"{name} must be >= 0")
        if self.graddiv_scaling not in ("constant", "h_squared"):
            raise AssemblyError(f"unknown graddiv scaling {self.graddiv_scaling!r}")

    def effective_gamma_div(self, h):
        return self.gamma_div * h * h if self.graddiv_scaling == "h_squared" else self.gamma_div


@dataclass(eq=False)
class LinearSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    n_u: int
    n_y: int = 0
    constraint_rows: int = 0
    symmetric: bool = False
    n_multipliers: int = 0  # P0 multipliers of the Lagrange CutFEM variant
    terms: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.matrix.shape[0]

    def split(self, x):
        """Split a solution vector into ``(u, y, extra)``."""
        u = x[: self.n_u]
        y = x[self.n_u : self.n_u + self.n_y]
        return u, y, x[self.n_u + self.n_y :]

    def dump(self, path):
        """Write the matrix in coordinate text format, one ``i j value`` per line."""
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            for i, j, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{int(i)} {int(j)} {float(v)!r}\n")


def sparse(rows, cols, vals, shape):
    """Triplets to CSR; duplicates are summed."""
    m = sp.coo_matrix(
        (np.ravel(vals), (np.ravel(rows), np.ravel(cols))), shape=shape
    ).tocsr()
    m.sum_duplicates()
    return m


def _local(dofs_a, dofs_b, vals):
    """Broadcast per-entity local matrices (E, a, b) to triplets."""
    rows = np.broadcast_to(dofs_a[:, :, None], vals.shape)
    cols = np.broadcast_to(dofs_b[:, None, :], vals.shape)
    return rows, cols, vals


# --- scalar P1 building blocks ------------------------------------------------


def stiffness(space: ScalarSpaceP1, cells=None, areas=None):
    """``int grad u . grad v`` over whole cells (or given partial ``areas``)."""
    cells = np.arange(space.mesh.n_cells) if cells is None else np.asarray(cells)
    g = space.grads[cells]
    a = space.areas[cells] if areas is None else np.asarray(areas)
    local = a[:, None, None] * np.einsum("cid,cjd->cij", g, g)
    d = space.cell_dofs[cells]
    n = space.n_dofs
    return sparse(*_local(d, d, local), (n, n))


def segment_quadrature(space: ScalarSpaceP1, bdry, order=SEGMENT_ORDER):
    """Quadrature on the boundary segments with parent-cell basis values.

    Returns a dict with points (S,q,2), weights (S,q), basis values
    ``lam`` (S,q,3), ``dofs`` (S,3), gradients ``grads`` (S,3,2), normals.
    """
    pts, w, _ = map_segments(bdry.p0, bdry.p1, order)
    cells = bdry.cell
    lam = space.barycentric(np.broadcast_to(cells[:, None], pts.shape[:2]), pts)
    return {
        "points": pts,
        "weights": w,
        "lam": lam,
        "dofs": space.cell_dofs[cells],
        "grads": space.grads[cells],
        "normal": bdry.normal,
    }


def boundary_mass(space, sq):
    """``int_Gamma u v``."""
    local = np.einsum("sq,sqi,sqj->sij", sq["weights"], sq["lam"], sq["lam"])
    n = space.n_dofs
    return sparse(*_local(sq["dofs"], sq["dofs"], local), (n, n))


def boundary_normal_trace(space, sq):
    """Row ``v``, column ``u``: ``int_Gamma u dv/dn`` (its transpose is ``int_Gamma du/dn v``)."""
    dn = np.einsum("sid,sd->si", sq["grads"], sq["normal"])
    mean = np.einsum("sq,sqj->sj", sq["weights"], sq["lam"])
    local = dn[:, :, None] * mean[:, None, :]
    n = space.n_dofs
    return sparse(*_local(sq["dofs"], sq["dofs"], local), (n, n))


def _facet_cell_quadrature(space, facets, side="left", order=SEGMENT_ORDER):
    reg = space.mesh.facets
    ids = reg.vertices[facets]
    a = space.mesh.bg.vertices[ids[:, 0]]
    b = space.mesh.bg.vertices[ids[:, 1]]
    pts, w, _ = map_segments(a, b, order)
    cells = reg.left[facets] if side == "left" else reg.right[facets]
    lam = space.barycentric(np.broadcast_to(cells[:, None], pts.shape[:2]), pts)
    return pts, w, lam, cells


def active_boundary_flux(space, facets=None):
    """Row ``v``, column ``u``: ``int_{Gamma_h} du/dn v`` with the incident cell's gradient."""
    reg = space.mesh.facets
    facets = reg.gamma_h if facets is None else facets
    _, w, lam, cells = _facet_cell_quadrature(space, facets)
    dn = np.einsum("fjd,fd->fj", space.grads[cells], reg.normal[facets])
    mean = np.einsum("fq,fqi->fi", w, lam)
    local = mean[:, :, None] * dn[:, None, :]
    d = space.cell_dofs[cells]
    n = space.n_dofs
    return sparse(*_local(d, d, local), (n, n))


def ghost_penalty(space, facets):
    """``sum_E int_E [du/dn][dv/dn]`` over the given internal facets (no scaling)."""
    reg = space.mesh.facets
    facets = np.asarray(facets)
    left = reg.left[facets]
    right = reg.right[facets]
    nrm = reg.normal[facets]
    jl = np.einsum("fjd,fd->fj", space.grads[left], nrm)
    jr = -np.einsum("fjd,fd->fj", space.grads[right], nrm)
    jump = np.concatenate([jl, jr], axis=1)
    dofs = np.concatenate([space.cell_dofs[left], space.cell_dofs[right]], axis=1)
    local = reg.length[facets][:, None, None] * jump[:, :, None] * jump[:, None, :]
    n = space.n_dofs
    return sparse(*_local(dofs, dofs, local), (n, n))


def normal_jumps(space, coeffs, facets):
    """Jump of the normal derivative of a P1 function on each facet (left - right)."""
    reg = space.mesh.facets
    g = space.cell_gradient(coeffs)
    diff = g[reg.left[facets]] - g[reg.right[facets]]
    return np.einsum("fd,fd->f", diff, reg.normal[facets])


def volume_load(space, f, cells=None, degree=VOLUME_DEGREE):
    """``int f v`` over whole active cells."""
    mesh = space.mesh
    cells = np.arange(mesh.n_cells) if cells is None else np.asarray(cells)
    pts, w, bary = map_triangles(mesh.cell_coords[cells], degree)
    fv = f(pts[..., 0], pts[..., 1]) * w
    local = fv @ bary
    return np.bincount(space.cell_dofs[cells].ravel(), weights=local.ravel(), minlength=space.n_dofs)


def boundary_load(space, sq, values, normal_derivative=False):
    """``int_Gamma g v`` (or ``int_Gamma g dv/dn``) from values at the segment points."""
    gw = values * sq["weights"]
    if normal_derivative:
        dn = np.einsum("sid,sd->si", sq["grads"], sq["normal"])
        local = gw.sum(axis=1)[:, None] * dn
    else:
        local = np.einsum("sq,sqi->si", gw, sq["lam"])
    return np.bincount(sq["dofs"].ravel(), weights=local.ravel(), minlength=space.n_dofs)


def lumped_masses(space):
    """Exact ``int_{Omega_h} phi_i`` for every P1 basis function."""
    w = np.repeat(space.areas / 3.0, 3)
    return np.bincount(space.cell_dofs.ravel(), weights=w, minlength=space.n_dofs)


# --- Dirichlet ------------------------------------------------------------------


def dirichlet_terms(space, bdry, sq=None):
    """Parameter-free blocks of the Dirichlet bilinear form."""
    sq = segment_quadrature(space, bdry) if sq is None else sq
    reg = space.mesh.facets
    return {
        "stiffness": stiffness(space),
        "active_flux": active_boundary_flux(space),
        "trace_normal": boundary_normal_trace(space, sq),
        "boundary_mass": boundary_mass(space, sq),
        "ghost": ghost_penalty(space, reg.f_gamma),
    }


def combine_dirichlet(terms, params: SchemeParams, h):
    return (
        terms["stiffness"]
        - terms["active_flux"]
        + terms["trace_normal"]
        + (params.gamma / h) * terms["boundary_mass"]
        + (params.sigma * h) * terms["ghost"]
    ).tocsr()


def assemble_dirichlet(problem, mesh, bdry, space, params: SchemeParams) -> LinearSystem:
    """Ghost-penalized antisymmetric Nitsche scheme posed on the whole active domain."""
    if len(bdry) == 0:
        raise AssemblyError("empty boundary discretization")
    if params.gamma <= 0:
        raise AssemblyError("gamma must be > 0 for the Dirichlet scheme")
    h = mesh.h
    sq = segment_quadrature(space, bdry)
    terms = dirichlet_terms(space, bdry, sq)
    A = combine_dirichlet(terms, params, h)
    g = problem.g_dirichlet(sq["points"][..., 0], sq["points"][..., 1])
    rhs = (
        volume_load(space, problem.f)
        + boundary_load(space, sq, g, normal_derivative=True)
        + (params.gamma / h) * boundary_load(space, sq, g)
    )
    return LinearSystem(matrix=A, rhs=rhs, n_u=space.n_dofs, terms=terms)


# --- Neumann / Robin ------------------------------------------------------------


def flux_terms(space: ScalarSpaceP1, zspace: VectorSpaceZ, bdry, sq=None):
    """Parameter-free blocks of the mixed Neumann/Robin form on (u, y).

    All matrices are square of size ``n_u + 2 n_z``.
    """
    sq = segment_quadrature(space, bdry) if sq is None else sq
    mesh = space.mesh
    reg = mesh.facets
    nu, nz = space.n_dofs, zspace.n_nodes
    N = nu + 2 * nz

    def zdofs(cells, comp):
        return nu + comp * nz + zspace.cell_nodes[zspace.slot_of_cell[cells]]

    # int_{Gamma_h} (y.n) v, y taken from the (cut) incident cell
    fac = reg.gamma_h
    cells = reg.left[fac]
    if np.any(zspace.slot_of_cell[cells] < 0):
        raise AssemblyError("an active-boundary facet belongs to a non-cut cell")
    _, w, lam, _ = _facet_cell_quadrature(space, fac)
    mass_f = np.einsum("fq,fqi,fqj->fij", w, lam, lam)
    rows, cols, vals = [], [], []
    for comp in range(2):
        r, c, v = _local(space.cell_dofs[cells], zdofs(cells, comp),
                         mass_f * reg.normal[fac][:, comp, None, None])
        rows.append(r.ravel()); cols.append(c.ravel()); vals.append(v.ravel())
    active_flux = sparse(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), (N, N))

    # -int_Gamma (y.n) v
    mass_s = np.einsum("sq,sqi,sqj->sij", sq["weights"], sq["lam"], sq["lam"])
    rows, cols, vals = [], [], []
    for comp in range(2):
        r, c, v = _local(sq["dofs"], zdofs(bdry.cell, comp),
                         -mass_s * bdry.normal[:, comp, None, None])
        rows.append(r.ravel()); cols.append(c.ravel()); vals.append(v.ravel())
    boundary_flux = sparse(np.concatenate(rows), np.concatenate(cols), np.concatenate(vals), (N, N))

    cut = zspace.cells
    g = space.grads[cut]
    area = space.areas[cut]
    zx, zy = zdofs(cut, 0), zdofs(cut, 1)
    zxy = np.concatenate([zx, zy], axis=1)

    # int div y div z
    d = np.concatenate([g[:, :, 0], g[:, :, 1]], axis=1)
    div = sparse(*_local(zxy, zxy, area[:, None, None] * d[:, :, None] * d[:, None, :]), (N, N))

    # int (y + grad u).(z + grad v)
    p1mass = (np.ones((3, 3)) + np.eye(3)) / 12.0
    mass_local = area[:, None, None] * p1mass
    udofs = space.cell_dofs[cut]
    blocks = [
        _local(zx, zx, mass_local),
        _local(zy, zy, mass_local),
        _local(udofs, udofs, area[:, None, None] * np.einsum("cid,cjd->cij", g, g)),
    ]
    for comp, zc in ((0, zx), (1, zy)):
        coupling = (area / 3.0)[:, None, None] * np.broadcast_to(g[:, :, comp, None], (len(cut), 3, 3))
        blocks.append(_local(udofs, zc, coupling))  # row v, col y
        blocks.append(_local(zc, udofs, np.transpose(coupling, (0, 2, 1))))  # row z, col u
    match = sparse(
        np.concatenate([b[0].ravel() for b in blocks]),
        np.concatenate([b[1].ravel() for b in blocks]),
        np.concatenate([b[2].ravel() for b in blocks]),
        (N, N),
    )

    def pad(m):
        return sp.block_diag([m, sp.csr_matrix((2 * nz, 2 * nz))], format="csr")

    return {
        "stiffness": pad(stiffness(space)),
        "active_flux": active_flux,
        "boundary_flux": boundary_flux,
        "div": div,
        "match": match,
        "ghost": pad(ghost_penalty(space, reg.gamma_h_int)),
        "boundary_mass": pad(boundary_mass(space, sq)),
    }


def combine_flux(terms, params: SchemeParams, h, robin=False):
    A = (
        terms["stiffness"]
        + terms["active_flux"]
        + terms["boundary_flux"]
        + params.effective_gamma_div(h) * terms["div"]
        + params.gamma_1 * terms["match"]
        + (params.sigma * h) * terms["ghost"]
    )
    if robin:
        A = A + (1.0 / params.kappa) * terms["boundary_mass"]
    return A.tocsr()


def _flux_rhs(problem, space, zspace, sq, boundary_values, gamma_div):
    nz = zspace.n_nodes
    mesh = space.mesh
    cut = zspace.cells
    pts, w, _ = map_triangles(mesh.cell_coords[cut], VOLUME_DEGREE)
    fint = (problem.f(pts[..., 0], pts[..., 1]) * w).sum(axis=1)
    g = space.grads[cut]
    ry = np.zeros(2 * nz)
    for comp in range(2):
        ry[comp * nz : (comp + 1) * nz] = np.bincount(
            zspace.cell_nodes[zspace.slot_of_cell[cut]].ravel(),
            weights=(gamma_div * fint[:, None] * g[:, :, comp]).ravel(),
            minlength=nz,
        )
    ru = volume_load(space, problem.f) + boundary_load(space, sq, boundary_values)
    return np.concatenate([ru, ry])


def _check_flux_params(params):
    if params.gamma_1 <= 0:
        raise AssemblyError("gamma_1 must be > 0")


def assemble_neumann(problem, mesh, bdry, space, zspace, params: SchemeParams) -> LinearSystem:
    """Mixed scheme with a flux unknown on cut cells and a mean-zero multiplier.

    The last row/column enforces ``int_{Omega_h} u = 0``.
    """
    _check_flux_params(params)
    h = mesh.h
    sq = segment_quadrature(space, bdry)
    terms = flux_terms(space, zspace, bdry, sq)
    A = combine_flux(terms, params, h)
    g = problem.g_neumann(sq["points"][..., 0], sq["points"][..., 1],
                          np.broadcast_to(bdry.normal[:, None, :], sq["points"].shape))
    rhs = _flux_rhs(problem, space, zspace, sq, g, params.effective_gamma_div(h))
    A, rhs = append_mean_constraint(A, rhs, lumped_masses(space))
    return LinearSystem(matrix=A, rhs=rhs, n_u=space.n_dofs, n_y=zspace.n_dofs,
                        constraint_rows=1, terms=terms)


def assemble_robin(problem, mesh, bdry, space, zspace, params: SchemeParams) -> LinearSystem:
    """Robin variant of the mixed scheme (P1, no mean constraint)."""
    _check_flux_params(params)
    if params.kappa <= 0:
        raise AssemblyError("kappa must be > 0")
    h = mesh.h
    sq = segment_quadrature(space, bdry)
    terms = flux_terms(space, zspace, bdry, sq)
    A = combine_flux(terms, params, h, robin=True)
    g = problem.g_robin(sq["points"][..., 0], sq["points"][..., 1],
                        np.broadcast_to(bdry.normal[:, None, :], sq["points"].shape))
    rhs = _flux_rhs(problem, space, zspace, sq, g / params.kappa, params.effective_gamma_div(h))
    return LinearSystem(matrix=A, rhs=rhs, n_u=space.n_dofs, n_y=zspace.n_dofs, terms=terms)


def append_mean_constraint(A, rhs, masses):
    """Border ``A`` with one multiplier row/column ``[masses, 0...]``."""
    n = A.shape[0]
    m = np.zeros(n)
    m[: len(masses)] = masses
    col = sp.csr_matrix(m[:, None])
    A = sp.bmat([[A, col], [col.T, None]], format="csr")
    return A, np.append(rhs, 0.0)
