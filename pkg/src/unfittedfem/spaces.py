"""Continuous P1 spaces on the active mesh and the flux space on cut cells."""

from __future__ import annotations

import numpy as np

from .errors import GeometryError
from .geometry import ActiveMesh, barycentric_gradients


class ScalarSpaceP1:
    """Continuous piecewise-linear functions on every active cell.

    Degrees of freedom sit on all vertices of active cells, including the
    ones outside the physical domain.
    """

    def __init__(self, mesh: ActiveMesh):
        if mesh.n_cells == 0:
            raise GeometryError("empty active mesh")
        self.mesh = mesh
        used = np.unique(mesh.cell_vertices)
        self.vertices = used  # background ids, in dof order
        self.dof_of_vertex = np.full(mesh.bg.n_vertices, -1, dtype=np.int64)
        self.dof_of_vertex[used] = np.arange(len(used))
        self.cell_dofs = self.dof_of_vertex[mesh.cell_vertices]
        self.grads = barycentric_gradients(mesh.cell_coords)
        self.areas = mesh.cell_areas
        self.coords = mesh.bg.vertices[used]

    @property
    def n_dofs(self):
        return len(self.vertices)

    def cell_gradient(self, coeffs, cells=None):
        """Constant gradient of a P1 function per cell, (C, 2)."""
        cells = slice(None) if cells is None else cells
        return np.einsum("ck,ckd->cd", coeffs[self.cell_dofs[cells]], self.grads[cells])

    def barycentric(self, cells, points):
        """Barycentric coordinates of ``points`` (..., 2) in ``cells`` (...)."""
        coords = self.mesh.cell_coords[cells]
        grads = self.grads[cells]
        rel = points - coords[..., 0, :]
        l1 = np.einsum("...d,...d->...", rel, grads[..., 1, :])
        l2 = np.einsum("...d,...d->...", rel, grads[..., 2, :])
        return np.stack([1.0 - l1 - l2, l1, l2], axis=-1)

    def values_at(self, coeffs, cells, points):
        lam = self.barycentric(cells, points)
        return np.einsum("...k,...k->...", lam, coeffs[self.cell_dofs[cells]])


class VectorSpaceZ:
    """Continuous P1 vector fields on the cut cells only.

    Numbering: x-components occupy ``[0, n_nodes)``, y-components
    ``[n_nodes, 2 n_nodes)``.
    """

    def __init__(self, mesh: ActiveMesh):
        self.mesh = mesh
        self.cells = mesh.cut_cells
        if len(self.cells) == 0:
            raise GeometryError("no cut cells: the flux space is empty")
        verts = mesh.cell_vertices[self.cells]
        used = np.unique(verts)
        self.vertices = used
        self.dof_of_vertex = np.full(mesh.bg.n_vertices, -1, dtype=np.int64)
        self.dof_of_vertex[used] = np.arange(len(used))
        self.cell_nodes = self.dof_of_vertex[verts]
        self.slot_of_cell = np.full(mesh.n_cells, -1, dtype=np.int64)
        self.slot_of_cell[self.cells] = np.arange(len(self.cells))
        self.coords = mesh.bg.vertices[used]

    @property
    def n_nodes(self):
        return len(self.vertices)

    @property
    def n_dofs(self):
        return 2 * len(self.vertices)

    def interpolate(self, field):
        fx, fy = field(self.coords[:, 0], self.coords[:, 1])
        return np.concatenate([np.broadcast_to(fx, self.n_nodes), np.broadcast_to(fy, self.n_nodes)]).astype(float)


def build_scalar_space(mesh: ActiveMesh, bg=None) -> ScalarSpaceP1:
    return ScalarSpaceP1(mesh)


def build_vector_space(mesh: ActiveMesh, bg=None) -> VectorSpaceZ:
    return VectorSpaceZ(mesh)


def interpolate_nodal(space: ScalarSpaceP1, field) -> np.ndarray:
    values = field(space.coords[:, 0], space.coords[:, 1])
    return np.broadcast_to(np.asarray(values, dtype=float), (space.n_dofs,)).copy()


def evaluate(space: ScalarSpaceP1, coeffs, cell, point, tol=1e-12):
    """Value and gradient of a P1 function at a point of one cell."""
    lam = space.barycentric(cell, np.asarray(point, dtype=float))
    if lam.min() < -tol or lam.max() > 1 + tol:
        raise ValueError(f"point {tuple(point)} lies outside cell {cell}")
    local = coeffs[space.cell_dofs[cell]]
    return float(lam @ local), local @ space.grads[cell]
