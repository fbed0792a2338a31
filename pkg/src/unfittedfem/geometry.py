"""Active mesh extraction, facet sets and the polygonal boundary surrogate.

Vertex values of the level set are computed once per background vertex.
Values with ``|phi| <= tol`` are snapped to exactly zero: a snapped vertex
counts as inside the domain for classification and carries the boundary
crossing itself, so boundary segments of neighboring cells meet exactly.
All geometry downstream (segments, clipping, normals) uses the piecewise
linear interpolant of the snapped values.

Classification per cell, with ``lo``/``hi`` the min/max snapped value:

* all three values zero: ``DegenerateLevelSetError``;
* ``lo < 0 < hi`` (or ``lo < 0`` and two zero vertices): cut;
* ``lo < 0`` otherwise: interior;
* ``lo >= 0``: dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateClipError, DegenerateCutError, DegenerateLevelSetError, EmptyDomainError
from .mesh import BackgroundMesh, edge_incidence

INTERIOR = 0
CUT = 1


@dataclass(frozen=True, eq=False)
class FacetRegistry:
    """All edges of the active mesh.

    ``left``/``right`` are active-cell indices (``right == -1`` on the outer
    boundary). ``normal`` is the unit normal pointing out of ``left``; jumps
    are taken as left minus right.
    """

    vertices: np.ndarray  # (nf, 2) background vertex ids
    left: np.ndarray
    right: np.ndarray
    normal: np.ndarray  # (nf, 2)
    length: np.ndarray
    gamma_h: np.ndarray  # facets on the boundary of the active domain
    gamma_h_int: np.ndarray  # cut | interior interfaces
    f_gamma: np.ndarray  # internal facets owned by at least one cut cell
    f_gamma_cut: np.ndarray  # internal facets between two cut cells

    @property
    def n_facets(self):
        return len(self.left)


@dataclass(frozen=True, eq=False)
class BoundaryDiscretization:
    """Straight segments approximating the zero level set, one per cut cell.

    Segments are oriented so that ``normal == (t_y, -t_x) / |t|`` for the
    direction ``t = p1 - p0`` (domain on the left).
    """

    p0: np.ndarray
    p1: np.ndarray
    normal: np.ndarray
    length: np.ndarray
    cell: np.ndarray  # active index of the parent cut cell

    def __len__(self):
        return len(self.length)

    @property
    def total_length(self):
        return float(self.length.sum())

    def write(self, path):
        with open(path, "w") as fh:
            for a, b, nv in zip(self.p0, self.p1, self.normal):
                fh.write("s " + " ".join(repr(float(v)) for v in (*a, *b, *nv)) + "\n")


class ActiveMesh:
    """Background cells that meet the domain, tagged interior or cut."""

    def __init__(self, bg, vertex_phi, vertex_level, cells, kind, tol):
        self.bg = bg
        self.vertex_phi = vertex_phi
        self.vertex_level = vertex_level
        self.cells = cells
        self.kind = kind
        self.tol = tol
        self.h = bg.h
        self.cell_of_background = np.full(bg.n_triangles, -1, dtype=np.int64)
        self.cell_of_background[cells] = np.arange(len(cells))
        self.cell_vertices = bg.triangles[cells]
        self.cell_coords = bg.vertices[self.cell_vertices]
        self.cell_levels = vertex_level[self.cell_vertices]
        d1 = self.cell_coords[:, 1] - self.cell_coords[:, 0]
        d2 = self.cell_coords[:, 2] - self.cell_coords[:, 0]
        self.cell_areas = 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        self.facets = _build_facets(self)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def is_cut(self):
        return self.kind == CUT

    @cached_property
    def cut_cells(self):
        return np.flatnonzero(self.kind == CUT)

    @cached_property
    def interior_cells(self):
        return np.flatnonzero(self.kind == INTERIOR)

    @property
    def area(self):
        return float(self.cell_areas.sum())

    @cached_property
    def boundary(self) -> BoundaryDiscretization:
        return extract_boundary_segments(self)

    @cached_property
    def inside_triangles(self):
        """Triangles tiling the polygonal domain: ``(coords (T,3,2), owner (T,))``."""
        return _fan_triangles(self, side=-1)

    @cached_property
    def outside_triangles(self):
        """Triangles tiling the fictitious strip between the boundary and the active domain."""
        return _fan_triangles(self, side=+1)

    @cached_property
    def clipped_areas(self):
        tri, owner = self.inside_triangles
        return np.bincount(owner, weights=_tri_areas(tri), minlength=self.n_cells)


def default_tolerance(vertex_phi):
    scale = float(np.max(np.abs(vertex_phi))) if len(vertex_phi) else 0.0
    return 1e-12 * max(scale, np.finfo(float).tiny)


def classify_and_extract(bg: BackgroundMesh, problem, tol=None) -> ActiveMesh:
    """Evaluate the level set at the background vertices and keep the cells meeting the domain."""
    vertex_phi = np.asarray(problem.phi(bg.vertices[:, 0], bg.vertices[:, 1]), dtype=float)
    if tol is None:
        tol = default_tolerance(vertex_phi)
    if tol < 0:
        raise ValueError("tol must be >= 0")
    level = np.where(np.abs(vertex_phi) <= tol, 0.0, vertex_phi)
    kind = classify_levels(level[bg.triangles])
    cells = np.flatnonzero(kind >= 0)
    if len(cells) == 0:
        raise EmptyDomainError("no background cell intersects the domain")
    return ActiveMesh(bg, vertex_phi, level, cells, kind[cells], tol)


def classify_levels(levels):
    """Classify cells from snapped vertex values (C, 3): 0 interior, 1 cut, -1 dropped."""
    levels = np.asarray(levels, dtype=float)
    lo = levels.min(axis=1)
    hi = levels.max(axis=1)
    zeros = (levels == 0.0).sum(axis=1)
    bad = np.flatnonzero(zeros == 3)
    if len(bad):
        raise DegenerateLevelSetError(
            f"cell {int(bad[0])} has all vertex level-set values within tolerance"
        )
    kind = np.full(len(levels), -1, dtype=np.int8)
    inside = lo < 0
    cut = inside & ((hi > 0) | (zeros == 2))
    kind[inside] = INTERIOR
    kind[cut] = CUT
    return kind


def barycentric_gradients(coords):
    """Constant gradients of the three barycentric functions on each triangle (C, 3, 2)."""
    x = coords[..., 0]
    y = coords[..., 1]
    det = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (x[:, 2] - x[:, 0]) * (y[:, 1] - y[:, 0])
    grads = np.empty(coords.shape)
    for k in range(3):
        a, b = (k + 1) % 3, (k + 2) % 3
        grads[:, k, 0] = (y[:, a] - y[:, b]) / det
        grads[:, k, 1] = (x[:, b] - x[:, a]) / det
    return grads


def _build_facets(mesh: ActiveMesh) -> FacetRegistry:
    edges, inc = edge_incidence(mesh.cell_vertices)
    left, right = inc[:, 0], inc[:, 1]
    pts = mesh.bg.vertices
    a = pts[edges[:, 0]]
    b = pts[edges[:, 1]]
    t = b - a
    length = np.hypot(t[:, 0], t[:, 1])
    normal = np.column_stack([t[:, 1], -t[:, 0]]) / length[:, None]
    # opposite vertex of the left cell
    lv = mesh.cell_vertices[left]
    opp = lv.sum(axis=1) - edges.sum(axis=1)
    flip = np.einsum("ij,ij->i", normal, pts[opp] - a) > 0
    normal[flip] *= -1.0

    internal = right >= 0
    cut = mesh.is_cut
    lcut = cut[left]
    rcut = np.where(internal, cut[np.maximum(right, 0)], False)
    return FacetRegistry(
        vertices=edges,
        left=left,
        right=right,
        normal=normal,
        length=length,
        gamma_h=np.flatnonzero(~internal),
        gamma_h_int=np.flatnonzero(internal & (lcut != rcut)),
        f_gamma=np.flatnonzero(internal & (lcut | rcut)),
        f_gamma_cut=np.flatnonzero(internal & lcut & rcut),
    )


def extract_boundary_segments(mesh: ActiveMesh, bg: BackgroundMesh = None) -> BoundaryDiscretization:
    """One straight segment per cut cell from the zero crossings of the linear interpolant."""
    cut = mesh.cut_cells
    if len(cut) == 0:
        raise DegenerateCutError("mesh has no cut cells")
    P = mesh.cell_coords[cut]
    L = mesh.cell_levels[cut]
    cand = np.zeros((len(cut), 6, 2))
    mask = np.zeros((len(cut), 6), dtype=bool)
    for k in range(3):
        a, b = (k + 1) % 3, (k + 2) % 3
        mask[:, k] = L[:, k] == 0.0
        cand[:, k] = P[:, k]
        cross = L[:, a] * L[:, b] < 0
        denom = np.where(cross, L[:, a] - L[:, b], 1.0)
        t = L[:, a] / denom
        mask[:, 3 + k] = cross
        cand[:, 3 + k] = P[:, a] + t[:, None] * (P[:, b] - P[:, a])
    count = mask.sum(axis=1)
    bad = np.flatnonzero(count != 2)
    if len(bad):
        c = int(cut[bad[0]])
        raise DegenerateCutError(
            f"cut cell {c} (background {int(mesh.cells[c])}) has {int(count[bad[0]])} boundary crossings"
        )
    order = np.argsort(~mask, axis=1, kind="stable")[:, :2]
    rows = np.arange(len(cut))[:, None]
    q = cand[rows, order]
    p0, p1 = q[:, 0], q[:, 1]

    grad = np.einsum("ck,ckd->cd", L, barycentric_gradients(P))
    normal = grad / np.hypot(grad[:, 0], grad[:, 1])[:, None]
    t = p1 - p0
    swap = t[:, 1] * normal[:, 0] - t[:, 0] * normal[:, 1] < 0
    p0, p1 = np.where(swap[:, None], p1, p0), np.where(swap[:, None], p0, p1)
    length = np.hypot(*(p1 - p0).T)
    return BoundaryDiscretization(p0=p0, p1=p1, normal=normal, length=length, cell=cut.copy())


def clip_triangle(coords, levels, side=-1):
    """Part of a triangle where ``side * level <= 0`` (list of CCW points).

    ``side=-1`` keeps the domain part (level <= 0), ``side=+1`` the outside
    part (level >= 0).
    """
    out = []
    for k in range(3):
        lp, lq = levels[k], levels[(k + 1) % 3]
        p, q = coords[k], coords[(k + 1) % 3]
        if side * lp >= 0:
            out.append((float(p[0]), float(p[1])))
        if lp * lq < 0:
            t = lp / (lp - lq)
            out.append((float(p[0] + t * (q[0] - p[0])), float(p[1] + t * (q[1] - p[1]))))
    return out


def polygon_area(poly):
    s = 0.0
    for k in range(len(poly)):
        x0, y0 = poly[k]
        x1, y1 = poly[(k + 1) % len(poly)]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def clip_cell_to_domain(cell: int, mesh: ActiveMesh, bg: BackgroundMesh = None) -> np.ndarray:
    """Polygon (3 or 4 CCW vertices) covering the domain part of an active cell."""
    coords = mesh.cell_coords[cell]
    if mesh.kind[cell] == INTERIOR:
        return coords.copy()
    poly = clip_triangle(coords, mesh.cell_levels[cell], side=-1)
    area = polygon_area(poly) if len(poly) >= 3 else 0.0
    if area < 1e-14 * mesh.cell_areas[cell]:
        raise DegenerateClipError(f"clipped polygon of cell {cell} has area {area:g}")
    return np.array(poly)


def _fan_triangles(mesh: ActiveMesh, side):
    if side < 0:
        base = mesh.interior_cells
        tris = [mesh.cell_coords[base]]
        owners = [base]
    else:
        tris, owners = [], []
    extra, extra_owner = [], []
    for c in mesh.cut_cells:
        poly = clip_triangle(mesh.cell_coords[c], mesh.cell_levels[c], side=side)
        for k in range(1, len(poly) - 1):
            tri = (poly[0], poly[k], poly[k + 1])
            if polygon_area(tri) > 0.0:
                extra.append(tri)
                extra_owner.append(c)
    if extra:
        tris.append(np.array(extra, dtype=float))
        owners.append(np.array(extra_owner, dtype=np.int64))
    if not tris:
        return np.zeros((0, 3, 2)), np.zeros(0, dtype=np.int64)
    return np.concatenate(tris), np.concatenate(owners)


def _tri_areas(tri):
    d1 = tri[:, 1] - tri[:, 0]
    d2 = tri[:, 2] - tri[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def facet_outside_parts(mesh: ActiveMesh, facets):
    """Sub-segments of the given facets lying outside the polygonal domain.

    Returns ``(p0, p1)`` arrays; facets entirely inside give zero-length
    segments.
    """
    ids = mesh.facets.vertices[facets]
    a = mesh.bg.vertices[ids[:, 0]]
    b = mesh.bg.vertices[ids[:, 1]]
    la = mesh.vertex_level[ids[:, 0]]
    lb = mesh.vertex_level[ids[:, 1]]
    cross = la * lb < 0
    t = np.where(cross, la / np.where(cross, la - lb, 1.0), 0.0)
    xpt = a + t[:, None] * (b - a)
    a_out = la >= 0
    b_out = lb >= 0
    p0 = np.where(a_out[:, None], a, xpt)
    p1 = np.where(b_out[:, None], b, xpt)
    none = ~a_out & ~b_out
    p1 = np.where(none[:, None], p0, p1)
    return p0, p1
