"""Uniform criss-cross background triangulation of the square (-0.5, 0.5)^2."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class BackgroundMesh:
    n: int
    vertices: np.ndarray  # (nv, 2)
    triangles: np.ndarray  # (nt, 3), counter-clockwise
    h: float

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    def signed_areas(self):
        p = self.vertices[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edges(self):
        """Unique edges and their incident triangles.

        Returns ``(edges, incidence)`` where ``edges`` is (ne, 2) with sorted
        endpoints and ``incidence`` is (ne, 2) holding triangle indices, -1
        for the missing neighbor of a boundary edge.
        """
        return edge_incidence(self.triangles)

    def write(self, path):
        """Dump as text: ``v x y`` per vertex, ``t i j k`` per triangle (0-based)."""
        with open(path, "w") as fh:
            for x, y in self.vertices:
                fh.write(f"v {float(x)!r} {float(y)!r}\n")
            for i, j, k in self.triangles:
                fh.write(f"t {i} {j} {k}\n")


def edge_incidence(triangles):
    tri = np.asarray(triangles)
    local = np.array([[1, 2], [2, 0], [0, 1]])
    pairs = np.sort(tri[:, local].reshape(-1, 2), axis=1)
    owner = np.repeat(np.arange(len(tri)), 3)
    edges, inverse, counts = np.unique(pairs, axis=0, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    if counts.max() > 2:
        raise ValueError("non-manifold triangulation")
    order = np.argsort(inverse, kind="stable")
    incidence = np.full((len(edges), 2), -1, dtype=np.int64)
    first = np.searchsorted(inverse[order], np.arange(len(edges)))
    incidence[:, 0] = owner[order][first]
    two = counts == 2
    incidence[two, 1] = owner[order][first[two] + 1]
    return edges, incidence


def build_crisscross(n: int) -> BackgroundMesh:
    """Split each of the n x n square cells into four triangles by its diagonals.

    Corner vertices come first (index ``i + j (n+1)``), then cell centers
    (``(n+1)^2 + i + j n``). Coordinates are exact lattice values.
    """
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    n = int(n)
    i = np.arange(n + 1)
    cx, cy = np.meshgrid((2 * i - n) / (2 * n), (2 * i - n) / (2 * n), indexing="xy")
    k = np.arange(n)
    mx, my = np.meshgrid((2 * k + 1 - n) / (2 * n), (2 * k + 1 - n) / (2 * n), indexing="xy")
    vertices = np.concatenate(
        [np.column_stack([cx.ravel(), cy.ravel()]), np.column_stack([mx.ravel(), my.ravel()])]
    )

    ii, jj = np.meshgrid(k, k, indexing="xy")
    ii = ii.ravel()
    jj = jj.ravel()
    a = ii + jj * (n + 1)
    b = a + 1
    c = b + (n + 1)
    d = a + (n + 1)
    m = (n + 1) ** 2 + ii + jj * n
    triangles = np.stack(
        [np.column_stack([a, b, m]), np.column_stack([b, c, m]),
         np.column_stack([c, d, m]), np.column_stack([d, a, m])],
        axis=1,
    ).reshape(-1, 3)
    return BackgroundMesh(n=n, vertices=vertices, triangles=triangles, h=np.sqrt(2.0) / (2.0 * n))
