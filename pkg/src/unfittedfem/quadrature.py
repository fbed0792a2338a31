"""Fixed-order quadrature on segments, triangles and small convex polygons.

Reference rules are stored in barycentric form so the assembly code can map
them onto many cells at once (``map_segments``, ``map_triangles``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    points: np.ndarray  # (q, 2)
    weights: np.ndarray  # (q,), absolute

    def integrate(self, func):
        return float(np.dot(self.weights, func(self.points[:, 0], self.points[:, 1])))


def _gauss01(order):
    x, w = leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


SEGMENT_RULES = {order: _gauss01(order) for order in (1, 2, 3)}

_A1, _W1 = 0.44594849091596488632, 0.22338158967801146570
_A2, _W2 = 0.09157621350977074346, 0.10995174365532186764

TRIANGLE_RULES = {
    1: (np.array([[1.0, 1.0, 1.0]]) / 3.0, np.array([1.0])),
    2: (
        np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]]),
        np.full(3, 1.0 / 3.0),
    ),
    # 6-point Dunavant rule
    4: (
        np.array([
            [1 - 2 * _A1, _A1, _A1], [_A1, 1 - 2 * _A1, _A1], [_A1, _A1, 1 - 2 * _A1],
            [1 - 2 * _A2, _A2, _A2], [_A2, 1 - 2 * _A2, _A2], [_A2, _A2, 1 - 2 * _A2],
        ]),
        np.array([_W1, _W1, _W1, _W2, _W2, _W2]),
    ),
}


def _check_order(order):
    if order not in SEGMENT_RULES:
        raise ValueError(f"unsupported segment order {order}; use 1, 2 or 3")


def _check_degree(degree):
    if degree not in TRIANGLE_RULES:
        raise ValueError(f"unsupported triangle degree {degree}; use 1, 2 or 4")


def segment_rule(p0, p1, order=2) -> QuadratureRule:
    """Gauss-Legendre rule with ``order`` points, exact to degree 2*order-1."""
    _check_order(order)
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    t, w = SEGMENT_RULES[order]
    length = float(np.hypot(*(p1 - p0)))
    return QuadratureRule(p0 + t[:, None] * (p1 - p0), w * length)


def triangle_area(a, b, c):
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))


def triangle_rule(vertices, degree=2) -> QuadratureRule:
    _check_degree(degree)
    v = np.asarray(vertices, dtype=float)
    area = abs(triangle_area(*v))
    if area == 0.0:
        raise ValueError("zero-area triangle")
    bary, w = TRIANGLE_RULES[degree]
    return QuadratureRule(bary @ v, w * area)


def polygon_rule(polygon, degree=2) -> QuadratureRule:
    """Fan-triangulate a convex counter-clockwise polygon from vertex 0."""
    poly = np.asarray(polygon, dtype=float)
    if len(poly) < 3:
        raise ValueError("polygon needs at least 3 vertices")
    signs = [triangle_area(poly[k], poly[(k + 1) % len(poly)], poly[(k + 2) % len(poly)])
             for k in range(len(poly))]
    if min(signs) < -1e-14 * max(abs(s) for s in signs):
        raise ValueError("polygon is not convex counter-clockwise (self-intersecting?)")
    rules = [triangle_rule(poly[[0, k, k + 1]], degree) for k in range(1, len(poly) - 1)]
    return QuadratureRule(
        np.concatenate([r.points for r in rules]),
        np.concatenate([r.weights for r in rules]),
    )


def map_segments(p0, p1, order=2):
    """Vectorized segment rule: returns points (S, q, 2), weights (S, q), params t (q,)."""
    _check_order(order)
    t, w = SEGMENT_RULES[order]
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(p1, dtype=float) - p0
    length = np.hypot(d[:, 0], d[:, 1])
    points = p0[:, None, :] + t[None, :, None] * d[:, None, :]
    return points, length[:, None] * w[None, :], t


def map_triangles(tri, degree=2):
    """Vectorized triangle rule on (T, 3, 2) coordinates.

    Returns points (T, q, 2), weights (T, q) and the reference barycentric
    coordinates (q, 3).
    """
    _check_degree(degree)
    tri = np.asarray(tri, dtype=float)
    bary, w = TRIANGLE_RULES[degree]
    d1 = tri[:, 1] - tri[:, 0]
    d2 = tri[:, 2] - tri[:, 0]
    area = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    points = np.einsum("qk,tkd->tqd", bary, tri)
    return points, area[:, None] * w[None, :], bary
