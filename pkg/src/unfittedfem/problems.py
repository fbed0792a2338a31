"""Benchmark problems: level-set geometry plus manufactured data.

Every field is a vectorized callable ``field(x, y)`` acting on numpy arrays.
The domain is ``{phi < 0}`` and the outward normal on the boundary is
``grad(phi) / |grad(phi)|``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

ScalarField = Callable[[np.ndarray, np.ndarray], np.ndarray]
VectorField = Callable[[np.ndarray, np.ndarray], tuple]

FLOWER_PHASE = 7.0 * np.pi / 36.0


def _sin_exp(x, y):
    return np.sin(x) * np.exp(y)


def _grad_sin_exp(x, y):
    ey = np.exp(y)
    return np.cos(x) * ey, np.sin(x) * ey


def _zero(x, y):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


@dataclass(frozen=True)
class LevelSetProblem:
    """Geometry and data of one experiment.

    ``normal_mode`` selects the normal used to build Neumann/Robin data on
    the discrete boundary: ``"levelset"`` evaluates ``grad(phi)/|grad(phi)|``
    at the quadrature point, ``"segment"`` uses the normal of the polygonal
    boundary segment that carries the point. The latter makes linear exact
    solutions reproducible to round-off (patch tests).
    """

    name: str
    phi: ScalarField
    grad_phi: VectorField
    exact_u: Optional[ScalarField] = None
    grad_u: Optional[VectorField] = None
    f: ScalarField = _zero
    kappa: float = 1.0
    theta0: float = 0.0
    normal_mode: str = "levelset"
    params: dict = field(default_factory=dict)

    def normal(self, x, y):
        gx, gy = self.grad_phi(x, y)
        norm = np.hypot(gx, gy)
        norm = np.where(norm > 0, norm, 1.0)
        return gx / norm, gy / norm

    def g_dirichlet(self, x, y):
        self._require_exact()
        return self.exact_u(x, y)

    def g_neumann(self, x, y, normals=None):
        """Flux ``n . grad u``; ``normals`` are the segment normals (M, 2)."""
        self._require_exact()
        if self.normal_mode == "segment":
            if normals is None:
                raise ValueError("segment normal mode needs the segment normals")
            nx, ny = normals[..., 0], normals[..., 1]
        else:
            nx, ny = self.normal(x, y)
        ux, uy = self.grad_u(x, y)
        return nx * ux + ny * uy

    def g_robin(self, x, y, normals=None):
        """Robin data ``u + kappa * du/dn``."""
        return self.exact_u(x, y) + self.kappa * self.g_neumann(x, y, normals)

    def with_exact(self, exact_u, grad_u, f=_zero, **changes):
        return dataclasses.replace(self, exact_u=exact_u, grad_u=grad_u, f=f, **changes)

    def _require_exact(self):
        if self.exact_u is None or self.grad_u is None:
            raise ValueError(f"problem {self.name!r} has no exact solution")


def flower_problem(R: float = 0.47, theta0: float = 0.0) -> LevelSetProblem:
    """Seven-petal flower ``r^4 (5 + 3 sin(7 theta + 7 pi/36)) / 2 - R^4``.

    The polar angle is measured with ``arctan2`` and shifted by ``theta0``,
    which rotates the domain counter-clockwise.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    R4 = R**4

    def phi(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = x * x + y * y
        theta = np.arctan2(y, x) - theta0
        return r2 * r2 * (5.0 + 3.0 * np.sin(7.0 * theta + FLOWER_PHASE)) / 2.0 - R4

    def grad_phi(x, y):
        # d/dr = 2 r^3 A, d/dtheta = 21/2 r^4 cos(.), both O(r^3) at the origin.
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        r2 = x * x + y * y
        theta = np.arctan2(y, x) - theta0
        arg = 7.0 * theta + FLOWER_PHASE
        amp = 5.0 + 3.0 * np.sin(arg)
        c = 10.5 * np.cos(arg)
        return r2 * (2.0 * amp * x - c * y), r2 * (2.0 * amp * y + c * x)

    return LevelSetProblem(
        name="flower",
        phi=phi,
        grad_phi=grad_phi,
        exact_u=_sin_exp,
        grad_u=_grad_sin_exp,
        theta0=theta0,
        params={"R": R},
    )


def disk_problem(radius: float = 0.25) -> LevelSetProblem:
    if not 0 < radius < 0.5:
        raise ValueError("radius must lie in (0, 0.5)")
    r2 = radius * radius

    def phi(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return x * x + y * y - r2

    def grad_phi(x, y):
        return 2.0 * np.asarray(x, dtype=float), 2.0 * np.asarray(y, dtype=float)

    return LevelSetProblem(
        name="disk",
        phi=phi,
        grad_phi=grad_phi,
        exact_u=_sin_exp,
        grad_u=_grad_sin_exp,
        params={"radius": radius},
    )


def linear_exact(problem: LevelSetProblem, a=1.0, b=2.0, c=3.0) -> LevelSetProblem:
    """Same geometry with ``u = a + b x + c y``, ``f = 0`` and segment normals."""

    def u(x, y):
        return a + b * np.asarray(x, dtype=float) + c * np.asarray(y, dtype=float)

    def grad(x, y):
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.full(shape, float(b)), np.full(shape, float(c))

    return problem.with_exact(u, grad, normal_mode="segment", name=problem.name + "-linear")


CATALOG = {
    "flower": flower_problem,
    "disk": disk_problem,
}


def make_problem(name: str, **params) -> LevelSetProblem:
    """Look up a cataloged problem by name.

    Recognized parameters: ``R`` and ``theta0`` for the flower, ``radius``
    for the disk, and ``kappa`` (Robin coefficient) for both.
    """
    try:
        factory = CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; known: {sorted(CATALOG)}") from None
    kappa = params.pop("kappa", None)
    if name == "disk":
        params.pop("theta0", None)
        params.pop("R", None)
    else:
        params.pop("radius", None)
    problem = factory(**params)
    if kappa is not None:
        problem = dataclasses.replace(problem, kappa=float(kappa))
    return problem
