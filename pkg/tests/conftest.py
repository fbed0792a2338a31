import functools

import numpy as np
import pytest

from unfittedfem.geometry import classify_and_extract
from unfittedfem.mesh import build_crisscross
from unfittedfem.problems import disk_problem, flower_problem, linear_exact
from unfittedfem.spaces import ScalarSpaceP1, VectorSpaceZ


@functools.lru_cache(maxsize=None)
def setup(problem="flower", n=16, exact="sin_exp"):
    """(problem, mesh, boundary, V space, Z space) for a cataloged geometry."""
    p = flower_problem() if problem == "flower" else disk_problem()
    if exact == "linear":
        p = linear_exact(p)
    mesh = classify_and_extract(build_crisscross(n), p)
    return p, mesh, mesh.boundary, ScalarSpaceP1(mesh), VectorSpaceZ(mesh)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
