"""Direct sparse solves and crude extreme-eigenvalue estimates."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import SingularSystemError

ACCEPT_RESIDUAL = 1e-9


@dataclass
class SolveReport:
    solution: np.ndarray
    residual_norm: float  # ||Ax - b|| / ||b||
    factor_time: float
    solve_time: float

    @property
    def accepted(self):
        return self.residual_norm < ACCEPT_RESIDUAL


def _matrix(system):
    return system.matrix if hasattr(system, "matrix") else system


def _rhs(system, rhs):
    return system.rhs if rhs is None else rhs


def solve_direct(system, rhs=None, pivot_rtol=1e-14, check=True) -> SolveReport:
    """Sparse LU (SuperLU, partial pivoting) followed by a residual check.

    ``system`` is a ``LinearSystem`` or a bare sparse matrix together with
    ``rhs``. A pivot smaller than ``pivot_rtol`` times the largest one is
    treated as singular.
    """
    A = sp.csc_matrix(_matrix(system))
    b = np.asarray(_rhs(system, rhs), dtype=float)
    if A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    t0 = time.perf_counter()
    try:
        lu = spla.splu(A, permc_spec="COLAMD")
    except RuntimeError as exc:
        raise SingularSystemError(f"LU factorization failed: {exc}") from exc
    piv = np.abs(lu.U.diagonal())
    k = int(np.argmin(piv))
    if piv[k] <= pivot_rtol * piv.max():
        col = int(lu.perm_c[k]) if lu.perm_c is not None else k
        raise SingularSystemError(
            f"pivot {k} (column {col}) is {piv[k]:.3e}, below {pivot_rtol:g} x max pivot", pivot=col
        )
    t1 = time.perf_counter()
    x = lu.solve(b)
    t2 = time.perf_counter()
    bnorm = np.linalg.norm(b)
    res = np.linalg.norm(A @ x - b)
    res = res / bnorm if bnorm > 0 else res
    report = SolveReport(solution=x, residual_norm=float(res), factor_time=t1 - t0, solve_time=t2 - t1)
    if check and not report.accepted:
        raise SingularSystemError(f"relative residual {res:.3e} exceeds {ACCEPT_RESIDUAL:g}")
    return report


def estimate_extreme_ritz(system, iterations=50, seed=0):
    """Smallest and largest |eigenvalue| of the symmetric part, by (inverse) power iteration.

    Diagnostic only: the estimates are Rayleigh quotients after
    ``iterations`` steps from a fixed random start.
    """
    if iterations < 10:
        raise ValueError("iterations must be >= 10")
    A = sp.csr_matrix(_matrix(system))
    S = ((A + A.T) * 0.5).tocsc()
    rng = np.random.default_rng(seed)
    x0 = rng.standard_normal(S.shape[0])

    x = x0 / np.linalg.norm(x0)
    for _ in range(iterations):
        y = S @ x
        x = y / np.linalg.norm(y)
    lam_max = abs(float(x @ (S @ x)))

    lu = spla.splu(S)
    x = x0 / np.linalg.norm(x0)
    for _ in range(iterations):
        y = lu.solve(x)
        x = y / np.linalg.norm(y)
    lam_min = abs(float(x @ (S @ x)))
    return lam_min, lam_max
