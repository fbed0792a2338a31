# Neumann data on an unfitted mesh through an auxiliary flux variable
#
# On the cut cells a vector unknown y approximates -grad u. The boundary
# condition enters through y.n on the polygonal boundary, so nothing is ever
# integrated over a cut piece of a triangle. The solution is fixed up to a
# constant, which a single multiplier removes.

import numpy as np

from unfittedfem import (
    SchemeParams,
    ScalarSpaceP1,
    VectorSpaceZ,
    assemble_neumann,
    build_crisscross,
    classify_and_extract,
    error_norms,
    flower_problem,
    linear_exact,
    solve_direct,
)
from unfittedfem.assembly import lumped_masses

params = SchemeParams(gamma_div=1.0, gamma_1=10.0, sigma=0.01)

# First a sanity check: a linear exact solution is reproduced to round-off,
# and the flux unknown equals minus its gradient.

problem = linear_exact(flower_problem(), a=1.0, b=2.0, c=3.0)
mesh = classify_and_extract(build_crisscross(24), problem)
V, Z = ScalarSpaceP1(mesh), VectorSpaceZ(mesh)
system = assemble_neumann(problem, mesh, mesh.boundary, V, Z, params)
u, y, lam = system.split(solve_direct(system).solution)
print("flux unknowns on the cut band:", Z.n_dofs, "of", system.n)
print("y_x range:", y[: Z.n_nodes].min(), y[: Z.n_nodes].max())
print("mean of u over the active domain:", lumped_masses(V) @ u)

# Now the smooth benchmark. Errors are reported modulo constants.

problem = flower_problem()
for n in (16, 32, 64, 128):
    mesh = classify_and_extract(build_crisscross(n), problem)
    V, Z = ScalarSpaceP1(mesh), VectorSpaceZ(mesh)
    system = assemble_neumann(problem, mesh, mesh.boundary, V, Z, params)
    u, y, _ = system.split(solve_direct(system).solution)
    e = error_norms(problem, u, V, y_h=y, zspace=Z, scheme="neumann")
    print(f"n={n:4d}  mean-free L2 {e.l2_meanfree_rel:.3e}  H1 {e.h1_rel:.3e}  energy {e.triple_norm:.3e}")

# Dropping the constraint row leaves a matrix that annihilates u = 1, y = 0.
k = system.n - 1
e1 = np.zeros(k)
e1[: V.n_dofs] = 1.0
print("|A (1, 0)| =", np.linalg.norm(system.matrix[:k, :k] @ e1))
