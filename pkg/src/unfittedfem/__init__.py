"""Cut-free unfitted P1 finite elements on level-set domains, with CutFEM baselines."""

from .assembly import (
    LinearSystem,
    SchemeParams,
    assemble_dirichlet,
    assemble_neumann,
    assemble_robin,
)
from .cutfem import DEFAULT_PARAMS, VARIANTS, assemble_cutfem
from .errors import (
    AssemblyError,
    ConfigError,
    DegenerateClipError,
    DegenerateCutError,
    DegenerateLevelSetError,
    EmptyDomainError,
    GeometryError,
    SingularSystemError,
    UnfittedError,
)
from .geometry import ActiveMesh, BoundaryDiscretization, classify_and_extract, extract_boundary_segments
from .mesh import BackgroundMesh, build_crisscross
from .postprocess import ErrorReport, convergence_slope, error_norms, ibp_identity
from .problems import LevelSetProblem, disk_problem, flower_problem, linear_exact, make_problem
from .solver import SolveReport, estimate_extreme_ritz, solve_direct
from .spaces import ScalarSpaceP1, VectorSpaceZ
from .study import StudyConfig, StudyReport, emit_outputs, run_convergence

__all__ = [name for name in dir() if not name.startswith("_")]
