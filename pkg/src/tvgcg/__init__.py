"""Total-variation regularized optimal control with graph-cut conditional gradients."""
from .config import RunConfig, load_config
from .fem import FemSystem, assemble, solve_adjoint, solve_state
from .gcg import Atom, GcgResult, GcgSolver, MaxIterExceeded, Stagnated, Status, solve
from .insertion import InsertionResult, dinkelbach, solve_plambda
from .maxflow import FlowNetwork, max_flow, verify_cut
from .mesh import Mesh, MeshKind, MeshSpec, build_mesh
from .subproblem import CoefProblem, CoefSolution, solve_ssn
from .tvcalc import perimeter, tv_p0, tv_p1

__version__ = "0.1.0"

__all__ = [
    "Atom",
    "CoefProblem",
    "CoefSolution",
    "FemSystem",
    "FlowNetwork",
    "GcgResult",
    "GcgSolver",
    "InsertionResult",
    "MaxIterExceeded",
    "Mesh",
    "MeshKind",
    "MeshSpec",
    "RunConfig",
    "Stagnated",
    "Status",
    "assemble",
    "build_mesh",
    "dinkelbach",
    "load_config",
    "max_flow",
    "perimeter",
    "solve",
    "solve_adjoint",
    "solve_plambda",
    "solve_ssn",
    "solve_state",
    "tv_p0",
    "tv_p1",
    "verify_cut",
]
