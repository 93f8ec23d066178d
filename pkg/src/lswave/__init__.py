"""Space-time least-squares finite elements for the 1D acoustic wave system."""

from ._kernels import USE_NUMBA
from .adapt import StudyRecord, doerfler_mark, fitted_slope, run_study
from .assembly import (ExactSolution, ProblemData, SparseSystem, assemble,
                       element_matrix, initial_trace_matrix)
from .estimator import (ErrorReport, IndicatorField, compute_errors,
                        compute_indicators, data_norm_sq)
from .fem import (FeSpace, QuadratureRule, build_space, eval_basis, eval_field,
                  quadrature_rule)
from .mesh import (BoundaryTag, Mesh, MeshError, create_uniform_mesh,
                   element_geometry, refine_marked, refine_uniform)
from .problems import BENCHMARKS, get_problem, jump1d, pulse1d, smooth1d
from .solver import SolveReport, SolverError, solve_spd

__all__ = [
    "USE_NUMBA", "StudyRecord", "doerfler_mark", "fitted_slope", "run_study",
    "ExactSolution", "ProblemData", "SparseSystem", "assemble",
    "element_matrix", "initial_trace_matrix", "ErrorReport", "IndicatorField",
    "compute_errors", "compute_indicators", "data_norm_sq", "FeSpace",
    "QuadratureRule", "build_space", "eval_basis", "eval_field",
    "quadrature_rule", "BoundaryTag", "Mesh", "MeshError",
    "create_uniform_mesh", "element_geometry", "refine_marked",
    "refine_uniform", "BENCHMARKS", "get_problem", "jump1d", "pulse1d",
    "smooth1d", "SolveReport", "SolverError", "solve_spd",
]

__version__ = "0.1.0"
