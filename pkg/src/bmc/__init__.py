"""Matrix completion under row/column graph smoothing.

Estimate a matrix from noisy partial observations by penalized least squares
with graph-Laplacian penalties on rows and columns, and select the two
penalty strengths automatically by quasi-Newton descent on an exact or
randomized-trace BIC surface.
"""

from .completion import (AssumptionCheck, BmcProblem, CompletedMatrix,
                         PatchMeans, check_assumption, complete,
                         limiting_solution, patch_means, penalty_value)
from .errors import (AssemblyCapExceeded, AssumptionViolated, BmcError,
                     FoldInfeasible, GradientUndefined, MaxItersExceeded,
                     NotPositiveDefinite, ParseError)
from .graph import (ComponentPartition, WeightedGraph, build_incidence,
                    build_laplacian, connected_components, knn_sparsify,
                    weights_from_features)
from .io import (read_features, read_graph, read_matrix_csv,
                 read_observed_matrix, results_to_csv, surface_to_csv,
                 trace_to_csv, write_graph, write_matrix_csv,
                 write_observed_matrix, write_report)
from .selection import (ImsConfig, IterateRecord, ObjectiveEvaluation,
                        ProbeSet, SelectionTrace, cross_validate,
                        degrees_of_freedom_exact, evaluate_objective,
                        gradient, grid_search, hutchinson_trace, ims,
                        sample_count_for)
from .simulate import (CheckerboardSpec, ExperimentResult, Method,
                       block_weights, generate, run_comparison, summarize)
from .solver import SolveReport, SolverConfig, factorize, solve, solve_many
from .system import ObservedMatrix, PenaltyParams, SystemOperator, project
from .util import SolveCounter, stream_seed, substream, unvec, vec

__version__ = "0.1.0"

__all__ = [
    "AssemblyCapExceeded",
    "AssumptionCheck",
    "AssumptionViolated",
    "BmcError",
    "BmcProblem",
    "CheckerboardSpec",
    "CompletedMatrix",
    "ComponentPartition",
    "ExperimentResult",
    "FoldInfeasible",
    "GradientUndefined",
    "ImsConfig",
    "IterateRecord",
    "MaxItersExceeded",
    "Method",
    "NotPositiveDefinite",
    "ObjectiveEvaluation",
    "ObservedMatrix",
    "ParseError",
    "PatchMeans",
    "PenaltyParams",
    "ProbeSet",
    "SelectionTrace",
    "SolveCounter",
    "SolveReport",
    "SolverConfig",
    "SystemOperator",
    "WeightedGraph",
    "block_weights",
    "build_incidence",
    "build_laplacian",
    "check_assumption",
    "complete",
    "connected_components",
    "cross_validate",
    "degrees_of_freedom_exact",
    "evaluate_objective",
    "factorize",
    "generate",
    "gradient",
    "grid_search",
    "hutchinson_trace",
    "ims",
    "knn_sparsify",
    "limiting_solution",
    "patch_means",
    "penalty_value",
    "project",
    "read_features",
    "read_graph",
    "read_matrix_csv",
    "read_observed_matrix",
    "results_to_csv",
    "run_comparison",
    "sample_count_for",
    "solve",
    "solve_many",
    "stream_seed",
    "substream",
    "summarize",
    "surface_to_csv",
    "trace_to_csv",
    "unvec",
    "vec",
    "weights_from_features",
    "write_graph",
    "write_matrix_csv",
    "write_observed_matrix",
    "write_report",
]
