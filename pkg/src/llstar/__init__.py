"""LL* finite elements (RT_p x P_{p+1}) on the unit square."""

from .assembly import (
    ProblemCase,
    adjoint_apply,
    assemble_load,
    assemble_stiffness,
    boundary_flux_load,
)
from .dofs import DofSpace, build_dof_space, evaluate_field, interpolate
from .mesh import Mesh, boundary_vertices, build_uniform_mesh, edge_unit_normal
from .quadrature import QuadRule, edge_rule, triangle_rule
from .reference import CellMap, build_scalar_basis, build_vector_basis, map_scalar, map_vector_piola
from .solve import (
    DiscreteSolution,
    ErrorNorms,
    SolverError,
    SparseSystem,
    energy_error,
    error_norms,
    mixed_residual,
    reconstruct,
    solve,
)
from .study import (
    ConvergenceReport,
    StudyConfig,
    builtin_case,
    compute_rates,
    expected_bands,
    run_study,
)

__version__ = "0.1.0"

__all__ = [
    "CellMap", "ConvergenceReport", "DiscreteSolution", "DofSpace", "ErrorNorms", "Mesh",
    "ProblemCase", "QuadRule", "SolverError", "SparseSystem", "StudyConfig",
    "adjoint_apply", "assemble_load", "assemble_stiffness", "boundary_flux_load",
    "boundary_vertices", "build_dof_space", "build_scalar_basis", "build_uniform_mesh",
    "build_vector_basis", "builtin_case", "compute_rates", "edge_rule", "edge_unit_normal",
    "energy_error", "error_norms", "evaluate_field", "expected_bands", "interpolate",
    "map_scalar", "map_vector_piola", "mixed_residual", "reconstruct", "run_study",
    "solve", "triangle_rule",
]
