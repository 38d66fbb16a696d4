"""Non-negative matrix factorization under the Manhattan (entry-wise l1) loss.

``X ~ W.T @ H`` with ``W`` of shape (r, m) and ``H`` of shape (r, n). Two
solvers are provided: exact rank-one residual iteration (``rri_solve``) and
a Nesterov smoothing method (``solve``), plus box, manifold, group-sparse,
elastic-net and symmetric variants.
"""

from .config import Box, Elastic, Group, Manifold, Plain, SolverConfig
from .core import FactorPair, manhattan_distance, objective, random_init
from .errors import (ConfigError, DegenerateBasisError, DegenerateBasisWarning, DimensionError,
                     DomainError, FactorizationError, NumericalFailure)
from .io import read_matrix, write_matrix
from .ogm import ogm_subproblem, solve, variant_objective
from .prox import GroupStructure, project_l1p_ball, prox_l1p
from .rri import (pwl_plus_quadratic_min, rri_box_update, rri_manifold_update, rri_solve,
                  rri_update_H, weighted_l1_min)
from .smoothing import SmoothingState, smoothed_gradient, smoothed_objective
from .symmetric import sym_solve
from .trace import ConvergenceTrace, read_trace_csv

__version__ = "0.1.0"

__all__ = [
    "Box", "ConfigError", "ConvergenceTrace", "DegenerateBasisError", "DegenerateBasisWarning",
    "DimensionError", "DomainError", "Elastic", "FactorPair", "Group", "GroupStructure",
    "FactorizationError", "Manifold", "NumericalFailure", "Plain", "SmoothingState", "SolverConfig",
    "manhattan_distance", "objective", "ogm_subproblem", "project_l1p_ball", "prox_l1p",
    "pwl_plus_quadratic_min", "random_init", "read_matrix", "read_trace_csv", "rri_box_update",
    "rri_manifold_update", "rri_solve", "rri_update_H", "smoothed_gradient", "smoothed_objective",
    "solve", "sym_solve", "variant_objective", "weighted_l1_min", "write_matrix",
]
