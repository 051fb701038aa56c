"""Exact constrained MAP inference for binary pairwise energies.

The Lagrangian dual of a linearly constrained energy minimization is
explored through the skeleton of its envelope polyhedron, in exact
rational arithmetic.
"""
from .energy import (ConstraintSpec, Edge, LagrangianProblem, PairwiseEnergy,
                     assemble_lagrangian, evaluate_constraints, evaluate_energy,
                     is_submodular, submodularity_lambda_bound)
from .errors import (BudgetExceeded, ConfigurationError, DimensionError, DomainError,
                     InfeasibleError, InvariantViolation, LagskelError, ParseError,
                     SubmodularityError)
from .oracles import (LagrangianOracle, brute_minimize, make_lagrangian_oracle,
                      mincut_minimize, shortest_path_oracle)
from .skeleton import Hyperplane, Skeleton, init_skeleton, plane_of
from .solvers import (PenaltySpec, SlackBounds, adapt_search, dual_max, dual_search,
                      retarget, select_soft, slack_wrap)

__version__ = "0.1.0"

__all__ = [
    "ConstraintSpec", "Edge", "LagrangianProblem", "PairwiseEnergy", "assemble_lagrangian",
    "evaluate_constraints", "evaluate_energy", "is_submodular", "submodularity_lambda_bound",
    "BudgetExceeded", "ConfigurationError", "DimensionError", "DomainError", "InfeasibleError",
    "InvariantViolation", "LagskelError", "ParseError", "SubmodularityError",
    "LagrangianOracle", "brute_minimize", "make_lagrangian_oracle", "mincut_minimize",
    "shortest_path_oracle", "Hyperplane", "Skeleton", "init_skeleton", "plane_of",
    "PenaltySpec", "SlackBounds", "adapt_search", "dual_max", "dual_search", "retarget",
    "select_soft", "slack_wrap",
]
