"""Flow allocation and quality tracking for water process networks."""

from .milp import BigMPolicy, ModelError, build_model, count_profile, derive_big_m
from .network import (Component, Edge, Network, Objective, ParseError, Pollutant,
                      Role, classify, from_obj, parse_network, to_canonical_text,
                      to_obj, validate)
from .oracle import brute_force, check_feasibility, evaluate_objective, propagate_quality
from .preprocess import canonicalize, uncanonicalize
from .scenario import TrialConfig, compare_networks, compute_kpis, run_trials
from .solve import (BudgetExceeded, MissingSolver, Solution, SolveLimits,
                    SolverCrash, solve, solve_exact, solve_external, solve_network)

__version__ = "0.1.0"

__all__ = [
    "BigMPolicy", "BudgetExceeded", "Component", "Edge", "MissingSolver",
    "ModelError", "Network", "Objective", "ParseError", "Pollutant", "Role",
    "Solution", "SolveLimits", "SolverCrash", "TrialConfig", "brute_force",
    "build_model", "canonicalize", "check_feasibility", "classify",
    "compare_networks", "compute_kpis", "count_profile", "derive_big_m",
    "evaluate_objective", "from_obj", "parse_network", "propagate_quality",
    "run_trials", "solve", "solve_exact", "solve_external", "solve_network",
    "to_canonical_text", "to_obj", "uncanonicalize", "validate",
    "__version__",
]
