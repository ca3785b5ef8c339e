"""Online bipartite matching with online correlated selection."""
from .errors import DomainError, SizeError
from .instance import Instance
from .lp import build_edge_weighted_lp, build_unweighted_lp, kappa_sweep, solve, verify_table
from .ocs import SelectorKind, consecutive_decomposition, new_selector, simulate_batch
from .oracle import exact_algorithm_value, exact_never_selected, offline_optimum, selection_distribution
from .primal_dual import EdgeWeightedEngine, check_invariants, delta_d, delta_r
from .recurrences import eval_f, eval_g, gamma_from_p, optimal_p
from .tables import GainTable, UnweightedDualTable, builtin_table
from .unweighted import UnweightedEngine, check_unweighted_invariants, perfect_correlation_sim
from .workbench import GeneratorSpec, generate, run_experiment

__all__ = [
    "DomainError", "SizeError", "Instance", "build_edge_weighted_lp", "build_unweighted_lp", "kappa_sweep",
    "solve", "verify_table", "SelectorKind", "consecutive_decomposition", "new_selector", "simulate_batch",
    "exact_algorithm_value", "exact_never_selected", "offline_optimum", "selection_distribution",
    "EdgeWeightedEngine", "check_invariants", "delta_d", "delta_r", "eval_f", "eval_g", "gamma_from_p",
    "optimal_p", "GainTable", "UnweightedDualTable", "builtin_table", "UnweightedEngine",
    "check_unweighted_invariants", "perfect_correlation_sim", "GeneratorSpec", "generate", "run_experiment",
]
