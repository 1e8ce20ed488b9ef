"""Cost-optimal policy synthesis for probabilistically-labelled MDPs under
LTL tasks, with a relaxed mode for tasks that cannot be satisfied surely."""

__version__ = "0.1.0"

from .dra import Dra, guard_letters, load_fixture, parse_dra
from .executor import DesyncError, Executor
from .graph import compute_amecs, compute_asccs, compute_mecs, restrict_avoid, tarjan_scc
from .grid import GridConfig, build_grid_model, preset_config, toy_model
from .lp import LinearProgram, LpSolution, solve
from .model import Mdp, ModelError, RunTrace, mean_total_cost, validate_model
from .product import ProductAutomaton, StatePartition, build_product, partition_states
from .sim import SimStats, cyclic_cost_histogram, risk_bound_check, run_monte_carlo
from .synthesis import (
    CompletePolicy,
    InfeasibleError,
    build_combined_program,
    build_prefix_program,
    build_relaxed_suffix_program,
    build_suffix_program,
    extract_policy,
    recovery_policy,
    synthesize,
)

__all__ = [
    "CompletePolicy",
    "DesyncError",
    "Dra",
    "Executor",
    "GridConfig",
    "InfeasibleError",
    "LinearProgram",
    "LpSolution",
    "Mdp",
    "ModelError",
    "ProductAutomaton",
    "RunTrace",
    "SimStats",
    "StatePartition",
    "build_combined_program",
    "build_grid_model",
    "build_prefix_program",
    "build_product",
    "build_relaxed_suffix_program",
    "build_suffix_program",
    "compute_amecs",
    "compute_asccs",
    "compute_mecs",
    "cyclic_cost_histogram",
    "extract_policy",
    "guard_letters",
    "load_fixture",
    "mean_total_cost",
    "parse_dra",
    "partition_states",
    "preset_config",
    "recovery_policy",
    "restrict_avoid",
    "risk_bound_check",
    "run_monte_carlo",
    "solve",
    "synthesize",
    "tarjan_scc",
    "toy_model",
    "validate_model",
]
