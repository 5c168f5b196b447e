"""Competitive multi-armed bandit games with collisions.

Simulates N players sharing K Bernoulli arms where simultaneous pulls
collide, under four decision regimes: selfish threshold play, a centralized
collision-free planner, an information-hiding baseline, and a combined
informational/side-payment coordination mechanism with a budget-balanced
ledger.
"""

from .beliefs import BeliefState, aggregate_planner_belief, one_step_expectation, update
from .env import ArmEnvironment, ConfigurationError, RoundOutcome, resolve_round, selection_frequency_check
from .equilibrium import OccupancyProfile, certify_epsilon_ne, equilibrium_occupancy
from .harness import ExperimentConfig, ResultBundle, emit_results, preset, run_experiment
from .mechanism import AdversaryConfig, Ledger, LedgerEntry, RoundPlan, run_cisp_round
from .metrics import (
    MetricsRecord,
    detect_convergence,
    inefficiency_ratio,
    learning_error,
    poa_bound,
)
from .selfish import ThresholdInputs, decide, exploration_benefit, init_decide, switch_threshold
from .social import OptimalArmSet, assign_players, select_arm_set, social_benefit

__all__ = [
    "AdversaryConfig",
    "ArmEnvironment",
    "BeliefState",
    "ConfigurationError",
    "ExperimentConfig",
    "Ledger",
    "LedgerEntry",
    "MetricsRecord",
    "OccupancyProfile",
    "OptimalArmSet",
    "ResultBundle",
    "RoundOutcome",
    "RoundPlan",
    "ThresholdInputs",
    "aggregate_planner_belief",
    "assign_players",
    "certify_epsilon_ne",
    "decide",
    "detect_convergence",
    "emit_results",
    "equilibrium_occupancy",
    "exploration_benefit",
    "inefficiency_ratio",
    "init_decide",
    "learning_error",
    "one_step_expectation",
    "poa_bound",
    "preset",
    "resolve_round",
    "run_cisp_round",
    "run_experiment",
    "select_arm_set",
    "selection_frequency_check",
    "social_benefit",
    "switch_threshold",
    "update",
]

__version__ = "0.1.0"
