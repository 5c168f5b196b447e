"""Experiment orchestration: declarative configs, replications, and outputs.

A run is (config, base_seed) -> R independent replications with seeds
base_seed + i derivation, per-round metrics, and aggregate statistics.
Outputs are metrics.csv (one row per replication x round), ledger.csv for
mechanism runs, and summary.json carrying the config echo, per-round
aggregates, per-replication end states, and the tracked-arm belief
trajectories.
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .env import ConfigurationError
from .metrics import MetricsRecord, detect_convergence, discounted_total
from .simulate import Trajectory, run_replication

POLICIES = ("selfish", "social", "hiding", "cisp")

MU_FIG2 = (0.22, 0.12, 0.98, 0.11, 0.09, 0.08, 0.14, 0.11)
MU_FIG3 = (0.22, 0.12, 0.98, 0.11, 0.09, 0.08, 0.14, 0.11, 0.09, 0.08, 0.14, 0.11)
MU_HIGH = (0.99, 0.95, 0.94, 0.97, 0.98, 0.98, 0.94, 0.93, 0.92, 0.94, 0.95, 0.94)
MU_SPREAD = (0.99, 0.24, 0.24, 0.24, 0.24, 0.08, 0.24, 0.23, 0.22, 0.24, 0.15, 0.24)


@dataclass
class ExperimentConfig:
    """Declarative description of one scenario."""

    n_players: int
    n_arms: int
    horizon: int
    rho: float
    true_means: tuple[float, ...]
    priors: dict
    policy: str = "selfish"
    min_gap: float = 0.01
    delta: float = 0.1
    adversary: dict | None = None
    replications: int = 1
    base_seed: int = 0
    epsilon: float = 1e-3
    window: int = 50
    penalty: float = 10.0

    def __post_init__(self) -> None:
        if self.n_players < 1:
            raise ConfigurationError("n_players must be >= 1")
        if self.n_players >= self.n_arms:
            raise ConfigurationError("n_players must be smaller than n_arms")
        if self.horizon < 1:
            raise ConfigurationError("horizon must be >= 1")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigurationError("rho must lie in [0, 1)")
        if self.replications < 1:
            raise ConfigurationError("replications must be >= 1")
        if self.policy not in POLICIES:
            raise ConfigurationError(f"policy must be one of {POLICIES}")
        self.true_means = tuple(float(m) for m in self.true_means)
        if len(self.true_means) != self.n_arms:
            raise ConfigurationError("true_means length must equal n_arms")
        if any(not 0.0 < m < 1.0 for m in self.true_means):
            raise ConfigurationError("true_means entries must lie strictly in (0, 1)")
        if self.min_gap > 0:
            mu = np.asarray(self.true_means)
            gaps = np.abs(mu[:, None] - mu[None, :])
            if np.any(gaps[~np.eye(mu.size, dtype=bool)] <= self.min_gap):
                warnings.warn("true_means gaps violate min_gap", stacklevel=2)
        if self.epsilon < 0:
            raise ConfigurationError("epsilon must be >= 0")
        if self.window < 1:
            raise ConfigurationError("window must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        data["true_means"] = tuple(data["true_means"])
        return cls(**data)


def preset(name: str) -> ExperimentConfig:
    """Built-in scenario configurations for the reference experiments."""
    if name == "fig2":
        return ExperimentConfig(
            n_players=5,
            n_arms=8,
            horizon=1000,
            rho=0.95,
            true_means=MU_FIG2,
            priors={"kind": "random"},
            policy="selfish",
            replications=100,
            base_seed=7,
        )
    if name == "fig3":
        return ExperimentConfig(
            n_players=8,
            n_arms=12,
            horizon=500,
            rho=0.95,
            true_means=MU_FIG3,
            priors={"kind": "uniform", "value": 0.5},
            policy="selfish",
            replications=50,
            base_seed=7,
        )
    if name == "fig4a":
        return ExperimentConfig(
            n_players=10,
            n_arms=12,
            horizon=2000,
            rho=0.05,
            true_means=MU_HIGH,
            priors={"kind": "best_arm_bias", "best": 0.99, "rest": 0.05},
            policy="selfish",
            replications=50,
            base_seed=7,
        )
    if name == "fig4b":
        return ExperimentConfig(
            n_players=10,
            n_arms=12,
            horizon=2000,
            rho=0.95,
            true_means=MU_SPREAD,
            priors={"kind": "best_arm_bias", "best": 0.99, "rest": 0.05},
            policy="selfish",
            replications=50,
            base_seed=7,
        )
    if name == "worst_case_poa":
        return ExperimentConfig(
            n_players=10,
            n_arms=12,
            horizon=200,
            rho=0.05,
            true_means=MU_HIGH,
            priors={"kind": "best_arm_bias", "best": 0.99, "rest": 0.05},
            policy="selfish",
            replications=50,
            base_seed=7,
        )
    raise ConfigurationError(
        f"unknown preset {name!r}; available: fig2, fig3, fig4a, fig4b, worst_case_poa"
    )


PRESET_NAMES = ("fig2", "fig3", "fig4a", "fig4b", "worst_case_poa")


@dataclass
class ReplicationResult:
    learning_errors: np.ndarray
    social_rewards: np.ndarray
    discounted_cumulative: np.ndarray
    convergence_round: int | None
    final_discounted: float
    per_player_discounted_utility: np.ndarray
    ledger_rows: list | None


@dataclass
class ResultBundle:
    config: ExperimentConfig
    replications: list[ReplicationResult]
    mean_learning_error: np.ndarray
    std_learning_error: np.ndarray
    mean_social_reward: np.ndarray
    mean_discounted_cumulative: np.ndarray
    belief_mean_tracked_arm: np.ndarray = field(repr=False)  # N x T

    def records(self, replication: int) -> list[MetricsRecord]:
        rep = self.replications[replication]
        conv = rep.convergence_round
        return [
            MetricsRecord(
                round=t + 1,
                learning_error=float(rep.learning_errors[t]),
                social_reward=float(rep.social_rewards[t]),
                discounted_cumulative=float(rep.discounted_cumulative[t]),
                converged=conv is not None and (t + 1) >= conv,
            )
            for t in range(rep.learning_errors.size)
        ]


def _summarize_replication(config: ExperimentConfig, trajectory: Trajectory) -> ReplicationResult:
    horizon = config.horizon
    weights = config.rho ** np.arange(horizon)
    discounted = np.cumsum(trajectory.social_rewards * weights)
    convergence = detect_convergence(
        trajectory.choices, trajectory.means_history, config.epsilon, config.window
    )
    utilities = trajectory.realized.astype(float)
    if trajectory.net_transfers is not None:
        utilities = utilities + trajectory.net_transfers
    per_player = utilities.T @ weights
    ledger_rows = trajectory.ledger.rows() if trajectory.ledger is not None else None
    return ReplicationResult(
        learning_errors=trajectory.learning_errors,
        social_rewards=trajectory.social_rewards,
        discounted_cumulative=discounted,
        convergence_round=convergence,
        final_discounted=float(discounted[-1]),
        per_player_discounted_utility=per_player,
        ledger_rows=ledger_rows,
    )


def run_experiment(config: ExperimentConfig) -> ResultBundle:
    """Run all replications of a scenario and aggregate per-round statistics."""
    results: list[ReplicationResult] = []
    error_rows = []
    reward_rows = []
    cumulative_rows = []
    tracked_sum = np.zeros((config.n_players, config.horizon))

    for rep in range(config.replications):
        trajectory = run_replication(config, rep)
        result = _summarize_replication(config, trajectory)
        results.append(result)
        error_rows.append(result.learning_errors)
        reward_rows.append(result.social_rewards)
        cumulative_rows.append(result.discounted_cumulative)
        tracked_sum += trajectory.belief_of_arm.T

    errors = np.stack(error_rows)
    rewards = np.stack(reward_rows)
    cumulative = np.stack(cumulative_rows)
    return ResultBundle(
        config=config,
        replications=results,
        mean_learning_error=errors.mean(axis=0),
        std_learning_error=errors.std(axis=0, ddof=1) if config.replications > 1 else np.zeros(config.horizon),
        mean_social_reward=rewards.mean(axis=0),
        mean_discounted_cumulative=cumulative.mean(axis=0),
        belief_mean_tracked_arm=tracked_sum / config.replications,
    )


def emit_results(bundle: ResultBundle, output_dir) -> dict[str, Path]:
    """Write metrics.csv, ledger.csv (mechanism runs), and summary.json."""
    if not str(output_dir):
        raise ConfigurationError("output_dir must be a non-empty path")
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigurationError(f"cannot create output directory {out}: {exc}") from exc

    paths: dict[str, Path] = {}
    config = bundle.config

    metrics_path = out / "metrics.csv"
    with open(metrics_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["replication", "t", "learning_error", "social_reward", "discounted_cumulative", "converged"]
        )
        for rep_index in range(config.replications):
            for record in bundle.records(rep_index):
                writer.writerow(
                    [
                        rep_index,
                        record.round,
                        repr(record.learning_error),
                        repr(record.social_reward),
                        repr(record.discounted_cumulative),
                        int(record.converged),
                    ]
                )
    paths["metrics"] = metrics_path

    if any(r.ledger_rows is not None for r in bundle.replications):
        ledger_path = out / "ledger.csv"
        with open(ledger_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["replication", "round", "player", "kind", "amount", "running_balance"])
            for rep_index, rep in enumerate(bundle.replications):
                for row in rep.ledger_rows or []:
                    writer.writerow([rep_index, row[0], row[1], row[2], repr(row[3]), repr(row[4])])
        paths["ledger"] = ledger_path

    tail_bound = config.rho**config.horizon / (1.0 - config.rho) if config.rho > 0 else 0.0
    summary = {
        "config": config.to_dict(),
        "per_round": {
            "learning_error_mean": bundle.mean_learning_error.tolist(),
            "learning_error_std": bundle.std_learning_error.tolist(),
            "social_reward_mean": bundle.mean_social_reward.tolist(),
            "discounted_cumulative_mean": bundle.mean_discounted_cumulative.tolist(),
        },
        "per_replication": {
            "final_discounted_cumulative": [r.final_discounted for r in bundle.replications],
            "convergence_round": [r.convergence_round for r in bundle.replications],
            "final_learning_error": [float(r.learning_errors[-1]) for r in bundle.replications],
            "final_ledger_balance": [
                (r.ledger_rows[-1][4] if r.ledger_rows else None) for r in bundle.replications
            ],
        },
        "belief_trajectories": {
            "arm_index": 0,
            "per_player_mean": bundle.belief_mean_tracked_arm.tolist(),
        },
        "truncation_tail_bound": tail_bound,
    }
    summary_path = out / "summary.json"
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
        fh.write("\n")
    paths["summary"] = summary_path
    return paths


def with_overrides(
    config: ExperimentConfig,
    *,
    seed: int | None = None,
    replications: int | None = None,
    policy: str | None = None,
    n_players: int | None = None,
    adversary: dict | None = None,
    horizon: int | None = None,
) -> ExperimentConfig:
    updates: dict = {}
    if seed is not None:
        updates["base_seed"] = seed
    if replications is not None:
        updates["replications"] = replications
    if policy is not None:
        updates["policy"] = policy
    if n_players is not None:
        updates["n_players"] = n_players
    if adversary is not None:
        updates["adversary"] = adversary
    if horizon is not None:
        updates["horizon"] = horizon
    return replace(config, **updates) if updates else config
