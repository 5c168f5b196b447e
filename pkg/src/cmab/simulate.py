"""Single-replication round loops for the four policies.

Every replication derives its streams from (base_seed, replication, tag), so
runs are reproducible bit for bit and policies can be compared on paired
seeds: the environment's per-round Bernoulli draws depend only on the seed,
never on the policy under test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beliefs import empirical_means
from .env import ArmEnvironment, ConfigurationError, resolve_round
from .mechanism import AdversaryConfig, Ledger, cisp_round_arrays
from .metrics import learning_error
from .rng import (
    HIDING_SALT,
    STREAM_COLLISIONS,
    STREAM_POLICY,
    STREAM_PRIORS,
    STREAM_REWARDS,
    stream,
)
from .selfish import _decide_from_arrays, _init_decide_from_arrays
from .social import assign_players, select_arm_set_arrays


@dataclass
class Trajectory:
    """Everything one replication produced, before aggregation."""

    choices: np.ndarray  # T x N, the resolved (final) arm choices
    realized: np.ndarray  # T x N realized rewards
    social_rewards: np.ndarray  # T, per-round total realized reward
    arm_rewards: np.ndarray  # T x K, the environment's per-arm draws
    means_history: np.ndarray  # T x N x K, decision-time beliefs
    learning_errors: np.ndarray  # T, post-round learning error
    net_transfers: np.ndarray | None = None  # T x N (mechanism runs)
    ledger: Ledger | None = None
    belief_of_arm: np.ndarray | None = None  # T x N, post-round mean of tracked arm


TRACKED_ARM = 0


def make_priors(priors_spec: dict, n_players: int, n_arms: int, base_seed: int, replication: int) -> np.ndarray:
    """Build the N x K prior matrix from a declarative spec."""
    kind = priors_spec.get("kind")
    if kind == "uniform":
        value = float(priors_spec["value"])
        if not 0.0 <= value <= 1.0:
            raise ConfigurationError("priors.value must lie in [0, 1]")
        return np.full((n_players, n_arms), value)
    if kind == "random":
        rng = stream(base_seed, replication, STREAM_PRIORS)
        return rng.random((n_players, n_arms))
    if kind == "matrix":
        matrix = np.asarray(priors_spec["values"], dtype=float)
        if matrix.shape != (n_players, n_arms):
            raise ConfigurationError("priors.values must be an N x K matrix")
        return matrix.copy()
    if kind == "best_arm_bias":
        best = float(priors_spec.get("best", 0.99))
        rest = float(priors_spec.get("rest", 0.05))
        out = np.full((n_players, n_arms), rest)
        out[:, 0] = best
        return out
    raise ConfigurationError(f"unknown priors kind {priors_spec.get('kind')!r}")


def _make_env(true_means, min_gap, base_seed, replication, collision_salt=0) -> ArmEnvironment:
    return ArmEnvironment(
        true_means=np.asarray(true_means, dtype=float),
        min_gap=min_gap,
        reward_rng=stream(base_seed, replication, STREAM_REWARDS),
        collision_rng=stream(base_seed, replication, STREAM_COLLISIONS + collision_salt),
    )


def run_selfish_replication(config, replication: int, hiding: bool = False) -> Trajectory:
    """Selfish play; `hiding` reruns it on independently salted streams."""
    n, k, horizon, rho = config.n_players, config.n_arms, config.horizon, config.rho
    salt = HIDING_SALT if hiding else 0
    env = _make_env(config.true_means, config.min_gap, config.base_seed, replication, salt)
    priors = make_priors(config.priors, n, k, config.base_seed, replication)
    true_means = np.asarray(config.true_means, dtype=float)

    success = np.zeros((n, k), dtype=np.int64)
    pulls = np.zeros((n, k), dtype=np.int64)
    prev: np.ndarray | None = None

    choices_hist = np.empty((horizon, n), dtype=np.int64)
    realized_hist = np.empty((horizon, n), dtype=np.int64)
    social = np.empty(horizon)
    arm_rewards = np.empty((horizon, k), dtype=np.int64)
    means_hist = np.empty((horizon, n, k))
    errors = np.empty(horizon)
    tracked = np.empty((horizon, n))

    choices = np.empty(n, dtype=np.int64)
    for t in range(horizon):
        means = empirical_means(priors, success, pulls)
        means_hist[t] = means
        for p in range(n):
            if prev is None:
                choices[p] = _init_decide_from_arrays(priors[p], n)
            else:
                choices[p] = _decide_from_arrays(means[p], pulls[p], int(prev[p]), n, rho)
        outcome = resolve_round(choices, env)
        for p in np.flatnonzero(~outcome.collision_flags):
            arm = choices[p]
            pulls[p, arm] += 1
            success[p, arm] += outcome.realized_rewards[p]
        prev = choices.copy()

        post = empirical_means(priors, success, pulls)
        choices_hist[t] = choices
        realized_hist[t] = outcome.realized_rewards
        social[t] = float(outcome.realized_rewards.sum())
        arm_rewards[t] = outcome.arm_draws
        errors[t] = learning_error(post, true_means)
        tracked[t] = post[:, TRACKED_ARM]

    return Trajectory(
        choices=choices_hist,
        realized=realized_hist,
        social_rewards=social,
        arm_rewards=arm_rewards,
        means_history=means_hist,
        learning_errors=errors,
        belief_of_arm=tracked,
    )


def run_social_replication(config, replication: int) -> Trajectory:
    n, k, horizon, rho = config.n_players, config.n_arms, config.horizon, config.rho
    env = _make_env(config.true_means, config.min_gap, config.base_seed, replication)
    priors = make_priors(config.priors, n, k, config.base_seed, replication)
    true_means = np.asarray(config.true_means, dtype=float)

    planner_priors = priors.mean(axis=0)
    success = np.zeros(k, dtype=np.int64)
    pulls = np.zeros(k, dtype=np.int64)
    assignment: dict[int, int] | None = None

    choices_hist = np.empty((horizon, n), dtype=np.int64)
    realized_hist = np.empty((horizon, n), dtype=np.int64)
    social = np.empty(horizon)
    arm_rewards = np.empty((horizon, k), dtype=np.int64)
    means_hist = np.empty((horizon, n, k))
    errors = np.empty(horizon)
    tracked = np.empty((horizon, n))

    for t in range(horizon):
        means = empirical_means(planner_priors, success, pulls)
        means_hist[t] = means[None, :]
        arms = select_arm_set_arrays(means, pulls, n, rho)
        assignment = assign_players(arms, assignment)
        choices = np.array([assignment[p] for p in range(n)], dtype=np.int64)
        outcome = resolve_round(choices, env)
        for p in range(n):
            arm = choices[p]
            pulls[arm] += 1
            success[arm] += outcome.realized_rewards[p]

        post = empirical_means(planner_priors, success, pulls)
        choices_hist[t] = choices
        realized_hist[t] = outcome.realized_rewards
        social[t] = float(outcome.realized_rewards.sum())
        arm_rewards[t] = outcome.arm_draws
        errors[t] = learning_error(np.tile(post, (n, 1)), true_means)
        tracked[t] = post[TRACKED_ARM]

    return Trajectory(
        choices=choices_hist,
        realized=realized_hist,
        social_rewards=social,
        arm_rewards=arm_rewards,
        means_history=means_hist,
        learning_errors=errors,
        belief_of_arm=tracked,
    )


def run_cisp_replication(config, replication: int) -> Trajectory:
    n, k, horizon, rho = config.n_players, config.n_arms, config.horizon, config.rho
    env = _make_env(config.true_means, config.min_gap, config.base_seed, replication)
    priors = make_priors(config.priors, n, k, config.base_seed, replication)
    true_means = np.asarray(config.true_means, dtype=float)
    policy_rng = stream(config.base_seed, replication, STREAM_POLICY)

    adversary = None
    if config.adversary is not None:
        adversary = AdversaryConfig(
            player=int(config.adversary.get("player", 0)),
            report_bias=float(config.adversary.get("report_bias", 1.0)),
            deviate_prob=float(config.adversary.get("deviate_prob", 0.0)),
        )

    success = np.zeros((n, k), dtype=np.int64)
    pulls = np.zeros((n, k), dtype=np.int64)
    prev: np.ndarray | None = None
    ledger = Ledger()

    choices_hist = np.empty((horizon, n), dtype=np.int64)
    realized_hist = np.empty((horizon, n), dtype=np.int64)
    social = np.empty(horizon)
    arm_rewards = np.empty((horizon, k), dtype=np.int64)
    means_hist = np.empty((horizon, n, k))
    errors = np.empty(horizon)
    transfers = np.empty((horizon, n))
    tracked = np.empty((horizon, n))

    for t in range(horizon):
        result = cisp_round_arrays(
            priors,
            success,
            pulls,
            prev,
            env,
            ledger,
            t + 1,
            n,
            rho,
            config.penalty,
            adversary,
            policy_rng,
        )
        means_hist[t] = result.planner_means[None, :]
        outcome = result.outcome
        choices = outcome.choices
        prev = choices.copy()

        post_planner = empirical_means(
            priors.mean(axis=0), success.sum(axis=0), pulls.sum(axis=0)
        )
        choices_hist[t] = choices
        realized_hist[t] = outcome.realized_rewards
        social[t] = float(outcome.realized_rewards.sum())
        arm_rewards[t] = outcome.arm_draws
        errors[t] = learning_error(np.tile(post_planner, (n, 1)), true_means)
        transfers[t] = result.net_transfers
        tracked[t] = post_planner[TRACKED_ARM]

    return Trajectory(
        choices=choices_hist,
        realized=realized_hist,
        social_rewards=social,
        arm_rewards=arm_rewards,
        means_history=means_hist,
        learning_errors=errors,
        net_transfers=transfers,
        ledger=ledger,
        belief_of_arm=tracked,
    )


def run_replication(config, replication: int) -> Trajectory:
    policy = config.policy
    if policy == "selfish":
        return run_selfish_replication(config, replication)
    if policy == "hiding":
        return run_selfish_replication(config, replication, hiding=True)
    if policy == "social":
        return run_social_replication(config, replication)
    if policy == "cisp":
        return run_cisp_replication(config, replication)
    raise ConfigurationError(f"unknown policy {policy!r}")
