"""Trajectory metrics: learning error, efficiency ratios, and convergence.

The inefficiency ratio compares realized discounted social rewards of a test
run against a seed-paired socially optimal run; the closed-form bound gives
the worst-case ceiling the selfish policy can reach.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import ConfigurationError


@dataclass
class MetricsRecord:
    round: int
    learning_error: float
    social_reward: float
    discounted_cumulative: float
    converged: bool


def learning_error(belief_means: np.ndarray, true_means: np.ndarray) -> float:
    """Average per-player L2 error of believed vs true arm means.

    ``belief_means`` is N x K (for planner-driven policies every player slot
    carries the shared planner belief). Normalized by N*K.
    """
    belief_means = np.atleast_2d(np.asarray(belief_means, dtype=float))
    true_means = np.asarray(true_means, dtype=float)
    n, k = belief_means.shape
    if true_means.shape != (k,):
        raise ConfigurationError("true_means length must match beliefs")
    norms = np.linalg.norm(belief_means - true_means[None, :], axis=1)
    return float(np.sum(norms) / (n * k))


def poa_bound(true_means_sorted, n_players: int) -> float:
    """Worst-case optimal/selfish reward ratio: 1 + (mu_2 + ... + mu_N) / mu_1.

    Expects the means sorted descending so arm indices match the convention;
    unsorted input is the caller's bug and is rejected.
    """
    mu = np.asarray(true_means_sorted, dtype=float)
    if np.any(np.diff(mu) > 0):
        raise ConfigurationError("true means must be sorted in descending order")
    n = int(n_players)
    if n > mu.size:
        raise ConfigurationError("n_players cannot exceed the number of arms")
    if n < 1:
        raise ConfigurationError("n_players must be >= 1")
    return 1.0 + float(np.sum(mu[1:n]) / mu[0])


def discounted_total(rewards_per_round, rho: float) -> float:
    rewards = np.asarray(rewards_per_round, dtype=float)
    weights = rho ** np.arange(rewards.size)
    return float(np.sum(rewards * weights))


def inefficiency_ratio(optimal_rewards, test_rewards, rho: float) -> float:
    """Ratio of discounted realized social rewards, optimal over test.

    Both series must come from seed-paired runs over the same horizon.
    Returns +inf when the test run earned nothing.
    """
    optimal_rewards = np.asarray(optimal_rewards, dtype=float)
    test_rewards = np.asarray(test_rewards, dtype=float)
    if optimal_rewards.shape != test_rewards.shape:
        raise ConfigurationError("trajectories must share one horizon")
    denominator = discounted_total(test_rewards, rho)
    if denominator == 0.0:
        return float("inf")
    return discounted_total(optimal_rewards, rho) / denominator


def _per_player_gains(choices: np.ndarray, means_by_player: np.ndarray) -> np.ndarray:
    """Deviation gain of each player under its own belief means (N x K)."""
    k = means_by_player.shape[1]
    occ = np.bincount(choices, minlength=k)
    move_value = means_by_player / (occ[None, :] + 1)
    current = means_by_player[np.arange(choices.size), choices] / occ[choices]
    shadow = move_value.copy()
    shadow[np.arange(choices.size), choices] = -np.inf
    return np.max(shadow, axis=1) - current


def detect_convergence(
    choices_history: np.ndarray,
    means_history: np.ndarray,
    epsilon: float,
    window: int,
) -> int | None:
    """Earliest 1-based round where choices hold for `window` rounds at an eps-NE.

    ``choices_history`` is T x N, ``means_history`` is T x N x K (per-player
    beliefs for selfish runs, the planner belief broadcast for planner runs).
    The epsilon-NE condition is certified at the window's first round under
    that round's beliefs.
    """
    if epsilon < 0:
        raise ConfigurationError("epsilon must be >= 0")
    if window < 1:
        raise ConfigurationError("window must be >= 1")
    choices_history = np.asarray(choices_history, dtype=np.int64)
    t_max = choices_history.shape[0]
    same_as_next = np.all(choices_history[:-1] == choices_history[1:], axis=1)

    t = 0
    while t + window <= t_max:
        run_ok = np.all(same_as_next[t : t + window - 1]) if window > 1 else True
        if run_ok:
            gains = _per_player_gains(choices_history[t], np.asarray(means_history[t], dtype=float))
            if np.max(gains) <= epsilon:
                return t + 1
            t += 1
        else:
            t += 1 + int(np.argmin(same_as_next[t : t + window - 1]))
    return None
