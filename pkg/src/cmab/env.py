"""Ground-truth arm environment: Bernoulli rewards and collision resolution.

Arms are shared resources. When several players choose the same arm in a
round, exactly one of them (picked uniformly at random) pulls it and observes
the arm's Bernoulli draw; the rest collide, receive zero, and only see how
many players were on the arm.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .rng import STREAM_COLLISIONS, STREAM_REWARDS, stream


class ConfigurationError(ValueError):
    """Raised for invalid environment or game inputs."""


@dataclass
class ArmEnvironment:
    """Holds the true mean rewards and the environment's random streams.

    Reward draws and collision winner selection come from two independent
    streams, so swapping the policy that produces choices never perturbs the
    arm luck. One Bernoulli is drawn per arm per round for all K arms,
    regardless of which arms were chosen.
    """

    true_means: np.ndarray
    min_gap: float = 0.0
    reward_rng: np.random.Generator = field(default=None, repr=False)  # type: ignore[assignment]
    collision_rng: np.random.Generator = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.true_means = np.asarray(self.true_means, dtype=float)
        if self.true_means.ndim != 1 or self.true_means.size == 0:
            raise ConfigurationError("true_means must be a non-empty 1-D vector")
        if np.any(self.true_means <= 0.0) or np.any(self.true_means >= 1.0):
            raise ConfigurationError("every true mean must lie strictly in (0, 1)")
        if self.min_gap > 0.0:
            gaps = np.abs(self.true_means[:, None] - self.true_means[None, :])
            off = ~np.eye(self.true_means.size, dtype=bool)
            if np.any(gaps[off] <= self.min_gap):
                # Reference mean vectors contain exact duplicates, so this
                # cannot be a hard error without rejecting them.
                warnings.warn(
                    "some arm mean gaps are <= min_gap; separation assumption violated",
                    stacklevel=2,
                )
        if self.reward_rng is None:
            self.reward_rng = stream(0, 0, STREAM_REWARDS)
        if self.collision_rng is None:
            self.collision_rng = stream(0, 0, STREAM_COLLISIONS)

    @property
    def n_arms(self) -> int:
        return int(self.true_means.size)

    def draw_round_rewards(self) -> np.ndarray:
        """Draw this round's condition for every arm (0/1 vector of length K)."""
        return (self.reward_rng.random(self.n_arms) < self.true_means).astype(np.int64)


@dataclass
class RoundOutcome:
    """Joint record of one resolved round.

    ``observed_occupancy[n]`` is the collider count seen by player n when it
    collided, else None. The count is logged only; belief updates never use
    it. ``arm_draws`` is the environment-side log of every arm's condition
    this round; players never see entries for arms they did not pull.
    """

    choices: np.ndarray
    collision_flags: np.ndarray
    realized_rewards: np.ndarray
    occupancy: np.ndarray
    observed_occupancy: list
    arm_draws: np.ndarray | None = None


def resolve_round(choices, env: ArmEnvironment) -> RoundOutcome:
    """Resolve one round of joint arm choices.

    For each arm with m >= 1 choosers, one chooser is selected uniformly
    (probability 1/m); the selected player receives the arm's fresh Bernoulli
    draw, all others receive 0 with their collision flag set.
    """
    choices = np.asarray(choices, dtype=np.int64)
    if choices.ndim != 1 or choices.size == 0:
        raise ConfigurationError("choices must be a non-empty vector of arm indices")
    k = env.n_arms
    if np.any(choices < 0) or np.any(choices >= k):
        raise ConfigurationError(f"arm index out of range [0, {k})")

    n = choices.size
    occupancy = np.bincount(choices, minlength=k)
    arm_rewards = env.draw_round_rewards()

    collision_flags = np.ones(n, dtype=bool)
    realized = np.zeros(n, dtype=np.int64)
    observed: list = [None] * n

    groups: dict[int, list[int]] = {}
    for player, arm in enumerate(choices.tolist()):
        groups.setdefault(arm, []).append(player)
    for arm in sorted(groups):
        choosers = groups[arm]
        m = len(choosers)
        if m == 1:
            winner = choosers[0]
        else:
            winner = choosers[env.collision_rng.integers(m)]
            for p in choosers:
                if p != winner:
                    observed[p] = m
        collision_flags[winner] = False
        realized[winner] = arm_rewards[arm]

    return RoundOutcome(
        choices=choices,
        collision_flags=collision_flags,
        realized_rewards=realized,
        occupancy=occupancy,
        observed_occupancy=observed,
        arm_draws=arm_rewards,
    )


def selection_frequency_check(m: int, trials: int, seed: int = 0) -> np.ndarray:
    """Empirical per-player selection frequency under an m-way collision.

    Statistical helper: resolves `trials` rounds with m identical choosers on
    one arm and returns how often each player was the selected puller.
    """
    if m < 2:
        raise ConfigurationError("m must be >= 2")
    if trials < 1:
        raise ConfigurationError("trials must be >= 1")
    env = ArmEnvironment(
        true_means=np.array([0.5]),
        reward_rng=stream(seed, 0, STREAM_REWARDS),
        collision_rng=stream(seed, 0, STREAM_COLLISIONS),
    )
    choices = np.zeros(m, dtype=np.int64)
    wins = np.zeros(m, dtype=np.int64)
    for _ in range(trials):
        outcome = resolve_round(choices, env)
        wins[~outcome.collision_flags] += 1
    return wins / trials
