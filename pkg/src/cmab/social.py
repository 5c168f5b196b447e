"""Centralized planner policy: collision-free top-N arm sets with exploration.

The planner never places two players on one arm (a collision strictly wastes
reward), so the policy reduces to picking a set of N arms each round. The set
starts at the top N by pooled empirical mean and is refined by swap passes:
an outside arm enters when its mean beats an inside arm's mean minus the
discounted social exploration benefit. Assignment of players to the chosen
arms is reward-invariant under permutation, so we keep it minimal-churn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beliefs import BeliefState
from .env import ConfigurationError


@dataclass
class OptimalArmSet:
    """The planner's N chosen arms and the player->arm assignment onto them."""

    arms: tuple[int, ...]
    assignment: dict[int, int]


def social_benefit(c_k: int, c_j: int, mu_k_tilde: float) -> float:
    """Planner's exploration benefit of swapping arm j in for arm k, clamped.

    Same shape as the selfish benefit with the occupancy terms pinned to the
    collision-free case.
    """
    if c_j == 0:
        return 1.0 if c_k > 0 else 0.0
    raw = (c_k - c_j) * (1.0 - mu_k_tilde) / (c_k * c_j + c_j)
    return float(np.clip(raw, -1.0, 1.0))


def _social_benefit_matrix(means, pulls, outside, inside) -> np.ndarray:
    """benefit[o, i] of swapping outside arm `o` in for inside arm `i`."""
    c_j = pulls[outside].astype(float)[:, None]
    c_k = pulls[inside].astype(float)[None, :]
    mu_k = means[inside][None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        raw = (c_k - c_j) * (1.0 - mu_k) / (c_k * c_j + c_j)
    zero_j = np.broadcast_to(c_j == 0, raw.shape)
    raw[zero_j & (c_k > 0)] = 1.0
    raw[zero_j & (c_k == 0)] = 0.0
    return np.clip(raw, -1.0, 1.0)


def select_arm_set_arrays(means: np.ndarray, pulls: np.ndarray, n_players: int, rho: float) -> np.ndarray:
    """Stable arm set as a sorted index array (fast path on raw arrays)."""
    k = means.size
    n = int(n_players)
    if n >= k:
        raise ConfigurationError("need fewer players than arms (N < K)")
    order = np.argsort(-means, kind="stable")
    inside = np.sort(order[:n])
    in_set = np.zeros(k, dtype=bool)
    in_set[inside] = True

    for _ in range(n * k):
        outside = np.flatnonzero(~in_set)
        inside = np.flatnonzero(in_set)
        benefit = _social_benefit_matrix(means, pulls, outside, inside)
        margin = means[outside][:, None] - (means[inside][None, :] - rho * benefit)
        flat = int(np.argmax(margin))
        if margin.ravel()[flat] <= 0.0:
            break
        o, i = np.unravel_index(flat, margin.shape)
        in_set[outside[o]] = True
        in_set[inside[i]] = False
    return np.flatnonzero(in_set)


def assign_players(arm_set, previous_assignment: dict[int, int] | None = None, n_players: int | None = None) -> dict[int, int]:
    """Map players bijectively onto the arm set with minimal churn.

    A player keeps its previous arm whenever that arm is still in the set;
    remaining players (ascending index) take the vacant arms (ascending
    index).
    """
    arms = sorted(int(a) for a in arm_set)
    if len(set(arms)) != len(arms):
        raise ConfigurationError("arm set must not contain duplicates")
    n = len(arms) if n_players is None else int(n_players)
    if n != len(arms):
        raise ConfigurationError("need exactly one arm per player")
    previous = previous_assignment or {}
    assignment: dict[int, int] = {}
    taken: set[int] = set()
    for player in range(n):
        arm = previous.get(player)
        if arm is not None and arm in arms and arm not in taken:
            assignment[player] = int(arm)
            taken.add(int(arm))
    vacant = [a for a in arms if a not in taken]
    unplaced = [p for p in range(n) if p not in assignment]
    for player, arm in zip(unplaced, vacant):
        assignment[player] = arm
    return assignment


def select_arm_set(
    planner_belief: BeliefState,
    n_players: int,
    rho: float,
    previous_assignment: dict[int, int] | None = None,
) -> OptimalArmSet:
    """Choose the stable N-arm set under the planner belief and assign players."""
    arms = select_arm_set_arrays(
        planner_belief.empirical_means(), planner_belief.pull_counts, n_players, rho
    )
    assignment = assign_players(arms, previous_assignment)
    return OptimalArmSet(arms=tuple(int(a) for a in arms), assignment=assignment)
