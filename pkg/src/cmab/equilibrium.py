"""One-shot congestion equilibrium over believed arm means.

A player sharing an arm with m-1 others expects mean/m, so the one-shot game
is a singleton congestion game. Sequential greedy best response (each player
placed on the arm maximizing mean/(count+1)) reaches a pure Nash equilibrium
of this game class deterministically in O(N·K); ties break to the lowest arm
index so replays are exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class OccupancyProfile:
    """Equilibrium player counts per arm plus the per-slot values mean/count."""

    counts: np.ndarray
    per_arm_value: np.ndarray


_DIVISORS: dict[int, np.ndarray] = {}


def equilibrium_counts(means: np.ndarray, n_players: int) -> np.ndarray:
    """Fast path: equilibrium occupancy counts only."""
    n = n_players
    divisors = _DIVISORS.get(n)
    if divisors is None:
        divisors = _DIVISORS.setdefault(n, np.arange(1.0, n + 1.0))
    table = means[:, None] / divisors[None, :]
    order = np.argsort(-table.ravel(), kind="stable")[:n]
    return np.bincount(order // n, minlength=means.size)


def equilibrium_occupancy(belief_means, n_players: int) -> OccupancyProfile:
    """Greedy best-response occupancy of `n_players` over the believed means.

    Equivalent to taking the n largest entries of the value table
    means[a]/m (m = 1..n), which is the standard water-filling form of the
    greedy placement; ties resolve by (value desc, arm asc, m asc).
    """
    means = np.asarray(belief_means, dtype=float)
    n = int(n_players)
    if n < 1:
        raise ValueError("n_players must be >= 1")
    counts = equilibrium_counts(means, n)
    values = means / np.maximum(counts, 1)
    return OccupancyProfile(counts=counts, per_arm_value=values)


def deviation_gains(choices, belief_means, occupancy=None) -> np.ndarray:
    """Per-player gain of the best unilateral deviation from `choices`.

    Player n on arm k currently expects means[k]/occ[k]; moving to arm k'
    would give means[k']/(occ[k']+1). Gains can be negative.
    """
    choices = np.asarray(choices, dtype=np.int64)
    means = np.asarray(belief_means, dtype=float)
    k = means.size
    occ = np.bincount(choices, minlength=k) if occupancy is None else occupancy
    current = means[choices] / occ[choices]
    move_value = means / (occ + 1)
    top = int(np.argmax(move_value))
    top_val = move_value[top]
    masked = move_value.copy()
    masked[top] = -np.inf
    second_val = float(np.max(masked)) if k > 1 else -np.inf
    best_other = np.where(choices == top, second_val, top_val)
    return best_other - current


def certify_epsilon_ne(choices, belief_means, epsilon: float = 0.0) -> tuple[bool, float]:
    """Check the epsilon-NE condition for a joint choice vector.

    Returns (certified, worst deviation gain); certified means no player can
    gain more than epsilon by unilaterally moving to another arm.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    gains = deviation_gains(choices, belief_means)
    worst = float(np.max(gains))
    return worst <= epsilon, worst
