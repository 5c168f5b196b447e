"""Per-player threshold decision rule for the selfish policy.

Instead of solving the (exponential) belief MDP, each player compares every
candidate arm's expected one-shot reward against an exploration threshold:
the reward of staying minus a discounted exploration benefit that favors
less-pulled arms. Expected occupancies come from the one-shot congestion
equilibrium under the player's own beliefs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beliefs import BeliefState
from .equilibrium import equilibrium_counts, equilibrium_occupancy


@dataclass
class ThresholdInputs:
    """Scalar inputs to one stay-vs-switch threshold evaluation."""

    current_arm: int
    candidate_arm: int
    r_tilde_k: float
    c_k: int
    c_j: int
    expected_occupancy_j: float
    rho: float


def exploration_benefit(inputs: ThresholdInputs) -> float:
    """Exploration benefit of switching to the candidate arm, clamped to [-1, 1].

    An unexplored candidate (c_j = 0) against an explored current arm has
    unbounded benefit, so the clamp yields +1; two unexplored arms are
    symmetric and give 0. Rewards live in [0, 1], so no single switch can be
    worth more than 1 per step.
    """
    c_k, c_j = inputs.c_k, inputs.c_j
    if c_j == 0:
        return 1.0 if c_k > 0 else 0.0
    raw = (c_k - c_j) * (1.0 - inputs.r_tilde_k)
    raw /= (inputs.expected_occupancy_j + 1.0) * (c_k * c_j + c_j)
    return float(np.clip(raw, -1.0, 1.0))


def switch_threshold(inputs: ThresholdInputs) -> float:
    """Minimum expected reward of the candidate arm that makes switching win.

    Linear in rho between the myopic endpoint (rho=0: the reward of staying)
    and the full-exploration endpoint (rho=1: staying reward minus the
    exploration benefit).
    """
    return inputs.r_tilde_k - inputs.rho * exploration_benefit(inputs)


def _decide_from_arrays(
    means: np.ndarray, pulls: np.ndarray, previous_arm: int, n_players: int, rho: float
) -> int:
    """Array fast path shared by decide() and the simulation loop.

    The N-player one-shot equilibrium predicts per-arm occupancy; the player
    claims one of the slots on its current arm (mean/occ) and values moving
    to arm j at mean_j/(occ_j + 1).
    """
    k = previous_arm
    occ = equilibrium_counts(means, n_players)
    c_k = pulls[k]
    r_stay = means[k] / max(occ[k], 1)

    c_j = pulls.astype(float)
    unexplored = c_j == 0
    denom = (occ + 1.0) * (c_k * c_j + c_j)
    denom[unexplored] = 1.0
    benefit = (c_k - c_j) * ((1.0 - r_stay) / denom)
    benefit[unexplored] = 1.0 if c_k > 0 else 0.0
    np.clip(benefit, -1.0, 1.0, out=benefit)

    margin = means / (occ + 1.0)
    margin += rho * benefit
    margin -= r_stay
    margin[k] = -np.inf
    best = int(np.argmax(margin))
    return best if margin[best] > 0.0 else int(k)


def decide(belief: BeliefState, previous_arm: int, n_players: int, rho: float) -> int:
    """Choose this round's arm given the player's belief and last round's arm.

    Switches to the candidate with the largest positive margin over its
    threshold; stays otherwise. With rho=0 this reduces to the myopic argmax
    of mean/(predicted others' occupancy + 1).
    """
    return _decide_from_arrays(
        belief.empirical_means(), belief.pull_counts, previous_arm, n_players, rho
    )


def _init_decide_from_arrays(priors: np.ndarray, n_players: int) -> int:
    occ = equilibrium_counts(priors, n_players)
    values = priors / np.maximum(occ, 1)
    return int(np.argmax(values))


def init_decide(belief: BeliefState, n_players: int) -> int:
    """First-round choice: best slot in the prior-equilibrium occupancy.

    Values each arm at prior/max(predicted count, 1) — the player claims one
    of the equilibrium slots — and takes the argmax, lowest index on ties.
    """
    if np.any(belief.pull_counts > 0):
        raise ValueError("init_decide requires an unexplored belief (all pull counts zero)")
    return _init_decide_from_arrays(belief.priors, n_players)
