"""Empirical-mean bookkeeping for players and the planner.

A belief stores integer success/pull counts per arm plus a prior, so every
update is exact and replay-stable. The empirical mean of an arm is the
success ratio once the arm has been pulled at least once, and the prior
before that. Collisions and unchosen arms never touch the counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .env import ConfigurationError

PLANNER = "planner"

PULLED = "pulled"
COLLIDED = "collided"
NOT_CHOSEN = "not_chosen"


@dataclass
class BeliefState:
    """One owner's per-arm priors, success counts, and pull counts."""

    priors: np.ndarray
    success_counts: np.ndarray
    pull_counts: np.ndarray
    owner: int | str = 0

    def __post_init__(self) -> None:
        self.priors = np.asarray(self.priors, dtype=float)
        self.success_counts = np.asarray(self.success_counts, dtype=np.int64)
        self.pull_counts = np.asarray(self.pull_counts, dtype=np.int64)
        if not (self.priors.shape == self.success_counts.shape == self.pull_counts.shape):
            raise ConfigurationError("priors, success_counts, pull_counts must share one shape")
        if np.any(self.success_counts > self.pull_counts) or np.any(self.pull_counts < 0):
            raise ConfigurationError("need 0 <= success_counts <= pull_counts")
        if np.any(self.priors < 0.0) or np.any(self.priors > 1.0):
            raise ConfigurationError("priors must lie in [0, 1]")

    @classmethod
    def fresh(cls, priors, owner: int | str = 0) -> "BeliefState":
        priors = np.asarray(priors, dtype=float)
        zeros = np.zeros(priors.shape, dtype=np.int64)
        return cls(priors=priors, success_counts=zeros, pull_counts=zeros.copy(), owner=owner)

    @property
    def n_arms(self) -> int:
        return int(self.priors.size)

    def empirical_mean(self, arm: int) -> float:
        c = self.pull_counts[arm]
        if c == 0:
            return float(self.priors[arm])
        return float(self.success_counts[arm] / c)

    def empirical_means(self) -> np.ndarray:
        """Per-arm empirical means, falling back to the prior where unpulled."""
        return empirical_means(self.priors, self.success_counts, self.pull_counts)

    def to_dict(self) -> dict:
        return {
            "owner": self.owner,
            "priors": self.priors.tolist(),
            "success_counts": self.success_counts.tolist(),
            "pull_counts": self.pull_counts.tolist(),
        }


def empirical_means(priors: np.ndarray, success: np.ndarray, pulls: np.ndarray) -> np.ndarray:
    out = np.array(priors, dtype=float, copy=True)
    mask = pulls > 0
    out[mask] = success[mask] / pulls[mask]
    return out


def update(belief: BeliefState, arm: int, outcome: str, reward: int = 0) -> BeliefState:
    """Return the belief after one round's observation on `arm`.

    Only an effective pull (chosen and not collided) changes anything;
    collided and not-chosen rounds leave the belief untouched.
    """
    if arm < 0 or arm >= belief.n_arms:
        raise ConfigurationError("arm index out of range")
    if outcome in (COLLIDED, NOT_CHOSEN):
        return belief
    if outcome != PULLED:
        raise ConfigurationError(f"unknown outcome {outcome!r}")
    if reward not in (0, 1):
        raise ConfigurationError("reward must be 0 or 1")
    success = belief.success_counts.copy()
    pulls = belief.pull_counts.copy()
    pulls[arm] += 1
    success[arm] += reward
    return BeliefState(
        priors=belief.priors, success_counts=success, pull_counts=pulls, owner=belief.owner
    )


def aggregate_planner_belief(reports: Sequence[BeliefState]) -> BeliefState:
    """Pool per-player beliefs into the planner's global belief.

    Counts add across players; the prior of a still-unpulled arm is the
    arithmetic mean of the players' priors (symmetric, and equal to the common
    prior when they agree).
    """
    if not reports:
        raise ConfigurationError("need at least one report")
    k = reports[0].n_arms
    if any(r.n_arms != k for r in reports):
        raise ConfigurationError("all reports must cover the same arms")
    success = np.sum([r.success_counts for r in reports], axis=0)
    pulls = np.sum([r.pull_counts for r in reports], axis=0)
    priors = np.mean([r.priors for r in reports], axis=0)
    return BeliefState(priors=priors, success_counts=success, pull_counts=pulls, owner=PLANNER)


def one_step_expectation(belief: BeliefState, arm: int) -> float:
    """Expected next-round empirical mean of `arm`, given it is pulled now.

    Computed in exact rational arithmetic; by the martingale identity the
    result equals the current empirical mean exactly. Undefined (and rejected)
    while the arm has never been pulled, since the prior carries no counts.
    """
    c = int(belief.pull_counts[arm])
    if c < 1:
        raise ConfigurationError("one_step_expectation requires at least one pull")
    s = int(belief.success_counts[arm])
    mu = Fraction(s, c)
    expected = mu * Fraction(s + 1, c + 1) + (1 - mu) * Fraction(s, c + 1)
    return float(expected)
