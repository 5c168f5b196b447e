from fractions import Fraction

import numpy as np
import pytest

from cmab.beliefs import (
    COLLIDED,
    NOT_CHOSEN,
    PLANNER,
    PULLED,
    BeliefState,
    aggregate_planner_belief,
    one_step_expectation,
    update,
)
from cmab.env import ConfigurationError


def belief(priors, success, pulls, owner=0):
    return BeliefState(
        priors=np.asarray(priors, dtype=float),
        success_counts=np.asarray(success, dtype=np.int64),
        pull_counts=np.asarray(pulls, dtype=np.int64),
        owner=owner,
    )


def test_update_success_arithmetic():
    b = belief([0.5], [3], [4])
    assert b.empirical_mean(0) == 0.75
    b2 = update(b, 0, PULLED, reward=1)
    assert b2.pull_counts[0] == 5 and b2.success_counts[0] == 4
    assert b2.empirical_mean(0) == 0.8


def test_collision_leaves_prior_in_place():
    b = belief([0.5], [0], [0])
    b2 = update(b, 0, COLLIDED)
    assert b2.pull_counts[0] == 0
    assert b2.empirical_mean(0) == 0.5


def test_first_observation_replaces_prior():
    b = belief([0.5], [0], [0])
    b2 = update(b, 0, PULLED, reward=0)
    assert b2.empirical_mean(0) == 0.0


def test_not_chosen_is_noop():
    b = belief([0.2, 0.4], [1, 0], [2, 0])
    b2 = update(b, 1, NOT_CHOSEN)
    assert b2 is b


def test_update_validates_inputs():
    b = belief([0.5], [0], [0])
    with pytest.raises(ConfigurationError):
        update(b, 5, PULLED, reward=1)
    with pytest.raises(ConfigurationError):
        update(b, 0, "exploded")
    with pytest.raises(ConfigurationError):
        update(b, 0, PULLED, reward=2)


def test_counts_invariant_enforced():
    with pytest.raises(ConfigurationError):
        belief([0.5], [3], [2])


def test_aggregate_two_players():
    a = belief([0.5, 0.5], [1, 0], [2, 0], owner=0)
    b = belief([0.5, 0.5], [3, 0], [3, 0], owner=1)
    planner = aggregate_planner_belief([a, b])
    assert planner.owner == PLANNER
    assert planner.pull_counts[0] == 5 and planner.success_counts[0] == 4
    assert planner.empirical_mean(0) == 0.8


def test_aggregate_prior_is_mean_of_priors():
    a = belief([0.2, 0.8], [0, 0], [0, 0])
    b = belief([0.6, 0.4], [0, 0], [0, 0], owner=1)
    planner = aggregate_planner_belief([a, b])
    assert planner.empirical_mean(0) == pytest.approx(0.4)
    assert planner.empirical_mean(1) == pytest.approx(0.6)


def test_aggregate_single_player_is_identity():
    a = belief([0.3, 0.7], [2, 1], [4, 1], owner=6)
    planner = aggregate_planner_belief([a])
    assert planner.pull_counts.tolist() == a.pull_counts.tolist()
    assert planner.success_counts.tolist() == a.success_counts.tolist()
    assert planner.priors.tolist() == a.priors.tolist()


def test_aggregate_rejects_mismatched_arms():
    a = belief([0.5], [0], [0])
    b = belief([0.5, 0.5], [0, 0], [0, 0])
    with pytest.raises(ConfigurationError):
        aggregate_planner_belief([a, b])


def test_merge_consistency_with_pooled_log():
    # Building per-player beliefs from a shared log then aggregating equals
    # building one belief from the pooled log.
    rng = np.random.default_rng(0)
    k = 5
    players = [belief([0.5] * k, [0] * k, [0] * k, owner=p) for p in range(3)]
    pooled = belief([0.5] * k, [0] * k, [0] * k, owner=PLANNER)
    for _ in range(300):
        p = int(rng.integers(3))
        arm = int(rng.integers(k))
        r = int(rng.integers(2))
        players[p] = update(players[p], arm, PULLED, reward=r)
        pooled = update(pooled, arm, PULLED, reward=r)
    agg = aggregate_planner_belief(players)
    assert agg.pull_counts.tolist() == pooled.pull_counts.tolist()
    assert agg.success_counts.tolist() == pooled.success_counts.tolist()


def test_one_step_expectation_worked_example():
    b = belief([0.5], [3], [4])
    assert one_step_expectation(b, 0) == 0.75


def test_one_step_expectation_absorbing_endpoints():
    assert one_step_expectation(belief([0.5], [1], [1]), 0) == 1.0
    assert one_step_expectation(belief([0.5], [0], [10]), 0) == 0.0


def test_one_step_expectation_requires_a_pull():
    with pytest.raises(ConfigurationError):
        one_step_expectation(belief([0.5], [0], [0]), 0)


def test_martingale_identity_exact_rationals():
    rng = np.random.default_rng(7)
    for _ in range(500):
        c = int(rng.integers(1, 101))
        s = int(rng.integers(0, c + 1))
        b = belief([0.5], [s], [c])
        assert one_step_expectation(b, 0) == b.empirical_mean(0)
        # the same identity, kept in exact rational arithmetic
        mu = Fraction(s, c)
        assert mu * Fraction(s + 1, c + 1) + (1 - mu) * Fraction(s, c + 1) == mu


def test_pull_counts_monotone_over_trajectory():
    rng = np.random.default_rng(3)
    b = belief([0.5, 0.5, 0.5], [0, 0, 0], [0, 0, 0])
    prev = b.pull_counts.copy()
    for _ in range(200):
        arm = int(rng.integers(3))
        kind = [PULLED, COLLIDED, NOT_CHOSEN][int(rng.integers(3))]
        b = update(b, arm, kind, reward=int(rng.integers(2)) if kind == PULLED else 0)
        assert np.all(b.pull_counts >= prev)
        prev = b.pull_counts.copy()


def test_serialization_round_trip_fields():
    b = belief([0.25, 0.75], [1, 0], [2, 3], owner=4)
    d = b.to_dict()
    assert set(d) == {"owner", "priors", "success_counts", "pull_counts"}
    assert d["owner"] == 4
    assert d["pull_counts"] == [2, 3]
