import numpy as np
import pytest

from cmab.beliefs import BeliefState
from cmab.selfish import (
    ThresholdInputs,
    decide,
    exploration_benefit,
    init_decide,
    switch_threshold,
)


def inputs(c_k=4, c_j=2, r_tilde_k=0.5, occ_j=0.0, rho=1.0):
    return ThresholdInputs(
        current_arm=0,
        candidate_arm=1,
        r_tilde_k=r_tilde_k,
        c_k=c_k,
        c_j=c_j,
        expected_occupancy_j=occ_j,
        rho=rho,
    )


def belief(priors, success, pulls, owner=0):
    return BeliefState(
        priors=np.asarray(priors, dtype=float),
        success_counts=np.asarray(success, dtype=np.int64),
        pull_counts=np.asarray(pulls, dtype=np.int64),
        owner=owner,
    )


def test_benefit_worked_example():
    assert exploration_benefit(inputs(c_k=4, c_j=2, r_tilde_k=0.5, occ_j=0.0)) == pytest.approx(0.1)


def test_benefit_zero_for_equal_counts():
    assert exploration_benefit(inputs(c_k=7, c_j=7, r_tilde_k=0.3)) == 0.0


def test_benefit_clamped_for_unexplored_candidate():
    assert exploration_benefit(inputs(c_k=3, c_j=0, r_tilde_k=0.5)) == 1.0


def test_benefit_zero_when_both_unexplored():
    assert exploration_benefit(inputs(c_k=0, c_j=0)) == 0.0


def test_benefit_negative_when_candidate_better_explored():
    value = exploration_benefit(inputs(c_k=2, c_j=10, r_tilde_k=0.5))
    assert -1.0 <= value < 0.0


def test_threshold_rho_zero_is_stay_reward():
    for r in (0.0, 0.3, 0.9):
        assert switch_threshold(inputs(r_tilde_k=r, rho=0.0)) == r


def test_threshold_rho_one_full_benefit():
    assert switch_threshold(inputs(c_k=4, c_j=2, r_tilde_k=0.5, rho=1.0)) == pytest.approx(0.4)


def test_threshold_midpoint_between_endpoints():
    lo = switch_threshold(inputs(rho=1.0))
    hi = switch_threshold(inputs(rho=0.0))
    mid = switch_threshold(inputs(rho=0.5))
    assert lo < mid < hi
    assert mid == pytest.approx(0.45)


def test_threshold_monotone_in_candidate_count():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        c_k = int(rng.integers(0, 40))
        r = float(rng.random())
        occ = float(rng.integers(0, 5))
        rho = float(rng.random())
        values = [
            switch_threshold(inputs(c_k=c_k, c_j=c_j, r_tilde_k=r, occ_j=occ, rho=rho))
            for c_j in range(0, 25)
        ]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))


def test_threshold_monotone_in_rho_case_split():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        c_k = int(rng.integers(0, 30))
        c_j = int(rng.integers(0, 30))
        r = float(rng.random())
        occ = float(rng.integers(0, 5))
        rhos = np.linspace(0.0, 1.0, 6)
        values = [
            switch_threshold(inputs(c_k=c_k, c_j=c_j, r_tilde_k=r, occ_j=occ, rho=rho))
            for rho in rhos
        ]
        diffs = np.diff(values)
        if c_j < c_k:
            assert np.all(diffs <= 1e-12)
        else:
            assert np.all(diffs >= -1e-12)


def test_decide_stays_on_dominant_arm():
    b = belief([0.5, 0.5], [9, 2], [10, 10])
    assert decide(b, previous_arm=0, n_players=1, rho=0.0) == 0


def test_decide_explores_unexplored_arm_at_high_rho():
    b = belief([0.5, 0.45], [10, 0], [20, 0])
    assert decide(b, previous_arm=0, n_players=1, rho=0.9) == 1


def test_decide_myopic_at_rho_zero_matches_argmax():
    rng = np.random.default_rng(2)
    from cmab.equilibrium import equilibrium_occupancy

    for _ in range(300):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(1, 6))
        pulls = rng.integers(0, 10, size=k)
        success = np.array([rng.integers(0, c + 1) for c in pulls])
        b = belief(rng.random(k), success, pulls)
        prev = int(rng.integers(k))
        got = decide(b, previous_arm=prev, n_players=n, rho=0.0)
        means = b.empirical_means()
        occ = equilibrium_occupancy(means, n).counts
        values = means / (occ + 1.0)
        values[prev] = means[prev] / max(occ[prev], 1)
        assert got == int(np.argmax(values))


def test_decide_never_switches_without_positive_margin():
    rng = np.random.default_rng(3)
    from cmab.equilibrium import equilibrium_occupancy

    for _ in range(500):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(1, 8))
        pulls = rng.integers(0, 30, size=k)
        success = np.array([rng.integers(0, c + 1) for c in pulls])
        b = belief(rng.random(k), success, pulls)
        prev = int(rng.integers(k))
        rho = float(rng.random())
        got = decide(b, previous_arm=prev, n_players=n, rho=rho)
        if got == prev:
            continue
        means = b.empirical_means()
        occ = equilibrium_occupancy(means, n).counts
        r_stay = means[prev] / max(occ[prev], 1)
        t = switch_threshold(
            ThresholdInputs(
                current_arm=prev,
                candidate_arm=got,
                r_tilde_k=r_stay,
                c_k=int(pulls[prev]),
                c_j=int(pulls[got]),
                expected_occupancy_j=float(occ[got]),
                rho=rho,
            )
        )
        assert means[got] / (occ[got] + 1.0) > t


def test_worst_case_priors_lock_everyone_on_best_arm():
    n, k = 5, 8
    priors = np.full(k, 0.1)
    priors[0] = 0.9  # 0.9 > 5 * 0.1
    players = [belief(priors, np.zeros(k, int), np.zeros(k, int), owner=p) for p in range(n)]
    assert all(init_decide(b, n) == 0 for b in players)
    # after a first round in which everyone collided on arm 0 and one player
    # pulled reward 1, nobody moves at rho ~ 0
    updated = []
    for p, b in enumerate(players):
        if p == 0:
            updated.append(belief(priors, [1] + [0] * (k - 1), [1] + [0] * (k - 1), owner=p))
        else:
            updated.append(b)
    assert all(decide(b, previous_arm=0, n_players=n, rho=0.01) == 0 for b in updated)


def test_init_decide_examples():
    k = 6
    strong = np.array([0.99, 0.05, 0.05, 0.05, 0.05, 0.05])
    assert init_decide(belief(strong, np.zeros(k, int), np.zeros(k, int)), 4) == 0
    uniform = np.full(k, 0.5)
    assert init_decide(belief(uniform, np.zeros(k, int), np.zeros(k, int)), 3) == 0
    solo = np.array([0.2, 0.9, 0.5, 0.1, 0.3, 0.4])
    assert init_decide(belief(solo, np.zeros(k, int), np.zeros(k, int)), 1) == 1


def test_init_decide_requires_unexplored_belief():
    b = belief([0.5, 0.5], [1, 0], [1, 0])
    with pytest.raises(ValueError):
        init_decide(b, 2)
