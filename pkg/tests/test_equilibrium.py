import itertools

import numpy as np
import pytest

from cmab.equilibrium import certify_epsilon_ne, deviation_gains, equilibrium_occupancy


def brute_force_ne_occupancies(means, n):
    """All occupancy vectors of pure weak Nash equilibria, by enumeration."""
    means = np.asarray(means, dtype=float)
    k = means.size
    found = set()
    for assignment in itertools.product(range(k), repeat=n):
        occ = np.bincount(assignment, minlength=k)
        is_ne = True
        for arm in assignment:
            current = means[arm] / occ[arm]
            for other in range(k):
                if other != arm and means[other] / (occ[other] + 1) > current:
                    is_ne = False
                    break
            if not is_ne:
                break
        if is_ne:
            found.add(tuple(int(x) for x in occ))
    return found


def test_greedy_examples():
    assert equilibrium_occupancy([0.9, 0.3], 3).counts.tolist() == [3, 0]
    assert equilibrium_occupancy([0.5, 0.5], 2).counts.tolist() == [1, 1]
    assert equilibrium_occupancy([0.8], 4).counts.tolist() == [4]


def test_greedy_example_verified_by_enumeration():
    assert (3, 0) in brute_force_ne_occupancies([0.9, 0.3], 3)


def test_counts_sum_to_players():
    rng = np.random.default_rng(0)
    for _ in range(100):
        k = int(rng.integers(1, 7))
        n = int(rng.integers(1, 9))
        occ = equilibrium_occupancy(rng.random(k), n)
        assert occ.counts.sum() == n


def test_greedy_output_is_weak_ne():
    rng = np.random.default_rng(1)
    for _ in range(300):
        k = int(rng.integers(2, 7))
        n = int(rng.integers(1, 9))
        means = rng.random(k)
        occ = equilibrium_occupancy(means, n).counts
        choices = np.repeat(np.arange(k), occ)
        ok, worst = certify_epsilon_ne(choices, means, epsilon=0.0)
        assert ok, (means, occ, worst)


def test_greedy_matches_brute_force_ne_set():
    rng = np.random.default_rng(2)
    for n in range(1, 5):
        for k in range(1, 5):
            for _ in range(40):
                means = rng.random(k)
                occ = tuple(int(x) for x in equilibrium_occupancy(means, n).counts)
                assert occ in brute_force_ne_occupancies(means, n)


def test_certify_split_is_ne():
    ok, worst = certify_epsilon_ne([0, 1], [0.9, 0.8], epsilon=0.0)
    assert ok and worst <= 0.0


def test_certify_stacked_pair_fails_with_gain():
    ok, worst = certify_epsilon_ne([0, 0], [0.9, 0.8], epsilon=0.0)
    assert not ok
    assert worst == pytest.approx(0.8 - 0.45)


def test_certify_single_player_on_best_arm():
    ok, worst = certify_epsilon_ne([0], [0.7, 0.3, 0.1], epsilon=0.0)
    assert ok and worst <= 0.0


def test_certify_epsilon_slack_flips_verdict():
    ok, worst = certify_epsilon_ne([0, 0], [0.9, 0.8], epsilon=0.4)
    assert ok and worst == pytest.approx(0.35)


def test_certify_rejects_negative_epsilon():
    with pytest.raises(ValueError):
        certify_epsilon_ne([0], [0.5], epsilon=-0.1)


def test_scale_invariance_of_certification():
    rng = np.random.default_rng(3)
    for _ in range(200):
        k = int(rng.integers(2, 6))
        n = int(rng.integers(1, 6))
        means = rng.random(k) * 0.5 + 0.1
        choices = rng.integers(0, k, size=n)
        base, _ = certify_epsilon_ne(choices, means, epsilon=0.0)
        for scale in (0.25, 0.5, 2.0):
            scaled, _ = certify_epsilon_ne(choices, means * scale, epsilon=0.0)
            assert scaled == base


def test_deviation_gains_exclude_own_arm():
    # The best deviation must not count the player's own arm.
    gains = deviation_gains([0], [0.9, 0.1])
    assert gains[0] == pytest.approx(0.1 - 0.9)
