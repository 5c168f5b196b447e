"""Combined informational and side-payment coordination mechanism.

Each round the planner (1) aggregates players' reported beliefs and selfish
intents, (2) privately recommends empty optimal arms to players whose intent
falls outside the optimal set, (3) prices over-occupied optimal arms — the
max-belief player stays and is charged, the rest are paid to move onto empty
optimal arms — and (4) verifies final actions, fining deviators a penalty
that compensates whoever they collided with.

All payouts on an arm are covered by that arm's charge, so the planner's
running balance never goes negative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .beliefs import BeliefState, aggregate_planner_belief, empirical_means
from .env import ArmEnvironment, ConfigurationError, RoundOutcome, resolve_round
from .selfish import _decide_from_arrays, _init_decide_from_arrays
from .social import select_arm_set_arrays

CHARGE = "charge"
REWARD = "reward"
PENALTY = "penalty"
COMPENSATION = "compensation"

_KINDS = (CHARGE, REWARD, PENALTY, COMPENSATION)


@dataclass
class LedgerEntry:
    round: int
    player: int
    kind: str
    amount: float


class Ledger:
    """Ordered money log with the planner's running balance."""

    def __init__(self) -> None:
        self.entries: list[LedgerEntry] = []
        self.running_balance: float = 0.0

    def append(self, round_: int, player: int, kind: str, amount: float) -> None:
        if kind not in _KINDS:
            raise ConfigurationError(f"unknown ledger kind {kind!r}")
        if amount < 0:
            raise ConfigurationError("ledger amounts must be >= 0")
        self.entries.append(LedgerEntry(round_, player, kind, float(amount)))
        if kind in (CHARGE, PENALTY):
            self.running_balance += amount
        else:
            self.running_balance -= amount

    def recomputed_balance(self) -> float:
        total = 0.0
        for e in self.entries:
            total += e.amount if e.kind in (CHARGE, PENALTY) else -e.amount
        return total

    def rows(self) -> list[tuple]:
        balance = 0.0
        out = []
        for e in self.entries:
            balance += e.amount if e.kind in (CHARGE, PENALTY) else -e.amount
            out.append((e.round, e.player, e.kind, e.amount, balance))
        return out

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["round", "player", "kind", "amount", "running_balance"])
            for row in self.rows():
                writer.writerow([row[0], row[1], row[2], repr(row[3]), repr(row[4])])


@dataclass
class RoundPlan:
    """One round's recommendations and posted prices."""

    optimal_set: tuple[int, ...]
    recommendations: dict[int, int]
    charges: dict[int, float]
    rewards: dict[int, float]
    announced_tolls: dict[int, float]


@dataclass
class AdversaryConfig:
    """Misbehavior hooks for incentive probes.

    ``report_bias`` multiplies the adversary's reported success counts (and
    priors), clamped to stay a valid belief. ``deviate_prob`` is the chance of
    ignoring the recommendation and playing the selfish intent instead.
    """

    player: int
    report_bias: float = 1.0
    deviate_prob: float = 0.0


def distorted_report(priors, success, pulls, bias: float):
    fake_success = np.clip(np.rint(success * bias), 0, pulls).astype(np.int64)
    fake_priors = np.clip(priors * bias, 0.0, 1.0)
    return fake_priors, fake_success


def step1_aggregate(reports: list[BeliefState], intents) -> tuple[BeliefState, np.ndarray]:
    """Pool the reported beliefs and count intents per arm."""
    planner = aggregate_planner_belief(reports)
    intents = np.asarray(intents, dtype=np.int64)
    occupancy = np.bincount(intents, minlength=planner.n_arms)
    return planner, occupancy


def _selfish_threshold_under(planner_means, planner_pulls, intent_occ, current_arm, candidate_arm, rho):
    """Selfish switch threshold evaluated with the planner's aggregate belief."""
    c_k = int(planner_pulls[current_arm])
    c_j = int(planner_pulls[candidate_arm])
    r_stay = planner_means[current_arm] / max(int(intent_occ[current_arm]), 1)
    if c_j == 0:
        benefit = 1.0 if c_k > 0 else 0.0
    else:
        benefit = (c_k - c_j) * (1.0 - r_stay) / ((intent_occ[candidate_arm] + 1.0) * (c_k * c_j + c_j))
        benefit = float(np.clip(benefit, -1.0, 1.0))
    return r_stay - rho * benefit


def _step2_from_arrays(intents, optimal_arms, planner_means, planner_pulls, intent_occ, rho):
    in_set = set(int(a) for a in optimal_arms)
    empty = [a for a in sorted(in_set) if intent_occ[a] == 0]
    recommendations: dict[int, int] = {}
    if not empty:
        return recommendations
    means_list = planner_means.tolist()
    pulls_list = planner_pulls.tolist()
    occ_list = intent_occ.tolist()
    for player, arm in enumerate(intents.tolist()):
        if arm in in_set or not empty:
            continue
        c_k = pulls_list[arm]
        r_stay = means_list[arm] / max(occ_list[arm], 1)
        best_arm, best_mean = None, -1.0
        for e in empty:
            c_j = pulls_list[e]
            if c_j == 0:
                benefit = 1.0 if c_k > 0 else 0.0
            else:
                benefit = (c_k - c_j) * (1.0 - r_stay) / ((occ_list[e] + 1.0) * (c_k * c_j + c_j))
                benefit = max(-1.0, min(1.0, benefit))
            mean_e = means_list[e]
            if mean_e > r_stay - rho * benefit and mean_e > best_mean:
                best_arm, best_mean = e, mean_e
        if best_arm is not None:
            recommendations[player] = best_arm
            empty.remove(best_arm)
    return recommendations


def step2_informational(intents, optimal_set, planner_belief: BeliefState, rho: float) -> dict[int, int]:
    """Recommend empty optimal arms to players whose intent is outside the set.

    A recommendation is only made when the planner's mean of the empty arm
    beats the player's selfish switch threshold computed under the aggregate
    belief; players with no qualifying arm are deferred to step 3. Arms are
    handed out in ascending player order, best planner mean first.
    """
    intents = np.asarray(intents, dtype=np.int64)
    intent_occ = np.bincount(intents, minlength=planner_belief.n_arms)
    return _step2_from_arrays(
        intents,
        optimal_set,
        planner_belief.empirical_means(),
        planner_belief.pull_counts,
        intent_occ,
        rho,
    )


def step3_payments(
    intents,
    reported_means: np.ndarray,
    optimal_set,
    step2_recommendations: dict[int, int],
) -> RoundPlan:
    """Price over-occupied optimal arms and pay the displaced players to move.

    On each optimal arm with m > 1 intents the max-reported-belief player
    stays and is charged (m-1)/m of its reported mean; every remaining empty
    optimal arm is filled by the unrecommended player with the smallest loss
    of moving, paid the gap between its arm's charged player's per-slot value
    and its own belief of the new arm (floored at zero).
    """
    intents = np.asarray(intents, dtype=np.int64)
    n = intents.size
    k = reported_means.shape[1]
    intent_occ = np.bincount(intents, minlength=k)
    in_set = sorted(int(a) for a in optimal_set)
    in_set_lookup = set(in_set)

    recommendations = dict(step2_recommendations)
    charges: dict[int, float] = {}
    rewards: dict[int, float] = {}
    tolls: dict[int, float] = {}
    top_player: dict[int, int] = {}

    by_arm: dict[int, list[int]] = {}
    for player, arm in enumerate(intents.tolist()):
        by_arm.setdefault(arm, []).append(player)

    movers: list[int] = []
    for arm in in_set:
        choosers = by_arm.get(arm)
        if not choosers:
            continue
        if len(choosers) == 1:
            recommendations[choosers[0]] = arm
            continue
        m = len(choosers)
        stayer = max(choosers, key=lambda p: (reported_means[p, arm], -p))
        top_player[arm] = stayer
        recommendations[stayer] = arm
        charges[stayer] = (m - 1) / m * float(reported_means[stayer, arm])
        tolls[arm] = charges[stayer]
        movers.extend(p for p in choosers if p != stayer)

    deferred = [
        p
        for p in range(n)
        if int(intents[p]) not in in_set_lookup and p not in recommendations
    ]
    taken = set(recommendations.values())
    empty_arms = [a for a in in_set if a not in taken]

    for arm in empty_arms:
        if movers:
            def move_loss(p: int) -> float:
                own = int(intents[p])
                return float(
                    reported_means[top_player[own], own] / intent_occ[own]
                    - reported_means[p, arm]
                )

            mover = min(movers, key=lambda p: (move_loss(p), p))
            movers.remove(mover)
            own = int(intents[mover])
            raw = reported_means[top_player[own], own] / intent_occ[own] - reported_means[mover, arm]
            rewards[mover] = max(0.0, float(raw))
            recommendations[mover] = arm
        elif deferred:
            recommendations[deferred.pop(0)] = arm

    if len(recommendations) != n or len(set(recommendations.values())) != n:
        raise ConfigurationError("recommendations failed to form a bijection onto the optimal set")
    return RoundPlan(
        optimal_set=tuple(in_set),
        recommendations=recommendations,
        charges=charges,
        rewards=rewards,
        announced_tolls=tolls,
    )


def step4_verify(
    final_actions,
    plan: RoundPlan,
    reported_means: np.ndarray,
    penalty: float,
    round_: int,
    ledger: Ledger,
) -> dict[int, float]:
    """Fine deviators and compensate the compliant players they collided with.

    Returns the per-player net transfer of this step (negative for deviators).
    The first deviator onto an arm funds a one-time compensation of
    min(penalty, the compliant player's reported mean of that arm); any
    surplus stays with the planner.
    """
    if penalty <= 1.0:
        import warnings

        warnings.warn("penalty <= 1 cannot deter deviations (max per-round reward is 1)", stacklevel=2)
    final_actions = np.asarray(final_actions, dtype=np.int64)
    transfers = {p: 0.0 for p in range(final_actions.size)}
    compensated: set[int] = set()
    for player in range(final_actions.size):
        if int(final_actions[player]) == plan.recommendations[player]:
            continue
        ledger.append(round_, player, PENALTY, penalty)
        transfers[player] -= penalty
        invaded = int(final_actions[player])
        if invaded in compensated:
            continue
        for other in range(final_actions.size):
            if (
                other != player
                and plan.recommendations[other] == invaded
                and int(final_actions[other]) == invaded
            ):
                amount = min(penalty, float(reported_means[other, invaded]))
                ledger.append(round_, other, COMPENSATION, amount)
                transfers[other] += amount
                compensated.add(invaded)
                break
    return transfers


@dataclass
class CispRoundResult:
    outcome: RoundOutcome
    plan: RoundPlan
    planner_means: np.ndarray
    net_transfers: np.ndarray
    intents: np.ndarray


def cisp_round_arrays(
    priors: np.ndarray,
    success: np.ndarray,
    pulls: np.ndarray,
    previous_arms: np.ndarray | None,
    env: ArmEnvironment,
    ledger: Ledger,
    round_: int,
    n_players: int,
    rho: float,
    penalty: float,
    adversary: AdversaryConfig | None = None,
    policy_rng: np.random.Generator | None = None,
) -> CispRoundResult:
    """One full mechanism round on raw belief arrays (mutates success/pulls)."""
    n = n_players
    k = priors.shape[1]
    means = empirical_means(priors, success, pulls)
    intents = np.empty(n, dtype=np.int64)
    for p in range(n):
        if previous_arms is None:
            intents[p] = _init_decide_from_arrays(priors[p], n)
        else:
            intents[p] = _decide_from_arrays(means[p], pulls[p], int(previous_arms[p]), n, rho)

    reported_priors, reported_success, reported_pulls = priors, success, pulls
    reported_means = means
    if adversary is not None and adversary.report_bias != 1.0:
        p = adversary.player
        fake_priors, fake_success = distorted_report(
            priors[p], success[p], pulls[p], adversary.report_bias
        )
        reported_priors = priors.copy()
        reported_success = success.copy()
        reported_priors[p] = fake_priors
        reported_success[p] = fake_success
        reported_means = empirical_means(reported_priors, reported_success, reported_pulls)

    planner_pulls = reported_pulls.sum(axis=0)
    planner_success = reported_success.sum(axis=0)
    planner_priors = reported_priors.mean(axis=0)
    planner_means = empirical_means(planner_priors, planner_success, planner_pulls)
    intent_occ = np.bincount(intents, minlength=k)

    optimal_set = select_arm_set_arrays(planner_means, planner_pulls, n, rho)
    step2 = _step2_from_arrays(intents, optimal_set, planner_means, planner_pulls, intent_occ, rho)
    plan = step3_payments(intents, reported_means, optimal_set, step2)

    transfers = np.zeros(n)
    for p, amount in plan.charges.items():
        ledger.append(round_, p, CHARGE, amount)
        transfers[p] -= amount
    for p, amount in plan.rewards.items():
        ledger.append(round_, p, REWARD, amount)
        transfers[p] += amount

    final = np.array([plan.recommendations[p] for p in range(n)], dtype=np.int64)
    if adversary is not None and adversary.deviate_prob > 0.0 and policy_rng is not None:
        p = adversary.player
        if policy_rng.random() < adversary.deviate_prob:
            final[p] = intents[p]

    step4 = step4_verify(final, plan, reported_means, penalty, round_, ledger)
    for p, amount in step4.items():
        transfers[p] += amount

    outcome = resolve_round(final, env)
    for p in range(n):
        if not outcome.collision_flags[p]:
            arm = int(final[p])
            pulls[p, arm] += 1
            success[p, arm] += int(outcome.realized_rewards[p])

    return CispRoundResult(
        outcome=outcome,
        plan=plan,
        planner_means=planner_means,
        net_transfers=transfers,
        intents=intents,
    )


def run_cisp_round(
    players: list[BeliefState],
    previous_arms,
    env: ArmEnvironment,
    ledger: Ledger,
    round_: int,
    rho: float,
    penalty: float,
    adversary: AdversaryConfig | None = None,
    policy_rng: np.random.Generator | None = None,
) -> tuple[CispRoundResult, list[BeliefState]]:
    """Mechanism round over BeliefState players; returns result + new beliefs."""
    n = len(players)
    if n == 0:
        raise ConfigurationError("need at least one player")
    if env.n_arms <= n:
        raise ConfigurationError("need fewer players than arms (N < K)")
    priors = np.stack([p.priors for p in players])
    success = np.stack([p.success_counts for p in players])
    pulls = np.stack([p.pull_counts for p in players])
    prev = None if previous_arms is None else np.asarray(previous_arms, dtype=np.int64)
    result = cisp_round_arrays(
        priors, success, pulls, prev, env, ledger, round_, n, rho, penalty, adversary, policy_rng
    )
    updated = [
        BeliefState(priors=priors[p], success_counts=success[p], pull_counts=pulls[p], owner=players[p].owner)
        for p in range(n)
    ]
    return result, updated
