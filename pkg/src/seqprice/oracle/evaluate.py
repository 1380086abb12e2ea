"""Exact and sampled evaluation of concrete policies."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from seqprice.errors import SizeBudgetError, UnsupportedSettingError
from seqprice.mechanism import Action, Objective
from seqprice.episode import run_batch, run_episode, rsd_act_fn
from seqprice.oracle.beliefdp import exchangeable_classes
from seqprice.oracle.tree import PolicyTree, TreePolicy
from seqprice.settings import SettingSpec, enumerate_support, support_values

RSD_ORDER_BUDGET = 5_000
RSD_MC_EPISODES = 200_000


@dataclass(frozen=True)
class StaticSchedule:
    """A fixed visiting order and fixed per-agent item prices."""

    order: tuple[int, ...]
    prices: tuple[tuple[float, ...], ...]  # indexed by agent id, then item


class SchedulePolicy:
    """Play a static schedule as an episode policy (stateless: the round is
    recovered from how many agents remain)."""

    def __init__(self, schedule: StaticSchedule):
        self.schedule = schedule

    def act(self, observation, remaining_agents, remaining_items, mode="eval"):
        n = remaining_agents.shape[0]
        t = n - int(remaining_agents.sum())
        agent = self.schedule.order[t]
        row = self.schedule.prices[agent]
        prices = {int(j): float(row[int(j)]) for j in np.flatnonzero(remaining_items)}
        return Action(agent, prices), 0.0


PolicyLike = Union[PolicyTree, StaticSchedule, object]


def _as_policy(policy_like: PolicyLike):
    if isinstance(policy_like, PolicyTree):
        return TreePolicy(policy_like)
    if isinstance(policy_like, StaticSchedule):
        return SchedulePolicy(policy_like)
    return policy_like


def value_of_policy(
    policy_like: PolicyLike,
    spec: SettingSpec,
    objective: Optional[Objective] = None,
    kind: str = "price_allocation_matrix",
) -> float:
    """Exact expected objective of a deterministic policy on a finite support.

    The whole support is replayed through the reference episode path and
    weighted by the exact probabilities.
    """
    objective = objective or spec.objective_default
    policy = _as_policy(policy_like)
    total = 0.0
    for profile, prob in enumerate_support(spec):
        rec = run_episode(
            policy, spec, kind, objective=objective, seed=None, profile=profile
        )
        total += float(prob) * rec.objective_value
    return total


def rsd_value(
    spec: SettingSpec,
    objective: Optional[Objective] = None,
    seed: int = 0,
    mc_episodes: int = RSD_MC_EPISODES,
) -> tuple[float, bool]:
    """Random-serial-dictatorship baseline value; (value, is_exact).

    Exact when the support is enumerable and the deduplicated order count is
    small (orders of exchangeable agents share a value, and each dedup class
    has the same size, so the uniform order average is the plain average
    over canonical orders).  Otherwise a seeded Monte Carlo estimate.
    """
    objective = objective or spec.objective_default
    try:
        values, fracs = support_values(spec)
        if objective is Objective.MAXMIN:
            raise UnsupportedSettingError("maxmin goes through sampling")
        from seqprice.oracle.beliefdp import _canonical_orders
        from seqprice.oracle.static import eval_static_schedules

        orders = []
        for order in _canonical_orders(spec):
            orders.append(order)
            if len(orders) > RSD_ORDER_BUDGET:
                raise UnsupportedSettingError("too many orders for exact average")
        orders = np.array(orders, dtype=int)
        probs = np.array([float(p) for p in fracs])
        prices = np.zeros((orders.shape[0], spec.n, spec.m))
        scores = eval_static_schedules(
            values.astype(float), probs, orders, prices, objective
        )
        return float(scores.mean()), True
    except (SizeBudgetError, UnsupportedSettingError):
        rng = np.random.default_rng(seed)
        res = run_batch(
            rsd_act_fn, spec, "items_agents_left", objective=objective,
            rng=rng, count=mc_episodes,
        )
        return float(res.objective_values.mean()), False


__all__ = [
    "SchedulePolicy",
    "StaticSchedule",
    "rsd_value",
    "value_of_policy",
    "exchangeable_classes",
]
