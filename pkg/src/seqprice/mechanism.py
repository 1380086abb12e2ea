"""Mechanism state and the one-visit-per-round posted-price transition.

Each round the mechanism picks a not-yet-visited agent and posts a price on
every remaining item.  The agent buys its best-response bundle, pays the sum
of the posted prices on that bundle, and leaves the market.  An episode ends
after every agent has been visited exactly once.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

from seqprice.errors import InputError, ProtocolError
from seqprice.valuation import ValuationProfile, best_response


class Objective(enum.Enum):
    WELFARE = "welfare"
    REVENUE = "revenue"
    MAXMIN = "maxmin"


@dataclass(frozen=True)
class Action:
    """Visit ``agent`` and post ``prices[j]`` on each remaining item ``j``."""

    agent: int
    prices: Mapping[int, float]


@dataclass(frozen=True)
class MechanismState:
    """Immutable snapshot of the market between rounds."""

    n_agents: int
    n_items: int
    remaining_agents: frozenset[int]
    remaining_items: frozenset[int]
    allocation: tuple[frozenset[int], ...]
    payments: tuple[float, ...]

    @property
    def round(self) -> int:
        return self.n_agents - len(self.remaining_agents)

    @property
    def terminal(self) -> bool:
        return not self.remaining_agents


def initial_state(n_agents: int, n_items: int) -> MechanismState:
    if n_agents < 1 or n_items < 1:
        raise InputError("need at least one agent and one item")
    return MechanismState(
        n_agents=n_agents,
        n_items=n_items,
        remaining_agents=frozenset(range(n_agents)),
        remaining_items=frozenset(range(n_items)),
        allocation=tuple(frozenset() for _ in range(n_agents)),
        payments=tuple(0.0 for _ in range(n_agents)),
    )


def apply_round(
    state: MechanismState, action: Action, profile: ValuationProfile
) -> tuple[MechanismState, frozenset[int]]:
    """Run one visit; returns the next state and the purchased bundle."""
    i = action.agent
    if not 0 <= i < state.n_agents:
        raise InputError(f"unknown agent id {i}")
    if i not in state.remaining_agents:
        raise ProtocolError(f"agent {i} was already visited")
    for j, p in action.prices.items():
        if not 0 <= j < state.n_items:
            raise InputError(f"unknown item id {j}")
        if j not in state.remaining_items:
            raise ProtocolError(f"item {j} was already sold")
        if p < 0:
            raise InputError(f"price for item {j} is negative")
    missing = state.remaining_items - set(action.prices)
    if missing:
        raise InputError(f"no price posted for remaining items {sorted(missing)}")

    bundle, payment = best_response(profile, i, action.prices, state.remaining_items)

    allocation = list(state.allocation)
    allocation[i] = bundle
    payments = list(state.payments)
    payments[i] = payment
    new_state = MechanismState(
        n_agents=state.n_agents,
        n_items=state.n_items,
        remaining_agents=state.remaining_agents - {i},
        remaining_items=state.remaining_items - bundle,
        allocation=tuple(allocation),
        payments=tuple(payments),
    )
    return new_state, bundle


def objective_value(
    objective: Objective,
    allocation: Sequence[frozenset[int]],
    payments: Sequence[float],
    profile: ValuationProfile,
) -> float:
    """Realised objective of a (usually complete) allocation."""
    if objective is Objective.WELFARE:
        return sum(profile.agents[i].value(b) for i, b in enumerate(allocation))
    if objective is Objective.REVENUE:
        return float(sum(payments))
    if objective is Objective.MAXMIN:
        return min(profile.agents[i].value(b) for i, b in enumerate(allocation))
    raise InputError(f"unknown objective {objective!r}")
