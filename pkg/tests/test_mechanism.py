"""Round transition, state invariants, and objective formulas."""

import itertools

import numpy as np
import pytest

from seqprice.errors import InputError, ProtocolError
from seqprice.mechanism import (
    Action,
    Objective,
    apply_round,
    initial_state,
    objective_value,
)
from seqprice.settings import enumerate_support, get_setting
from seqprice.valuation import UnitDemand, ValuationProfile


def two_agent_profile(v0, v1):
    return ValuationProfile(
        len(v0), (UnitDemand(tuple(v0)), UnitDemand(tuple(v1)))
    )


def test_initial_state_shape():
    s = initial_state(3, 2)
    assert s.remaining_agents == frozenset({0, 1, 2})
    assert s.remaining_items == frozenset({0, 1})
    assert s.round == 0
    assert not s.terminal
    with pytest.raises(InputError):
        initial_state(0, 1)


def test_buyer_with_value_three_buys_at_price_two():
    profile = two_agent_profile((3.0,), (1.0,))
    s = initial_state(2, 1)
    s, bought = apply_round(s, Action(0, {0: 2.0}), profile)
    assert bought == frozenset({0})
    assert s.payments[0] == 2.0
    assert s.allocation[0] == frozenset({0})
    assert s.remaining_items == frozenset()
    assert s.round == 1


def test_decline_transition_only_removes_agent():
    profile = two_agent_profile((1.0,), (1.0,))
    s0 = initial_state(2, 1)
    s1, bought = apply_round(s0, Action(0, {0: 2.0}), profile)
    assert bought == frozenset()
    assert s1.remaining_items == s0.remaining_items
    assert s1.allocation == s0.allocation
    assert s1.payments == s0.payments
    assert s1.remaining_agents == frozenset({1})


def test_zero_prices_allocate_both_items():
    # Two positive-value agents at price 0 both buy.
    profile = two_agent_profile((3.0, 3.0), (1.0, 1.0))
    s = initial_state(2, 2)
    s, _ = apply_round(s, Action(0, {0: 0.0, 1: 0.0}), profile)
    s, _ = apply_round(s, Action(1, {1: 0.0}), profile)
    assert s.remaining_items == frozenset()
    assert s.payments == (0.0, 0.0)
    assert s.allocation[0] == frozenset({0})
    assert s.allocation[1] == frozenset({1})


def test_apply_round_rejects_bad_actions():
    profile = two_agent_profile((1.0,), (1.0,))
    s = initial_state(2, 1)
    with pytest.raises(InputError):
        apply_round(s, Action(5, {0: 0.0}), profile)
    with pytest.raises(InputError):
        apply_round(s, Action(0, {}), profile)  # missing price
    with pytest.raises(InputError):
        apply_round(s, Action(0, {0: -1.0}), profile)
    s1, _ = apply_round(s, Action(0, {0: 0.5}), profile)
    with pytest.raises(ProtocolError):
        apply_round(s1, Action(0, {0: 0.5}), profile)  # agent revisited
    with pytest.raises(ProtocolError):
        apply_round(s1, Action(1, {0: 0.5}), profile)  # item already sold


def test_objective_formulas():
    profile = two_agent_profile((3.0,), (1.0,))
    alloc = (frozenset({0}), frozenset())
    pay = (2.0, 0.0)
    assert objective_value(Objective.WELFARE, alloc, pay, profile) == 3.0
    assert objective_value(Objective.REVENUE, alloc, pay, profile) == 2.0
    assert objective_value(Objective.MAXMIN, alloc, pay, profile) == 0.0
    empty = (frozenset(), frozenset())
    zeros = (0.0, 0.0)
    assert objective_value(Objective.WELFARE, empty, zeros, profile) == 0.0
    assert objective_value(Objective.REVENUE, empty, zeros, profile) == 0.0
    assert objective_value(Objective.MAXMIN, empty, zeros, profile) == 0.0


def test_maxmin_includes_unallocated_zeros():
    profile = two_agent_profile((3.0, 1.0), (2.0, 2.0))
    alloc = (frozenset({0}), frozenset({1}))
    assert objective_value(Objective.MAXMIN, alloc, (0, 0), profile) == 2.0
    alloc = (frozenset({0, 1}), frozenset())
    assert objective_value(Objective.MAXMIN, alloc, (0, 0), profile) == 0.0


def test_every_episode_terminates_after_n_rounds():
    # Exhaustive over a finite discrete setting: all value realizations, a
    # fixed (order, price) script; disjointness holds at every step.
    spec = get_setting("prop2")
    for profile, _ in enumerate_support(spec):
        s = initial_state(spec.n, spec.m)
        for i in range(spec.n):
            prices = {j: 2.0 for j in s.remaining_items}
            s, _ = apply_round(s, Action(i, prices), profile)
            allocated = [j for b in s.allocation for j in b]
            assert len(allocated) == len(set(allocated))
            assert set(allocated) | set(s.remaining_items) == set(range(spec.m))
            assert not set(allocated) & set(s.remaining_items)
        assert s.terminal
        assert s.round == spec.n


def test_welfare_and_revenue_nonnegative_under_purchase_rule():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n, m = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        profile = ValuationProfile(
            m,
            tuple(
                UnitDemand(tuple(rng.integers(0, 4, size=m) * 0.5))
                for _ in range(n)
            ),
        )
        s = initial_state(n, m)
        order = rng.permutation(n)
        for i in order:
            prices = {j: float(rng.integers(0, 4)) * 0.5 for j in s.remaining_items}
            s, _ = apply_round(s, Action(int(i), prices), profile)
        welfare = objective_value(Objective.WELFARE, s.allocation, s.payments, profile)
        revenue = objective_value(Objective.REVENUE, s.allocation, s.payments, profile)
        assert welfare >= 0.0
        assert revenue >= 0.0
        # payments never exceed value received (utility >= 0 at purchase)
        assert welfare >= revenue - 1e-12
