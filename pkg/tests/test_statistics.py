"""Observation statistics: lengths, encodings, and class constraints."""

import numpy as np
import pytest

from seqprice.errors import InputError
from seqprice.mechanism import Action, apply_round, initial_state
from seqprice.statistics import (
    STATISTIC_KINDS,
    check_kind,
    constrain,
    make_statistic,
    statistic_length,
)
from seqprice.valuation import UnitDemand, ValuationProfile


def test_lengths_table():
    for n, m in [(1, 1), (3, 2), (10, 1), (4, 3)]:
        assert statistic_length("none", n, m) == 0
        assert statistic_length("remaining_agents", n, m) == n
        assert statistic_length("items_agents_left", n, m) == n + m
        assert statistic_length("allocation_matrix", n, m) == n + m + n * m
        assert statistic_length("price_allocation_matrix", n, m) == n + m + 2 * n * m


def test_check_kind_rejects_unknown():
    with pytest.raises(InputError):
        check_kind("full")
    for kind in STATISTIC_KINDS:
        assert check_kind(kind) == kind


def test_class_constraints():
    assert constrain("none") == "ASP"
    assert constrain("remaining_agents") == "PSP"
    assert constrain("items_agents_left") == "SPM"
    assert constrain("allocation_matrix") == "SPM"
    assert constrain("price_allocation_matrix") == "SPM"


def test_initial_allocation_matrix_statistic():
    state = initial_state(3, 2)
    obs = make_statistic("allocation_matrix", state, np.zeros((3, 2)))
    np.testing.assert_array_equal(obs, [1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0])


def test_items_agents_left_after_one_sale():
    # n=3, m=2; the middle agent buys the first item.
    profile = ValuationProfile(
        2,
        (
            UnitDemand((0.0, 0.0)),
            UnitDemand((5.0, 1.0)),
            UnitDemand((0.0, 0.0)),
        ),
    )
    state = initial_state(3, 2)
    state, bought = apply_round(state, Action(1, {0: 1.0, 1: 1.0}), profile)
    assert bought == frozenset({0})
    obs = make_statistic("items_agents_left", state, np.zeros((3, 2)))
    np.testing.assert_array_equal(obs, [1, 0, 1, 0, 1])


def test_price_block_distinguishes_histories():
    # Same allocation (both declined), different posted prices: the two
    # observations must differ exactly in the trailing price block.
    profile = ValuationProfile(2, (UnitDemand((1.0, 1.0)),) * 3)
    hist_a = np.zeros((3, 2))
    hist_b = np.zeros((3, 2))
    state_a = initial_state(3, 2)
    state_b = initial_state(3, 2)
    act_a = Action(0, {0: 2.0, 1: 2.0})
    act_b = Action(0, {0: 1.5, 1: 1.5})
    for j in range(2):
        hist_a[0, j] = act_a.prices[j]
        hist_b[0, j] = act_b.prices[j]
    state_a, bought_a = apply_round(state_a, act_a, profile)
    state_b, bought_b = apply_round(state_b, act_b, profile)
    assert bought_a == bought_b == frozenset()

    obs_a = make_statistic("price_allocation_matrix", state_a, hist_a)
    obs_b = make_statistic("price_allocation_matrix", state_b, hist_b)
    head = 3 + 2 + 3 * 2
    np.testing.assert_array_equal(obs_a[:head], obs_b[:head])
    assert (obs_a[head:] != obs_b[head:]).any()
    # the allocation-only statistic cannot tell them apart
    np.testing.assert_array_equal(
        make_statistic("allocation_matrix", state_a, hist_a),
        make_statistic("allocation_matrix", state_b, hist_b),
    )


def test_price_history_shape_checked():
    state = initial_state(2, 2)
    with pytest.raises(InputError):
        make_statistic("price_allocation_matrix", state, np.zeros((2, 3)))


def test_none_statistic_is_empty():
    state = initial_state(4, 2)
    assert make_statistic("none", state, np.zeros((4, 2))).size == 0
