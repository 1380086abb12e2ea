"""Valuation forms and the buyer's best-response rule."""

import itertools

import numpy as np
import pytest

from seqprice.errors import InputError
from seqprice.valuation import (
    AdditiveAcrossTypes,
    BundleTable,
    UnitDemand,
    ValuationProfile,
    best_bundle,
    best_response,
    bundle_value,
    to_table,
)


def brute_force_best(valuation, prices, available):
    """Independent reference: exhaustive subset search with the tie rules
    (max utility, then max value, then lexicographically smallest id tuple),
    buying only when utility > 0 or utility == 0 with positive value."""
    best = (0.0, 0.0, ())
    for r in range(1, len(available) + 1):
        for items in itertools.combinations(sorted(available), r):
            b = frozenset(items)
            v = valuation.value(b)
            u = v - sum(prices[j] for j in items)
            cand = (u, v, items)
            if (cand[0], cand[1]) > (best[0], best[1]) or (
                cand[0] == best[0] and cand[1] == best[1] and cand[2] < best[2]
            ):
                best = cand
    u, v, items = best
    if u > 0 or (u == 0 and v > 0):
        return frozenset(items)
    return frozenset()


def test_unit_demand_bundle_is_max_inside():
    v = UnitDemand((3.0, 7.0, 5.0))
    assert v.value(frozenset()) == 0.0
    assert v.value(frozenset({0})) == 3.0
    assert v.value(frozenset({0, 2})) == 5.0
    assert v.value(frozenset({0, 1, 2})) == 7.0


def test_unit_demand_rejects_negative_values():
    with pytest.raises(InputError):
        UnitDemand((1.0, -0.5))


def test_additive_counts_first_unit_per_type():
    v = AdditiveAcrossTypes(item_types=(0, 0, 1), type_values=(4.0, 9.0))
    assert v.value(frozenset({0, 1})) == 4.0
    assert v.value(frozenset({0, 2})) == 13.0
    assert v.value(frozenset({0, 1, 2})) == 13.0
    assert v.value(frozenset()) == 0.0


def test_additive_validates_type_ids():
    with pytest.raises(InputError):
        AdditiveAcrossTypes(item_types=(0, 2), type_values=(1.0, 1.0))


def test_bundle_table_lookup_and_default_zero():
    t = BundleTable.from_dict(2, {frozenset({0}): 2.0, frozenset({0, 1}): 3.0})
    assert t.value(frozenset({0})) == 2.0
    assert t.value(frozenset({1})) == 0.0
    assert t.value(frozenset({0, 1})) == 3.0


def test_to_table_matches_source_valuation():
    v = AdditiveAcrossTypes(item_types=(0, 1, 1), type_values=(2.0, 5.0))
    t = to_table(v)
    for r in range(4):
        for items in itertools.combinations(range(3), r):
            b = frozenset(items)
            assert t.value(b) == v.value(b)


def test_buy_rule_strictly_positive_utility():
    v = UnitDemand((2.0,))
    bundle, util = best_bundle(v, {0: 3.0}, frozenset({0}))
    assert bundle == frozenset()
    assert util == 0.0


def test_buy_rule_zero_utility_positive_value_buys():
    # Indifferent buyer with positive value takes the item.
    v = UnitDemand((2.0,))
    bundle, util = best_bundle(v, {0: 2.0}, frozenset({0}))
    assert bundle == frozenset({0})
    assert util == 0.0


def test_buy_rule_zero_value_never_buys_at_zero_price():
    v = UnitDemand((0.0,))
    bundle, _ = best_bundle(v, {0: 0.0}, frozenset({0}))
    assert bundle == frozenset()


def test_tie_breaks_prefer_higher_value_then_lower_id():
    # items 0 and 1 give equal utility 1, item 1 has the higher value
    v = UnitDemand((3.0, 5.0, 5.0))
    bundle, _ = best_bundle(v, {0: 2.0, 1: 4.0, 2: 4.0}, frozenset({0, 1, 2}))
    assert bundle == frozenset({1})
    # equal utility and equal value: lowest id
    bundle, _ = best_bundle(v, {0: 2.0, 1: 4.0, 2: 4.0}, frozenset({1, 2}))
    assert bundle == frozenset({1})


def test_best_bundle_requires_prices_for_available_items():
    v = UnitDemand((1.0, 1.0))
    with pytest.raises(InputError):
        best_bundle(v, {0: 0.5}, frozenset({0, 1}))
    with pytest.raises(InputError):
        best_bundle(v, {0: -0.1, 1: 0.5}, frozenset({0, 1}))


def test_best_response_returns_payment():
    profile = ValuationProfile(2, (UnitDemand((5.0, 1.0)), UnitDemand((0.0, 4.0))))
    bundle, payment = best_response(profile, 0, {0: 2.0, 1: 0.5}, frozenset({0, 1}))
    assert bundle == frozenset({0})
    assert payment == 2.0
    with pytest.raises(InputError):
        best_response(profile, 2, {0: 1.0, 1: 1.0}, frozenset({0, 1}))


def test_profile_checks_item_counts():
    with pytest.raises(InputError):
        ValuationProfile(2, (UnitDemand((1.0,)),))
    with pytest.raises(InputError):
        bundle_value(
            ValuationProfile(1, (UnitDemand((1.0,)),)), 0, frozenset({3})
        )


@pytest.mark.parametrize("form", ["unit", "additive", "table"])
def test_best_bundle_matches_exhaustive_search(form):
    rng = np.random.default_rng(20240 + len(form))
    for _ in range(400):
        m = int(rng.integers(1, 5))
        if form == "unit":
            v = UnitDemand(tuple(rng.integers(0, 5, size=m) * 0.5))
        elif form == "additive":
            n_types = int(rng.integers(1, m + 1))
            types = tuple(int(t) for t in rng.integers(0, n_types, size=m))
            types = tuple(t % (max(types) + 1) for t in types)
            v = AdditiveAcrossTypes(
                types, tuple(rng.integers(0, 5, size=max(types) + 1) * 0.5)
            )
        else:
            entries = {}
            for r in range(1, m + 1):
                for items in itertools.combinations(range(m), r):
                    if rng.random() < 0.7:
                        entries[frozenset(items)] = float(rng.integers(0, 5)) * 0.5
            v = BundleTable.from_dict(m, entries)
        prices = {j: float(rng.integers(0, 5)) * 0.5 for j in range(m)}
        avail_arr = rng.random(m) < 0.8
        if not avail_arr.any():
            avail_arr[0] = True
        available = frozenset(int(j) for j in np.flatnonzero(avail_arr))
        got, _ = best_bundle(v, prices, available)
        want = brute_force_best(v, prices, available)
        assert got == want, (form, prices, sorted(available))
