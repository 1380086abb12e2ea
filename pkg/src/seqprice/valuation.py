"""Valuation forms and the buyer's best-response rule.

Three valuation forms are supported:

* :class:`UnitDemand` -- a value per item, bundle worth the max item inside.
* :class:`AdditiveAcrossTypes` -- items are grouped into types; the first
  unit of each type contributes that type's value, further units add nothing.
* :class:`BundleTable` -- an explicit bundle-to-value map for small ``m``.

A buyer facing posted prices purchases the utility-maximising bundle, with
ties broken toward higher total value and then toward the lexicographically
smallest item set (compared as sorted id tuples).  A bundle is bought only if
its utility is strictly positive, or zero with strictly positive value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Mapping, Union

from seqprice.errors import InputError

MAX_TABLE_ITEMS = 12


@dataclass(frozen=True)
class UnitDemand:
    """Unit-demand valuation: ``values[j]`` is the worth of item ``j`` alone."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if any(v < 0 for v in self.values):
            raise InputError("item values must be nonnegative")

    @property
    def n_items(self) -> int:
        return len(self.values)

    def value(self, bundle: frozenset[int]) -> float:
        if not bundle:
            return 0.0
        return max(self.values[j] for j in bundle)


@dataclass(frozen=True)
class AdditiveAcrossTypes:
    """One value per item type; only the first unit of a type counts.

    ``item_types[j]`` is the type id of item ``j`` and ``type_values[t]`` the
    agent's value for holding at least one unit of type ``t``.
    """

    item_types: tuple[int, ...]
    type_values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "item_types", tuple(int(t) for t in self.item_types))
        object.__setattr__(self, "type_values", tuple(float(v) for v in self.type_values))
        if any(t < 0 or t >= len(self.type_values) for t in self.item_types):
            raise InputError("item type out of range of type_values")
        if any(v < 0 for v in self.type_values):
            raise InputError("type values must be nonnegative")

    @property
    def n_items(self) -> int:
        return len(self.item_types)

    def value(self, bundle: frozenset[int]) -> float:
        seen = {self.item_types[j] for j in bundle}
        return sum(self.type_values[t] for t in seen)


@dataclass(frozen=True)
class BundleTable:
    """Explicit bundle values; bundles absent from the table are worth 0."""

    n_items: int
    entries: tuple[tuple[tuple[int, ...], float], ...]
    _map: dict[frozenset[int], float] = field(
        default_factory=dict, compare=False, repr=False
    )

    def __post_init__(self) -> None:
        if self.n_items > MAX_TABLE_ITEMS:
            raise InputError(
                f"bundle tables support at most {MAX_TABLE_ITEMS} items, got {self.n_items}"
            )
        canon = []
        for items, v in self.entries:
            key = tuple(sorted(int(j) for j in items))
            if any(j < 0 or j >= self.n_items for j in key):
                raise InputError(f"bundle {items} references an unknown item id")
            if v < 0:
                raise InputError("bundle values must be nonnegative")
            canon.append((key, float(v)))
        canon.sort()
        object.__setattr__(self, "entries", tuple(canon))
        object.__setattr__(self, "_map", {frozenset(k): v for k, v in canon})

    @classmethod
    def from_dict(cls, n_items: int, table: Mapping[frozenset[int], float]) -> "BundleTable":
        return cls(n_items, tuple((tuple(sorted(b)), v) for b, v in table.items()))

    def value(self, bundle: frozenset[int]) -> float:
        return self._map.get(frozenset(bundle), 0.0)


Valuation = Union[UnitDemand, AdditiveAcrossTypes, BundleTable]


@dataclass(frozen=True)
class ValuationProfile:
    """One valuation per agent over a common set of ``n_items`` items."""

    n_items: int
    agents: tuple[Valuation, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "agents", tuple(self.agents))
        for i, v in enumerate(self.agents):
            if v.n_items != self.n_items:
                raise InputError(
                    f"agent {i} valuation covers {v.n_items} items, expected {self.n_items}"
                )

    @property
    def n_agents(self) -> int:
        return len(self.agents)


def bundle_value(profile: ValuationProfile, agent: int, bundle: frozenset[int]) -> float:
    """Value of ``bundle`` to ``agent``; ids must be in range."""
    if not 0 <= agent < profile.n_agents:
        raise InputError(f"unknown agent id {agent}")
    bundle = frozenset(bundle)
    if any(j < 0 or j >= profile.n_items for j in bundle):
        raise InputError(f"bundle {sorted(bundle)} references an unknown item id")
    return profile.agents[agent].value(bundle)


def to_table(valuation: Valuation) -> BundleTable:
    """Expand any valuation into explicit bundle-table form (small ``m`` only)."""
    m = valuation.n_items
    if m > MAX_TABLE_ITEMS:
        raise InputError(f"cannot tabulate valuations over {m} items")
    entries = []
    for r in range(m + 1):
        for items in combinations(range(m), r):
            entries.append((items, valuation.value(frozenset(items))))
    return BundleTable(m, tuple(entries))


def _check_offer(
    valuation: Valuation, prices: Mapping[int, float], available: frozenset[int]
) -> None:
    for j in available:
        if j < 0 or j >= valuation.n_items:
            raise InputError(f"available item {j} is not a known item id")
        if j not in prices:
            raise InputError(f"no price posted for available item {j}")
        if prices[j] < 0:
            raise InputError(f"price for item {j} is negative")


def _better(
    cand: tuple[float, float, tuple[int, ...]], best: tuple[float, float, tuple[int, ...]]
) -> bool:
    # Higher utility, then higher value, then lexicographically smaller id tuple.
    if cand[0] != best[0]:
        return cand[0] > best[0]
    if cand[1] != best[1]:
        return cand[1] > best[1]
    return cand[2] < best[2]


def best_bundle(
    valuation: Valuation, prices: Mapping[int, float], available: frozenset[int]
) -> tuple[frozenset[int], float]:
    """Utility-maximising purchase from ``available`` at the posted prices.

    Returns ``(bundle, utility)``; the bundle is empty when no purchase
    clears the buy rule (utility > 0, or utility == 0 with positive value).
    Unit-demand valuations only need the singleton/empty search, and
    additive-across-types decomposes into an independent choice per type;
    both shortcuts reproduce the exhaustive subset search exactly.
    """
    available = frozenset(available)
    _check_offer(valuation, prices, available)
    if isinstance(valuation, UnitDemand):
        best = (0.0, 0.0, ())
        for j in sorted(available):
            u = valuation.values[j] - prices[j]
            cand = (u, valuation.values[j], (j,))
            if _better(cand, best):
                best = cand
    elif isinstance(valuation, AdditiveAcrossTypes):
        chosen: list[int] = []
        util = 0.0
        worth = 0.0
        by_type: dict[int, list[int]] = {}
        for j in sorted(available):
            by_type.setdefault(valuation.item_types[j], []).append(j)
        for t in sorted(by_type):
            j = min(by_type[t], key=lambda k: (prices[k], k))
            v = valuation.type_values[t]
            u = v - prices[j]
            if u > 0 or (u == 0 and v > 0):
                chosen.append(j)
                util += u
                worth += v
        best = (util, worth, tuple(sorted(chosen)))
    else:
        best = (0.0, 0.0, ())
        for r in range(1, len(available) + 1):
            for items in combinations(sorted(available), r):
                b = frozenset(items)
                v = valuation.value(b)
                u = v - sum(prices[j] for j in items)
                if _better((u, v, items), best):
                    best = (u, v, items)
    util, worth, items = best
    if util > 0 or (util == 0 and worth > 0):
        return frozenset(items), util
    return frozenset(), 0.0


def best_response(
    profile: ValuationProfile,
    agent: int,
    prices: Mapping[int, float],
    available: frozenset[int],
) -> tuple[frozenset[int], float]:
    """Bundle the agent buys from ``available`` and the payment charged."""
    if not 0 <= agent < profile.n_agents:
        raise InputError(f"unknown agent id {agent}")
    bundle, _ = best_bundle(profile.agents[agent], prices, frozenset(available))
    return bundle, sum(prices[j] for j in bundle)
