"""Optimal adaptive mechanisms on finite supports via belief filtering.

The solver walks information sets: at each one it enumerates the agent to
visit and the prices to post (from the candidate grid), partitions the
remaining support by the resulting purchase, and recurses on the filtered
posterior.  Every reachable posterior is the prior conditioned on the set of
support points still consistent with the history, so memoization keys on
(remaining agents, remaining items, surviving support subset); histories
carrying the same information collapse.

Welfare and revenue are history-separable, so the posterior is a sufficient
memo key.  Maxmin is not: the worst-off value depends on what every agent
already received, so the per-profile minimum so far joins the key and far
fewer states collapse (small settings only).

Exactness is relative to the candidate price grid.  Only the visited agent's
purchase depends on the posted prices, so each agent's own support
thresholds are sufficient, and one representative price per support gap is
complete for single-item purchases (the golden-value tests pin the catalog
settings, including the multi-item ones).

The same recursion, restricted, yields two mechanism subclasses: a forced
visiting order (static order, adaptive prices) and a forced anonymous price
(adaptive order, one static price for everything).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Optional

import numpy as np

from seqprice.errors import SizeBudgetError, UnsupportedSettingError
from seqprice.mechanism import Objective
from seqprice.oracle.grids import candidate_prices, item_price_classes
from seqprice.oracle.tree import PolicyTree, TreeNode
from seqprice.settings import SettingSpec, support_values
from seqprice.valuation import UnitDemand, best_bundle

NODE_BUDGET = 500_000
ACTION_BUDGET = 5_000
TREE_BUDGET = 50_000
SUPPORT_BUDGET = 768
ORDER_BUDGET = 2_000

@dataclass
class AdaptiveResult:
    value: float
    tree: Optional[PolicyTree]


class _Solver:
    def __init__(
        self,
        spec: SettingSpec,
        objective: Objective,
        forced_order: Optional[tuple[int, ...]] = None,
        fixed_scalar_price: Optional[float] = None,
        node_budget: int = NODE_BUDGET,
    ):
        if spec.valuation_kind != "unit_demand":
            raise UnsupportedSettingError(
                "the adaptive solver handles unit-demand settings only"
            )
        self.spec = spec
        self.objective = objective
        self.values, self.probs = support_values(spec)
        if len(self.probs) > SUPPORT_BUDGET:
            # posterior keys are support subsets; past a few hundred points
            # the memo explodes long before the node budget trips, so fail
            # fast and let the caller fall back to a structured solver
            raise SizeBudgetError(
                f"adaptive solve of {spec.name!r} would filter beliefs over "
                f"{len(self.probs)} support points (budget {SUPPORT_BUDGET})"
            )
        self.n, self.m = spec.n, spec.m
        self.forced_order = forced_order
        self.fixed_scalar_price = fixed_scalar_price
        self.node_budget = node_budget
        self.grid = candidate_prices(spec, anonymous=False, objective=objective)
        # Copies share one price per round; future rounds reprice, so a
        # per-copy spread never changes the visited agent's options.
        self.item_classes = item_price_classes(spec)
        self.valuations = [
            [UnitDemand(tuple(self.values[k, i])) for i in range(self.n)]
            for k in range(len(self.probs))
        ]
        self.prior = tuple(float(p) for p in self.probs)
        self.memo: dict = {}
        self._bundle_cache: dict = {}
        self._check_action_budget()

    def _check_action_budget(self) -> None:
        if self.fixed_scalar_price is not None:
            return
        worst = 0
        for i in range(self.n):
            size = 1
            for group in self.item_classes:
                size *= len(self.grid.item_grid(i, group[0]))
                if size > ACTION_BUDGET:
                    break
            worst = max(worst, size)
        if worst > ACTION_BUDGET:
            raise SizeBudgetError(
                f"price action space of {self.spec.name!r} exceeds "
                f"{ACTION_BUDGET} combinations per round"
            )

    def _price_actions(self, agent: int, items: tuple[int, ...]):
        if self.fixed_scalar_price is not None:
            yield {j: self.fixed_scalar_price for j in items}
            return
        remaining = set(items)
        groups = [
            [j for j in group if j in remaining] for group in self.item_classes
        ]
        groups = [g for g in groups if g]
        grids = [self.grid.item_grid(agent, g[0]) for g in groups]
        for combo in product(*grids):
            yield {j: p for g, p in zip(groups, combo) for j in g}

    def _immediate(self, k: int, agent: int, bundle: frozenset, prices) -> float:
        if self.objective is Objective.REVENUE:
            return float(sum(prices[j] for j in bundle))
        return self.valuations[k][agent].value(bundle)

    def _agent_choices(self, remaining: frozenset, round_index: int):
        if self.forced_order is not None:
            return (self.forced_order[round_index],)
        return tuple(sorted(remaining))

    def _cached_bundle(
        self, k: int, agent: int, price_key: tuple, items: frozenset, prices
    ) -> frozenset:
        ckey = (k, agent, price_key, items)
        hit = self._bundle_cache.get(ckey)
        if hit is None:
            hit, _ = best_bundle(self.valuations[k][agent], prices, items)
            self._bundle_cache[ckey] = hit
        return hit

    # -------------------------------------------------- separable objectives

    def solve(self) -> tuple[float, object]:
        agents = frozenset(range(self.n))
        items = frozenset(range(self.m))
        subset = tuple(range(len(self.probs)))
        if self.objective is Objective.MAXMIN:
            accrued = tuple(float("inf") for _ in subset)
            value = self._rec_maxmin(agents, items, subset, accrued)
            return value, (agents, items, subset, accrued)
        value = self._rec(agents, items, subset, 1.0)
        return value, (agents, items, subset)

    def _rec(
        self, agents: frozenset, items: frozenset, subset: tuple, mass: float
    ) -> float:
        """Value conditioned on the support points in ``subset``."""
        if not agents or not items:
            return 0.0
        key = (agents, items, subset)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[0]
        if len(self.memo) >= self.node_budget:
            raise SizeBudgetError(
                f"adaptive solve of {self.spec.name!r} exceeded "
                f"{self.node_budget} information sets"
            )
        self.memo[key] = (float("-inf"), None, None)  # reserve before recursing
        item_tuple = tuple(sorted(items))
        prior = self.prior
        best_value, best_action, best_children = float("-inf"), None, None
        for agent in self._agent_choices(agents, self.n - len(agents)):
            sub_agents = agents - {agent}
            for prices in self._price_actions(agent, item_tuple):
                price_key = tuple(prices[j] for j in item_tuple)
                parts: dict[frozenset, list[int]] = {}
                for k in subset:
                    bundle = self._cached_bundle(k, agent, price_key, items, prices)
                    parts.setdefault(bundle, []).append(k)
                total = 0.0
                children = {}
                for bundle, ks in parts.items():
                    part_mass = sum(prior[k] for k in ks)
                    imm = sum(
                        prior[k] * self._immediate(k, agent, bundle, prices)
                        for k in ks
                    )
                    sub_items = items - bundle
                    sub = self._rec(sub_agents, sub_items, tuple(ks), part_mass)
                    total += (imm + part_mass * sub) / mass
                    children[bundle] = (sub_agents, sub_items, tuple(ks))
                if total > best_value:
                    best_value, best_action, best_children = (
                        total,
                        (agent, dict(prices)),
                        children,
                    )
        self.memo[key] = (best_value, best_action, best_children)
        return best_value

    # ------------------------------------------------------------- maxmin

    def _rec_maxmin(
        self, agents: frozenset, items: frozenset, subset: tuple, accrued: tuple
    ) -> float:
        prior = self.prior
        mass = sum(prior[k] for k in subset)
        if not agents:
            return (
                sum(
                    prior[k] * (0.0 if acc == float("inf") else acc)
                    for k, acc in zip(subset, accrued)
                )
                / mass
            )
        if not items:
            # every remaining agent ends with nothing
            return 0.0
        key = (agents, items, subset, accrued)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[0]
        if len(self.memo) >= self.node_budget:
            raise SizeBudgetError(
                f"adaptive solve of {self.spec.name!r} exceeded "
                f"{self.node_budget} information sets"
            )
        self.memo[key] = (float("-inf"), None, None)
        item_tuple = tuple(sorted(items))
        best_value, best_action, best_children = float("-inf"), None, None
        for agent in self._agent_choices(agents, self.n - len(agents)):
            sub_agents = agents - {agent}
            for prices in self._price_actions(agent, item_tuple):
                price_key = tuple(prices[j] for j in item_tuple)
                parts: dict[frozenset, list[int]] = {}
                for pos, k in enumerate(subset):
                    bundle = self._cached_bundle(k, agent, price_key, items, prices)
                    parts.setdefault(bundle, []).append(pos)
                total = 0.0
                children = {}
                for bundle, positions in parts.items():
                    part_mass = sum(prior[subset[pos]] for pos in positions)
                    sub_subset = tuple(subset[pos] for pos in positions)
                    sub_accrued = tuple(
                        min(
                            accrued[pos],
                            self.valuations[subset[pos]][agent].value(bundle),
                        )
                        for pos in positions
                    )
                    sub = self._rec_maxmin(
                        sub_agents, items - bundle, sub_subset, sub_accrued
                    )
                    total += (part_mass / mass) * sub
                    children[bundle] = (
                        sub_agents,
                        items - bundle,
                        sub_subset,
                        sub_accrued,
                    )
                if total > best_value:
                    best_value, best_action, best_children = (
                        total,
                        (agent, dict(prices)),
                        children,
                    )
        self.memo[key] = (best_value, best_action, best_children)
        return best_value

    # ------------------------------------------------------------- tree

    def build_tree(self, root_key, tree_budget: int = TREE_BUDGET) -> Optional[TreeNode]:
        count = 0

        def build(key) -> Optional[TreeNode]:
            nonlocal count
            entry = self.memo.get(key)
            if entry is None or entry[1] is None:
                return None
            count += 1
            if count > tree_budget:
                raise SizeBudgetError("materialized tree too large")
            value, (agent, prices), children = entry
            node = TreeNode(agent=agent, prices=prices, value=value)
            for bundle, child_key in children.items():
                remaining = child_key[0]
                items_left = child_key[1]
                if remaining and items_left:
                    child = build(child_key)
                    if child is not None:
                        node.children[bundle] = child
            return node

        try:
            return build(root_key)
        except SizeBudgetError:
            return None


def adaptive_optimum(
    spec: SettingSpec,
    objective: Objective,
    kind: str = "price_allocation_matrix",
    forced_order: Optional[tuple[int, ...]] = None,
    fixed_scalar_price: Optional[float] = None,
    build_tree: bool = True,
    node_budget: int = NODE_BUDGET,
) -> AdaptiveResult:
    """Exact optimum over history-measurable deterministic mechanisms.

    ``forced_order`` restricts to a fixed visiting order (prices stay
    adaptive); ``fixed_scalar_price`` restricts every posted price to one
    constant (order stays adaptive).
    """
    solver = _Solver(
        spec,
        objective,
        forced_order=forced_order,
        fixed_scalar_price=fixed_scalar_price,
        node_budget=node_budget,
    )
    value, root_key = solver.solve()
    tree = None
    if build_tree:
        root = solver.build_tree(root_key)
        if root is not None:
            tree = PolicyTree(
                setting=spec.name,
                objective=objective.value,
                kind=kind,
                value=value,
                root=root,
            )
    return AdaptiveResult(value=value, tree=tree)


def anonymous_price_adaptive_order(
    spec: SettingSpec, objective: Objective
) -> tuple[float, float, Optional[PolicyTree]]:
    """Best single static anonymous price with a fully adaptive order.

    Returns (value, price, tree).  The price applies to every item in every
    round; only the visiting order reacts to history.
    """
    grid = candidate_prices(spec, anonymous=True, objective=objective)
    best = (float("-inf"), 0.0, None)
    for p in grid.merged_scalar():
        res = adaptive_optimum(
            spec, objective, fixed_scalar_price=p, build_tree=True
        )
        if res.value > best[0]:
            best = (res.value, p, res.tree)
    return best


def exchangeable_classes(spec: SettingSpec) -> list[list[int]]:
    """Group agents whose swap leaves the support distribution unchanged."""
    values, probs = support_values(spec)
    table: dict[bytes, Fraction] = {}
    for k, p in enumerate(probs):
        key = values[k].tobytes()
        table[key] = table.get(key, Fraction(0)) + p

    def swappable(i: int, j: int) -> bool:
        for k, p in enumerate(probs):
            swapped = values[k].copy()
            swapped[[i, j]] = swapped[[j, i]]
            if table.get(swapped.tobytes(), None) is None:
                return False
        # probabilities must match too: aggregate swapped mass
        agg: dict[bytes, Fraction] = {}
        for k, p in enumerate(probs):
            swapped = values[k].copy()
            swapped[[i, j]] = swapped[[j, i]]
            key = swapped.tobytes()
            agg[key] = agg.get(key, Fraction(0)) + p
        return agg == table

    classes: list[list[int]] = []
    for i in range(spec.n):
        for cls in classes:
            if swappable(cls[0], i):
                cls.append(i)
                break
        else:
            classes.append([i])
    return classes


def _order_count(spec: SettingSpec) -> int:
    """Number of canonical orders: permutations modulo exchangeable swaps."""
    total = factorial(spec.n)
    for cls in exchangeable_classes(spec):
        total //= factorial(len(cls))
    return total


def _canonical_orders(spec: SettingSpec):
    """One representative order per exchangeable-swap equivalence class.

    Built by choosing, position by position, which class supplies the next
    agent; within a class agents appear in ascending id order.
    """
    classes = [sorted(cls) for cls in exchangeable_classes(spec)]
    n = spec.n
    counts = [0] * len(classes)
    prefix: list[int] = []

    def rec():
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for ci, cls in enumerate(classes):
            if counts[ci] < len(cls):
                prefix.append(cls[counts[ci]])
                counts[ci] += 1
                yield from rec()
                counts[ci] -= 1
                prefix.pop()

    yield from rec()


def best_static_order(
    spec: SettingSpec, objective: Objective
) -> tuple[float, tuple[int, ...]]:
    """Best fixed visiting order with fully adaptive prices.

    Orders of exchangeable agents are deduplicated (swapping them cannot
    change the value).
    """
    count = _order_count(spec)
    if count > ORDER_BUDGET:
        raise SizeBudgetError(
            f"static-order search of {spec.name!r} spans {count} orders "
            f"(budget {ORDER_BUDGET})"
        )
    best = (float("-inf"), None)
    for order in _canonical_orders(spec):
        res = adaptive_optimum(spec, objective, forced_order=order, build_tree=False)
        if res.value > best[0]:
            best = (res.value, order)
    return best
