"""Exact optimum when agents' values are independent across agents.

Independence makes past purchases uninformative about the remaining agents,
so (remaining agents, remaining items) is a sufficient statistic: the DP
recurses over these pairs directly, with no belief tracking.  This is both
an independent route to the full optimum (the belief solver must agree) and
the exact value of policies restricted to the agents/items-left statistic.

The per-state action values Q(agent, agents_left, items_left) are exposed;
they are the subproblem table an analyst reads off the solved setting.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import product
from typing import Optional

from seqprice.errors import SizeBudgetError, UnsupportedSettingError
from seqprice.mechanism import Objective
from seqprice.oracle.grids import candidate_prices, item_price_classes
from seqprice.oracle.tree import PolicyTree, TreeNode
from seqprice.settings import SettingSpec
from seqprice.valuation import UnitDemand, best_bundle

STATE_BUDGET = 1_000_000


class IndependentSolver:
    def __init__(self, spec: SettingSpec, objective: Objective):
        if spec.independent_dists is None:
            raise UnsupportedSettingError(
                f"setting {spec.name!r} has no per-agent independent distributions"
            )
        if 2 ** spec.n * 2 ** spec.m > STATE_BUDGET:
            raise SizeBudgetError(
                f"independent solve of {spec.name!r} needs "
                f"{2 ** spec.n * 2 ** spec.m} states"
            )
        self.spec = spec
        self.objective = objective
        if objective is Objective.MAXMIN:
            raise UnsupportedSettingError(
                "the independent solver handles welfare and revenue only"
            )
        self.grid = candidate_prices(spec, anonymous=False, objective=objective)
        self.item_classes = item_price_classes(spec)
        # per agent: list of (UnitDemand, value tuple, probability)
        self.dists = [
            [(UnitDemand(vec), vec, p) for vec, p in agent_dist]
            for agent_dist in spec.independent_dists
        ]
        self.memo: dict = {}
        self.q: dict = {}

    def _price_actions(self, agent: int, items: tuple[int, ...]):
        # one price per class of identical items; future rounds reprice, so
        # spreading prices over interchangeable copies adds nothing
        groups = [
            [j for j in items if j in cls]
            for cls in self.item_classes
            if any(j in cls for j in items)
        ]
        grids = [self.grid.item_grid(agent, g[0]) for g in groups]
        for combo in product(*grids):
            yield {j: p for g, p in zip(groups, combo) for j in g}

    def value(self, agents: frozenset, items: frozenset) -> float:
        if not agents or not items:
            return 0.0
        key = (agents, items)
        hit = self.memo.get(key)
        if hit is not None:
            return hit[0]
        item_tuple = tuple(sorted(items))
        best_value, best_action, best_children = float("-inf"), None, None
        for agent in sorted(agents):
            sub_agents = agents - {agent}
            agent_best = float("-inf")
            agent_action = None
            agent_children = None
            for prices in self._price_actions(agent, item_tuple):
                total = 0.0
                children = {}
                for valuation, vec, prob in self.dists[agent]:
                    bundle, _ = best_bundle(valuation, prices, items)
                    if self.objective is Objective.REVENUE:
                        imm = sum(prices[j] for j in bundle)
                    else:
                        imm = valuation.value(bundle)
                    sub = self.value(sub_agents, items - bundle)
                    total += float(prob) * (imm + sub)
                    children[bundle] = (sub_agents, items - bundle)
                if total > agent_best:
                    agent_best, agent_action, agent_children = (
                        total,
                        dict(prices),
                        children,
                    )
            self.q[(agent, agents, items)] = agent_best
            if agent_best > best_value:
                best_value = agent_best
                best_action = (agent, agent_action)
                best_children = agent_children
        self.memo[key] = (best_value, best_action, best_children)
        return best_value

    def build_tree(self, agents: frozenset, items: frozenset) -> Optional[TreeNode]:
        entry = self.memo.get((agents, items))
        if entry is None or entry[1] is None:
            return None
        value, (agent, prices), children = entry
        node = TreeNode(agent=agent, prices=prices, value=value)
        for bundle, (sub_agents, sub_items) in children.items():
            child = self.build_tree(sub_agents, sub_items)
            if child is not None:
                node.children[bundle] = child
        return node


def independent_optimum(
    spec: SettingSpec, objective: Objective, build_tree: bool = True
) -> tuple[float, Optional[PolicyTree], IndependentSolver]:
    """Optimal value over (agents level, items level)-measurable policies.

    For independent settings this equals the unrestricted optimum.  Returns
    the solver too, whose ``q`` dict maps (agent, agents_left, items_left)
    to the value of visiting that agent there under optimal prices.
    """
    solver = IndependentSolver(spec, objective)
    agents = frozenset(range(spec.n))
    items = frozenset(range(spec.m))
    value = solver.value(agents, items)
    tree = None
    if build_tree:
        root = solver.build_tree(agents, items)
        if root is not None:
            tree = PolicyTree(
                setting=spec.name,
                objective=objective.value,
                kind="items_agents_left",
                value=value,
                root=root,
            )
    return value, tree, solver


def q_table(
    spec: SettingSpec, objective: Objective
) -> dict[tuple[int, frozenset, object], float]:
    """Subproblem values Q(agent, agents_left, items_left).

    For identical-item settings the items key is the count of remaining
    items (states differing only in which copies remain coincide); otherwise
    it is the frozenset of remaining item ids.
    """
    _, _, solver = independent_optimum(spec, objective, build_tree=False)
    if not spec.identical_items:
        return dict(solver.q)
    out: dict[tuple[int, frozenset, object], float] = {}
    for (agent, agents, items), value in solver.q.items():
        key = (agent, agents, len(items))
        if key in out and abs(out[key] - value) > 1e-9:
            raise AssertionError(
                "identical-item states with equal counts disagree; "
                "item identity leaked into the solve"
            )
        out[key] = value
    return out
