"""Exact solvers for regime-mixture settings with iid agents.

These settings draw a hidden regime, then every agent's scalar value iid
from the regime's distribution; items are identical copies.  Agents are
exchangeable, so the optimal adaptive mechanism only needs (number of agents
left, number of items left, posterior over regimes), and the posterior is a
product of per-round likelihood updates kept as exact fractions.

Three solvers:

* :func:`regime_optimum` -- full adaptive optimum (and, with one regime,
  also the optimum for the agents/items-left statistic: iid values make
  history uninformative).
* :func:`psp_frontier` -- exact optimum over per-agent static price
  sequences, by a suffix frontier of per-(regime, stock) value vectors with
  dominance pruning (sound: the backup is monotone in the continuation).
* :func:`uniform_asp` -- exact optimum over a single anonymous price shared
  by every copy, every agent, and every round.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from seqprice.errors import SizeBudgetError, UnsupportedSettingError
from seqprice.mechanism import Objective
from seqprice.oracle.grids import candidate_prices
from seqprice.oracle.tree import PolicyTree, TreeNode
from seqprice.settings import SettingSpec

TREE_BUDGET = 50_000
FRONTIER_BUDGET = 200_000


def _regime_setup(spec: SettingSpec, objective: Objective):
    if spec.regimes is None:
        raise UnsupportedSettingError(
            f"setting {spec.name!r} has no iid regime structure"
        )
    if not spec.identical_items or spec.valuation_kind != "unit_demand":
        raise UnsupportedSettingError(
            "regime solvers need identical items and unit-demand agents"
        )
    grid = candidate_prices(spec, anonymous=True, objective=objective)
    prices = grid.merged_scalar()
    regimes = spec.regimes
    weights = tuple(w for w, _ in regimes)
    dists = tuple(dist for _, dist in regimes)
    return prices, weights, dists


def _buys(v: float, p: float) -> bool:
    return v > p or (v == p and v > 0)


def _buy_prob(dist, p: float) -> Fraction:
    return sum((q for v, q in dist if _buys(v, p)), Fraction(0))


def _buy_welfare(dist, p: float) -> float:
    return float(sum(float(q) * v for v, q in dist if _buys(v, p)))


def regime_optimum(
    spec: SettingSpec,
    objective: Objective,
    build_tree: bool = False,
) -> tuple[float, Optional[PolicyTree]]:
    """Optimal adaptive mechanism value for an iid regime-mixture setting."""
    prices, weights, dists = _regime_setup(spec, objective)
    if objective is Objective.MAXMIN:
        raise UnsupportedSettingError(
            "the regime solver handles welfare and revenue only"
        )
    n, m = spec.n, spec.m
    n_regimes = len(dists)
    memo: dict = {}

    buy_prob = {
        (r, p): _buy_prob(dists[r], p) for r in range(n_regimes) for p in prices
    }
    buy_welf = {
        (r, p): _buy_welfare(dists[r], p) for r in range(n_regimes) for p in prices
    }

    def rec(a: int, i: int, beta: tuple[Fraction, ...]) -> float:
        if a == 0 or i == 0:
            return 0.0
        key = (a, i, beta)
        hit = memo.get(key)
        if hit is not None:
            return hit[0]
        best_value, best_price = float("-inf"), None
        for p in prices:
            qs = [buy_prob[(r, p)] for r in range(n_regimes)]
            total_buy = sum((b * q for b, q in zip(beta, qs)), Fraction(0))
            if objective is Objective.REVENUE:
                imm = float(total_buy) * p
            else:
                imm = sum(float(b) * buy_welf[(r, p)] for r, b in enumerate(beta))
            value = imm
            if total_buy > 0:
                beta_buy = tuple(b * q / total_buy for b, q in zip(beta, qs))
                value += float(total_buy) * rec(a - 1, i - 1, beta_buy)
            if total_buy < 1:
                stay = 1 - total_buy
                beta_dec = tuple(b * (1 - q) / stay for b, q in zip(beta, qs))
                value += float(stay) * rec(a - 1, i, beta_dec)
            if value > best_value:
                best_value, best_price = value, p
        memo[key] = (best_value, best_price)
        return best_value

    root_beta = weights
    value = rec(n, m, root_beta)
    tree = None
    if build_tree:
        count = 0

        def build(a: int, i: int, beta) -> Optional[TreeNode]:
            nonlocal count
            if a == 0 or i == 0:
                return None
            count += 1
            if count > TREE_BUDGET:
                raise SizeBudgetError("materialized tree too large")
            node_value, p = memo[(a, i, beta)]
            agent = n - a
            sold = m - i
            node = TreeNode(
                agent=agent,
                prices={j: p for j in range(sold, m)},
                value=node_value,
            )
            qs = [buy_prob[(r, p)] for r in range(len(dists))]
            total_buy = sum((b * q for b, q in zip(beta, qs)), Fraction(0))
            if total_buy > 0:
                beta_buy = tuple(b * q / total_buy for b, q in zip(beta, qs))
                child = build(a - 1, i - 1, beta_buy)
                if child is not None:
                    node.children[frozenset({sold})] = child
            if total_buy < 1:
                stay = 1 - total_buy
                beta_dec = tuple(b * (1 - q) / stay for b, q in zip(beta, qs))
                child = build(a - 1, i, beta_dec)
                if child is not None:
                    node.children[frozenset()] = child
            return node

        try:
            root = build(n, m, root_beta)
            tree = PolicyTree(
                setting=spec.name,
                objective=objective.value,
                kind="price_allocation_matrix",
                value=value,
                root=root,
            )
        except SizeBudgetError:
            tree = None
    return value, tree


def psp_frontier(
    spec: SettingSpec, objective: Objective
) -> tuple[float, tuple[float, ...]]:
    """Exact optimum over personalized static prices, iid regime settings.

    Agents are exchangeable, so an assignment of static prices to agents is
    a sequence p_1..p_n along the visiting order.  Suffix value vectors are
    indexed by (regime, copies left); the frontier keeps the nondominated
    ones.  Returns (value, price sequence).
    """
    if objective is Objective.MAXMIN:
        raise UnsupportedSettingError(
            "the frontier solver handles welfare and revenue only"
        )
    prices, weights, dists = _regime_setup(spec, objective)
    n, m = spec.n, spec.m
    n_regimes = len(dists)
    dims = [(r, i) for r in range(n_regimes) for i in range(1, m + 1)]
    idx = {d: k for k, d in enumerate(dims)}

    buy_prob = {
        (r, p): float(_buy_prob(dists[r], p))
        for r in range(n_regimes)
        for p in prices
    }
    buy_welf = {
        (r, p): _buy_welfare(dists[r], p) for r in range(n_regimes) for p in prices
    }

    def combine(p: float, f: tuple) -> tuple:
        out = []
        for r, i in dims:
            q = buy_prob[(r, p)]
            imm = buy_prob[(r, p)] * p if objective is Objective.REVENUE else buy_welf[(r, p)]
            down = f[idx[(r, i - 1)]] if i > 1 else 0.0
            out.append(imm + q * down + (1.0 - q) * f[idx[(r, i)]])
        return tuple(out)

    def prune(front: list) -> list:
        # keep nondominated vectors; ties keep the lexicographically first seq
        kept: list = []
        for seq, vec in front:
            dominated = False
            for _, other in kept:
                if all(o >= v for o, v in zip(other, vec)):
                    dominated = True
                    break
            if not dominated:
                kept = [
                    (s, o)
                    for s, o in kept
                    if not all(v >= x for v, x in zip(vec, o))
                ]
                kept.append((seq, vec))
        return kept

    front: list = [((), tuple(0.0 for _ in dims))]
    for _ in range(n):
        grown = [
            ((p,) + seq, combine(p, vec)) for p in prices for seq, vec in front
        ]
        front = prune(grown)
        if len(front) > FRONTIER_BUDGET:
            raise SizeBudgetError(
                f"personalized static price frontier exceeded {FRONTIER_BUDGET}"
            )
    best_value, best_seq = float("-inf"), ()
    for seq, vec in front:
        value = sum(float(w) * vec[idx[(r, m)]] for r, w in enumerate(weights))
        if value > best_value:
            best_value, best_seq = value, seq
    return best_value, best_seq


def uniform_asp(spec: SettingSpec, objective: Objective) -> tuple[float, float]:
    """Exact optimum over one anonymous price, iid regime settings.

    The price is fixed up front and shared by every copy and every agent.
    Returns (value, price).
    """
    if objective is Objective.MAXMIN:
        raise UnsupportedSettingError(
            "the anonymous price solver handles welfare and revenue only"
        )
    prices, weights, dists = _regime_setup(spec, objective)
    memo: dict = {}

    def eval_regime(r: int, p: float, agents: int, stock: int) -> float:
        if agents == 0 or stock == 0:
            return 0.0
        key = (r, p, agents, stock)
        hit = memo.get(key)
        if hit is not None:
            return hit
        q = _buy_prob(dists[r], p)
        imm = (
            float(q) * p
            if objective is Objective.REVENUE
            else _buy_welfare(dists[r], p)
        )
        value = (
            imm
            + float(q) * eval_regime(r, p, agents - 1, stock - 1)
            + float(1 - q) * eval_regime(r, p, agents - 1, stock)
        )
        memo[key] = value
        return value

    best_value, best_price = float("-inf"), 0.0
    for p in prices:
        value = sum(
            float(w) * eval_regime(r, p, spec.n, spec.m)
            for r, w in enumerate(weights)
        )
        if value > best_value:
            best_value, best_price = value, p
    return best_value, best_price
