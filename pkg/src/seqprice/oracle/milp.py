"""Exact optimum for the agents/items-left statistic on correlated supports.

When values are correlated across agents, a policy that only sees which
agents and items remain cannot be solved by dynamic programming: the true
posterior differs across histories that share a statistic value, and a DP
that conditions on the posterior would grant the policy information it does
not have.  Instead the deterministic-policy optimum is a mixed-integer
program over realization flows:

* binary a[node, action]: the policy's choice at each statistic value
  (node = (set of remaining agents, copies sold); one choice per node,
  identical copies collapse to a count and a scalar price);
* continuous x[profile, node, action]: trajectory flow of one support
  profile.  Given an integral policy, each profile walks a deterministic
  path, so flow conservation plus x <= a forces x to be that path's
  indicator, and the LP relaxation stays tight.

The objective collects the immediate gain (welfare or revenue) on each
buying transition, weighted by the profile probability.  The optimum over
deterministic statistic-measurable policies is the relevant quantity:
randomized policies are mixtures of deterministic ones, so they never help
a linear objective.  Identical items only (scalar prices).
"""

from __future__ import annotations

from itertools import combinations

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

from seqprice.errors import SizeBudgetError, UnsupportedSettingError
from seqprice.mechanism import Objective
from seqprice.oracle.grids import candidate_prices
from seqprice.settings import SettingSpec, support_values

NODE_ACTION_BUDGET = 20_000


def _buys(v: float, p: float) -> bool:
    return v > p or (v == p and v > 0)


def items_agents_left_optimum(
    spec: SettingSpec, objective: Objective = Objective.WELFARE
) -> float:
    """Exact deterministic-policy optimum under the agents/items-left statistic."""
    if objective not in (Objective.WELFARE, Objective.REVENUE):
        raise UnsupportedSettingError(
            "the statistic-constrained program handles welfare and revenue"
        )
    if not spec.identical_items or spec.valuation_kind != "unit_demand":
        raise UnsupportedSettingError(
            "the statistic-constrained program needs identical items and "
            "unit-demand agents"
        )
    values, fracs = support_values(spec)
    scalars = values[:, :, 0]  # (K, n) one value per agent under identical items
    probs = np.array([float(p) for p in fracs])
    n, m = spec.n, spec.m
    n_support = len(probs)
    grid = candidate_prices(spec, anonymous=False, objective=objective)
    agent_grid = [grid.item_grid(i, 0) for i in range(n)]

    # Decision nodes: (remaining agent set, copies sold < m); every subset is
    # reachable because each round removes exactly the visited agent.
    nodes: list[tuple[frozenset, int]] = []
    node_id: dict[tuple[frozenset, int], int] = {}
    full = frozenset(range(n))
    for size in range(n, 0, -1):
        visited = n - size
        for rem in combinations(range(n), size):
            rset = frozenset(rem)
            for sold in range(0, min(visited, m - 1) + 1):
                key = (rset, sold)
                node_id[key] = len(nodes)
                nodes.append(key)

    actions: list[tuple[int, int, float]] = []  # (node index, agent, price)
    node_actions: list[list[int]] = [[] for _ in nodes]
    for idx, (rset, sold) in enumerate(nodes):
        for agent in sorted(rset):
            for price in agent_grid[agent]:
                node_actions[idx].append(len(actions))
                actions.append((idx, agent, price))
    n_actions = len(actions)
    if n_actions > NODE_ACTION_BUDGET:
        raise SizeBudgetError(
            f"statistic-constrained program for {spec.name!r} needs "
            f"{n_actions} node-actions (budget {NODE_ACTION_BUDGET})"
        )

    # Variable layout: a-block (n_actions binaries), then per-profile flow
    # blocks x[k] of n_actions continuous variables.
    def xvar(k: int, action: int) -> int:
        return n_actions + k * n_actions + action

    n_vars = n_actions * (1 + n_support)
    obj = np.zeros(n_vars)
    rows, cols, data = [], [], []
    lhs, rhs = [], []

    def add_row(coeffs: list[tuple[int, float]], lo: float, hi: float) -> None:
        r = len(lhs)
        for c, v in coeffs:
            rows.append(r)
            cols.append(c)
            data.append(v)
        lhs.append(lo)
        rhs.append(hi)

    # one action per node
    for idx in range(len(nodes)):
        add_row([(a, 1.0) for a in node_actions[idx]], 1.0, 1.0)

    # x <= a
    for k in range(n_support):
        for a in range(n_actions):
            add_row([(xvar(k, a), 1.0), (a, -1.0)], -np.inf, 0.0)

    # flow conservation per profile; inflow[(k, node)] collects coefficients
    inflow: dict[tuple[int, int], list[int]] = {}
    root = node_id[(full, 0)]
    for a_idx, (idx, agent, price) in enumerate(actions):
        rset, sold = nodes[idx]
        sub = rset - {agent}
        for k in range(n_support):
            buy = _buys(scalars[k, agent], price)
            if buy:
                gain = price if objective is Objective.REVENUE else scalars[k, agent]
                obj[xvar(k, a_idx)] = probs[k] * gain
            succ = (sub, sold + (1 if buy else 0))
            if sub and succ[1] < m:
                inflow.setdefault((k, node_id[succ]), []).append(a_idx)

    for k in range(n_support):
        add_row([(xvar(k, a), 1.0) for a in node_actions[root]], 1.0, 1.0)
        for idx in range(len(nodes)):
            if idx == root:
                continue
            coeffs = [(xvar(k, a), 1.0) for a in node_actions[idx]]
            coeffs += [
                (xvar(k, a), -1.0) for a in inflow.get((k, idx), [])
            ]
            add_row(coeffs, 0.0, 0.0)

    constraint = LinearConstraint(
        sparse.csr_matrix(
            (data, (rows, cols)), shape=(len(lhs), n_vars)
        ),
        np.array(lhs),
        np.array(rhs),
    )
    integrality = np.zeros(n_vars)
    integrality[:n_actions] = 1
    result = milp(
        c=-obj,
        constraints=constraint,
        integrality=integrality,
        bounds=Bounds(0.0, 1.0),
    )
    if not result.success:
        raise SizeBudgetError(
            f"statistic-constrained program for {spec.name!r} did not solve: "
            f"{result.message}"
        )
    return float(-result.fun)
