"""Full-information allocation benchmarks.

The offline optimum is the best objective value attainable by an allocator
who sees the realized valuations before assigning items.  For welfare this
is the optimal-assignment welfare; revenue uses the same benchmark (an upper
bound on any mechanism's revenue); maxmin maximizes the worst-off agent's
realized value.
"""

from __future__ import annotations

from itertools import product

import numpy as np
from scipy.optimize import linear_sum_assignment

from seqprice.errors import SizeBudgetError
from seqprice.mechanism import Objective
from seqprice.valuation import (
    AdditiveAcrossTypes,
    UnitDemand,
    ValuationProfile,
)

_EXHAUSTIVE_BUDGET = 2_000_000


def _value_matrix(profile: ValuationProfile) -> np.ndarray | None:
    if all(isinstance(a, UnitDemand) for a in profile.agents):
        return np.array([a.values for a in profile.agents], dtype=float)
    return None


def _welfare_unit_demand(matrix: np.ndarray) -> float:
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    return float(matrix[rows, cols].sum())


def _welfare_additive(profile: ValuationProfile) -> float:
    # Types are independent: give each unit of a type to a distinct agent,
    # richest first.
    first = profile.agents[0]
    units = np.bincount(first.item_types, minlength=len(first.type_values))
    vals = np.array([a.type_values for a in profile.agents], dtype=float)
    total = 0.0
    for t, u in enumerate(units):
        top = np.sort(vals[:, t])[::-1][: min(u, profile.n_agents)]
        total += float(top.sum())
    return total


def _assignments(n_agents: int, n_items: int):
    if (n_agents + 1) ** n_items > _EXHAUSTIVE_BUDGET:
        raise SizeBudgetError(
            f"offline search over {n_agents} agents x {n_items} items is too large"
        )
    return product(range(n_agents + 1), repeat=n_items)


def _welfare_exhaustive(profile: ValuationProfile) -> float:
    best = 0.0
    for assign in _assignments(profile.n_agents, profile.n_items):
        total = 0.0
        for i in range(profile.n_agents):
            bundle = frozenset(j for j, t in enumerate(assign) if t == i)
            if bundle:
                total += profile.agents[i].value(bundle)
        best = max(best, total)
    return best


def _maxmin_unit_demand(matrix: np.ndarray) -> float:
    n, m = matrix.shape
    if n > m:
        return 0.0
    for theta in sorted({v for v in matrix.ravel() if v > 0}, reverse=True):
        ok = (matrix >= theta).astype(float)
        rows, cols = linear_sum_assignment(ok, maximize=True)
        if ok[rows, cols].sum() == n:
            return float(theta)
    return 0.0


def _maxmin_exhaustive(profile: ValuationProfile) -> float:
    best = 0.0
    for assign in _assignments(profile.n_agents, profile.n_items):
        worst = min(
            profile.agents[i].value(
                frozenset(j for j, t in enumerate(assign) if t == i)
            )
            for i in range(profile.n_agents)
        )
        best = max(best, worst)
    return best


def offline_optimum(profile: ValuationProfile, objective: Objective) -> float:
    """Best objective value over all allocations of the realized profile."""
    matrix = _value_matrix(profile)
    if objective in (Objective.WELFARE, Objective.REVENUE):
        if matrix is not None:
            return _welfare_unit_demand(matrix)
        if all(isinstance(a, AdditiveAcrossTypes) for a in profile.agents) and (
            len({a.item_types for a in profile.agents}) == 1
        ):
            return _welfare_additive(profile)
        return _welfare_exhaustive(profile)
    if matrix is not None:
        return _maxmin_unit_demand(matrix)
    return _maxmin_exhaustive(profile)


def offline_batch(spec, values: np.ndarray, objective: Objective) -> np.ndarray:
    """Vectorized :func:`offline_optimum` over a batch of sampled values.

    ``values`` has the shape produced by ``spec.sample_batch``: item-level
    ``(E, n, m)`` for unit-demand settings, type-level ``(E, n, T)`` for the
    additive setting.
    """
    count = values.shape[0]
    if spec.valuation_kind == "additive":
        if objective in (Objective.WELFARE, Objective.REVENUE):
            units = np.bincount(spec.item_types, minlength=values.shape[2])
            total = np.zeros(count)
            for t in range(values.shape[2]):
                top = np.sort(values[:, :, t], axis=1)[:, ::-1]
                total += top[:, : min(units[t], spec.n)].sum(axis=1)
            return total
        return np.array(
            [
                offline_optimum(
                    ValuationProfile(
                        spec.m,
                        tuple(
                            AdditiveAcrossTypes(spec.item_types, tuple(row))
                            for row in v
                        ),
                    ),
                    objective,
                )
                for v in values
            ]
        )
    if objective in (Objective.WELFARE, Objective.REVENUE):
        if spec.identical_items:
            k = min(spec.n, spec.m)
            top = np.sort(values[:, :, 0], axis=1)[:, ::-1]
            return top[:, :k].sum(axis=1)
        return np.array([_welfare_unit_demand(v) for v in values])
    return np.array([_maxmin_unit_demand(v) for v in values])
