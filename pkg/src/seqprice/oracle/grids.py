"""Candidate price grids for exact search.

With finitely many possible values, only finitely many prices matter: between
two adjacent support values every price induces the same purchase decisions,
so the grid keeps one representative per gap.  Midpoints keep every buyer
strictly on one side of the price (no knife-edge indifference); a price above
the top value never sells.  Revenue searches additionally need the support
values themselves, where a buyer with that exact value still buys (utility
zero, positive value).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from seqprice.errors import UnsupportedSettingError
from seqprice.mechanism import Objective
from seqprice.settings import SettingSpec, support_values


def scalar_candidates(values: Iterable[float], include_support: bool = False) -> tuple[float, ...]:
    """Grid for one value distribution: 0, gap midpoints, one price above all."""
    vals = sorted(set(float(v) for v in values))
    grid = {0.0}
    for lo, hi in zip(vals, vals[1:]):
        grid.add((lo + hi) / 2.0)
    if vals:
        grid.add(vals[-1] + 1.0)
        if vals[0] > 0.0:
            grid.add(vals[0] / 2.0)
    if include_support:
        grid.update(v for v in vals if v > 0.0)
    return tuple(sorted(grid))


@dataclass(frozen=True)
class PriceGrid:
    """Candidate prices per (agent, item); anonymous grids merge over agents."""

    anonymous: bool
    per_agent_item: tuple[tuple[tuple[float, ...], ...], ...]  # [agent][item]

    def item_grid(self, agent: int, item: int) -> tuple[float, ...]:
        return self.per_agent_item[agent][item]

    def merged_item_grid(self, item: int) -> tuple[float, ...]:
        merged: set[float] = set()
        for agent_grids in self.per_agent_item:
            merged.update(agent_grids[item])
        return tuple(sorted(merged))

    def merged_scalar(self) -> tuple[float, ...]:
        merged: set[float] = set()
        for agent_grids in self.per_agent_item:
            for g in agent_grids:
                merged.update(g)
        return tuple(sorted(merged))


def _per_agent_item_values(spec: SettingSpec) -> list[list[set[float]]]:
    vals: list[list[set[float]]] = [
        [set() for _ in range(spec.m)] for _ in range(spec.n)
    ]
    if spec.valuation_kind != "unit_demand":
        raise UnsupportedSettingError(
            "price grids are defined for unit-demand settings only"
        )
    if spec.independent_dists is not None:
        for i, dist in enumerate(spec.independent_dists):
            for vec, _ in dist:
                for j, v in enumerate(vec):
                    vals[i][j].add(float(v))
        return vals
    try:
        support, _ = support_values(spec)
    except Exception:
        support = None
    if support is not None:
        for i in range(spec.n):
            for j in range(spec.m):
                vals[i][j].update(float(v) for v in np.unique(support[:, i, j]))
        return vals
    if spec.regimes is not None:
        scalars = {float(v) for _, dist in spec.regimes for v, _ in dist}
        for i in range(spec.n):
            for j in range(spec.m):
                vals[i][j].update(scalars)
        return vals
    raise UnsupportedSettingError(
        f"setting {spec.name!r} has no finite value description for a price grid"
    )


def item_price_classes(spec: SettingSpec) -> tuple[tuple[int, ...], ...]:
    """Groups of items that share one price in every price space.

    Two items belong to one group when they are exact copies: every agent
    values them identically in every realization (or they share a type under
    additive valuations).  All price spaces here post one price per group;
    a spread of prices over copies would let a fixed schedule react to
    earlier sales through item identity, which is adaptive behavior in
    disguise and outside the static classes.
    """
    if spec.identical_items:
        return (tuple(range(spec.m)),)
    if spec.item_types is not None:
        groups: dict[int, list[int]] = {}
        for j, t in enumerate(spec.item_types):
            groups.setdefault(t, []).append(j)
        return tuple(tuple(g) for g in groups.values())
    signatures: Optional[list] = None
    if spec.independent_dists is not None:
        signatures = [
            tuple(
                tuple((float(vec[j]), prob) for vec, prob in dist)
                for dist in spec.independent_dists
            )
            for j in range(spec.m)
        ]
    else:
        try:
            support, _ = support_values(spec)
        except Exception:
            support = None
        if support is not None:
            signatures = [
                np.ascontiguousarray(support[:, :, j], dtype=float).tobytes()
                for j in range(spec.m)
            ]
    if signatures is None:
        return tuple((j,) for j in range(spec.m))
    seen: dict = {}
    for j, sig in enumerate(signatures):
        seen.setdefault(sig, []).append(j)
    return tuple(tuple(g) for g in seen.values())


def candidate_prices(
    spec: SettingSpec, anonymous: bool, objective: Objective = Objective.WELFARE
) -> PriceGrid:
    """Complete candidate grid for a setting.

    ``anonymous`` merges all agents' thresholds into one shared grid per item
    (for price rules that cannot condition on the visited agent); otherwise
    each agent keeps their own grid.  Revenue objectives include the support
    values themselves.
    """
    include_support = objective is Objective.REVENUE
    vals = _per_agent_item_values(spec)
    if anonymous:
        merged = [
            set().union(*(vals[i][j] for i in range(spec.n))) for j in range(spec.m)
        ]
        grids = tuple(
            tuple(scalar_candidates(merged[j], include_support) for j in range(spec.m))
            for _ in range(spec.n)
        )
    else:
        grids = tuple(
            tuple(
                scalar_candidates(vals[i][j], include_support) for j in range(spec.m)
            )
            for i in range(spec.n)
        )
    return PriceGrid(anonymous=anonymous, per_agent_item=grids)
