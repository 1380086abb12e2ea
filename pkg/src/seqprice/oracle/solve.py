"""Top-level exact-solve dispatch across statistic kinds and setting shapes.

``optimal_adaptive_spm`` picks the right machinery for the requested
statistic:

* full-history statistics (price/allocation matrices): belief filtering on
  the enumerated support, or the regime recursion for iid-regime settings
  whose support is too large to enumerate;
* agents/items-left: the independence recursion when agents are independent
  (provably equal to the full optimum there), the regime recursion when
  agents are exchangeable iid, and the mixed-integer program for correlated
  settings, where measurability is a real restriction that must be enforced
  (though a clever visiting order can sometimes recover full-history value);
* agents-left only / no statistic: these reduce to static mechanism classes
  (a policy that cannot see purchases replays a fixed script), handled by
  the static searches.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from seqprice.errors import SizeBudgetError, UnsupportedSettingError
from seqprice.mechanism import Objective
from seqprice.oracle import beliefdp, independent, iid, milp, static
from seqprice.oracle.evaluate import StaticSchedule
from seqprice.oracle.tree import PolicyTree
from seqprice.settings import SettingSpec
from seqprice.statistics import check_kind


@dataclass
class SolveResult:
    setting: str
    objective: Objective
    kind: str
    value: float
    method: str
    tree: Optional[PolicyTree] = None
    schedule: Optional[StaticSchedule] = None
    q_table: Optional[dict] = None
    restricted: bool = False


def _single_regime(spec: SettingSpec) -> bool:
    return spec.regimes is not None and len(spec.regimes) == 1


def _full_history_optimum(
    spec: SettingSpec, objective: Objective, kind: str, build_tree: bool
) -> SolveResult:
    try:
        res = beliefdp.adaptive_optimum(
            spec, objective, kind=kind, build_tree=build_tree
        )
        return SolveResult(
            setting=spec.name, objective=objective, kind=kind,
            value=res.value, method="belief-dp", tree=res.tree,
        )
    except SizeBudgetError:
        if spec.regimes is not None and objective is not Objective.MAXMIN:
            value, tree = iid.regime_optimum(spec, objective, build_tree=build_tree)
            return SolveResult(
                setting=spec.name, objective=objective, kind=kind,
                value=value, method="regime-dp", tree=tree,
            )
        raise


def _items_agents_left_optimum(
    spec: SettingSpec, objective: Objective, build_tree: bool
) -> SolveResult:
    kind = "items_agents_left"
    if _single_regime(spec) and spec.identical_items:
        # iid agents: history is uninformative, the count recursion is the
        # unrestricted optimum and is measurable in this statistic
        value, tree = iid.regime_optimum(spec, objective, build_tree=build_tree)
        return SolveResult(
            setting=spec.name, objective=objective, kind=kind,
            value=value, method="regime-dp", tree=tree,
        )
    if spec.independent_dists is not None:
        value, tree, solver = independent.independent_optimum(
            spec, objective, build_tree=build_tree
        )
        return SolveResult(
            setting=spec.name, objective=objective, kind=kind,
            value=value, method="independent-dp", tree=tree, q_table=solver.q,
        )
    if spec.regimes is not None and spec.m == 1:
        # one item: a deterministic policy's only live histories are
        # all-decline prefixes, which this statistic distinguishes, so the
        # restriction is vacuous
        value, tree = iid.regime_optimum(spec, objective, build_tree=build_tree)
        return SolveResult(
            setting=spec.name, objective=objective, kind=kind,
            value=value, method="regime-dp", tree=tree,
        )
    value = milp.items_agents_left_optimum(spec, objective)
    return SolveResult(
        setting=spec.name, objective=objective, kind=kind,
        value=value, method="statistic-milp",
    )


def optimal_adaptive_spm(
    spec: SettingSpec,
    objective: Optional[Objective] = None,
    kind: str = "price_allocation_matrix",
    build_tree: bool = True,
) -> SolveResult:
    """Exact optimum over deterministic policies measurable in ``kind``."""
    check_kind(kind)
    objective = objective or spec.objective_default
    if kind in ("price_allocation_matrix", "allocation_matrix"):
        # both reconstruct the full history for deterministic policies:
        # distinct purchase outcomes write distinct allocation rows
        return _full_history_optimum(spec, objective, kind, build_tree)
    if kind == "items_agents_left":
        return _items_agents_left_optimum(spec, objective, build_tree)
    if kind == "remaining_agents":
        res = optimal_static(spec, objective, "PSP")
    else:  # "none"
        res = optimal_static(spec, objective, "ASP")
    return SolveResult(
        setting=spec.name, objective=objective, kind=kind,
        value=res.value, method=f"static-{res.mechanism_class.lower()}",
        schedule=StaticSchedule(order=res.order, prices=res.prices),
        restricted=res.restricted,
    )


def optimal_static(
    spec: SettingSpec,
    objective: Optional[Objective] = None,
    mechanism_class: str = "ASP",
) -> static.StaticResult:
    """Best static mechanism of a class: ASP, PSP, or SO (static order,
    adaptive prices)."""
    objective = objective or spec.objective_default
    if mechanism_class == "ASP":
        return static.optimal_asp(spec, objective)
    if mechanism_class == "PSP":
        return static.optimal_psp(spec, objective)
    if mechanism_class == "SO":
        value, order = beliefdp.best_static_order(spec, objective)
        return static.StaticResult(
            value=value, order=order, prices=(), mechanism_class="SO",
        )
    raise UnsupportedSettingError(
        f"unknown mechanism class {mechanism_class!r}; use ASP, PSP, or SO"
    )


def statistic_value(
    spec: SettingSpec, objective: Optional[Objective] = None,
    kind: str = "price_allocation_matrix",
) -> float:
    """Value of the exact optimum under a statistic (no tree)."""
    return optimal_adaptive_spm(spec, objective, kind, build_tree=False).value
