"""Exact search over static mechanisms on finite supports.

A static schedule fixes the visiting order and each agent's item prices up
front; nothing depends on history.  Schedules are evaluated in bulk: the
support is pushed through all candidate schedules at once as numpy batches.

Search spaces (all grids come from the candidate-price construction, and
identical item copies always share one price; see
:func:`seqprice.oracle.grids.item_price_classes`):

* anonymous static prices (one shared price vector): the product of
  per-item-group grids.  Orders of exchangeable agents are deduplicated.
* personalized static prices: the full product of per-agent price vectors
  when it fits the budget; otherwise the union of the anonymous space and
  per-agent scalar assignments.  The fallback still contains the anonymous
  space, so class-containment comparisons stay sound, but the reported
  optimum is then a lower bound for the full personalized class (flagged
  via ``restricted=True``).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional

import numpy as np

from seqprice.errors import SizeBudgetError, UnsupportedSettingError
from seqprice.mechanism import Objective
from seqprice.offline import offline_batch
from seqprice.oracle import iid
from seqprice.oracle.beliefdp import _canonical_orders, _order_count
from seqprice.oracle.grids import candidate_prices, item_price_classes
from seqprice.settings import SettingSpec, support_values

SCHEDULE_BUDGET = 3_000_000
CHUNK_ELEMENTS = 8_000_000


@dataclass(frozen=True)
class StaticResult:
    value: float
    order: tuple[int, ...]
    prices: tuple[tuple[float, ...], ...]  # per agent, per item
    mechanism_class: str
    restricted: bool = False


def eval_static_schedules(
    values: np.ndarray,  # (K, n, m) support value matrices
    probs: np.ndarray,  # (K,) probabilities
    orders: np.ndarray,  # (B, n) agent visiting orders
    prices: np.ndarray,  # (B, n, m) price agent orders[b, t] sees at round t
    objective: Objective,
) -> np.ndarray:
    """Expected objective of each schedule, exactly (support-weighted)."""
    if objective is Objective.MAXMIN:
        raise UnsupportedSettingError(
            "static schedule evaluation handles welfare and revenue only"
        )
    n_sched, n = orders.shape
    n_support, _, m = values.shape
    out = np.empty(n_sched)
    chunk = max(1, CHUNK_ELEMENTS // max(1, n_support * m))
    for lo in range(0, n_sched, chunk):
        hi = min(n_sched, lo + chunk)
        out[lo:hi] = _eval_chunk(
            values, probs, orders[lo:hi], prices[lo:hi], objective
        )
    return out


def _eval_chunk(values, probs, orders, prices, objective) -> np.ndarray:
    n_sched, n = orders.shape
    n_support, _, m = values.shape
    avail = np.ones((n_sched, n_support, m), dtype=bool)
    welfare = np.zeros((n_sched, n_support))
    revenue = np.zeros((n_sched, n_support))
    sched_rows = np.arange(n_sched)[:, None]
    supp_rows = np.arange(n_support)[None, :]
    for t in range(n):
        agents = orders[:, t]
        vals = values[:, agents, :].transpose(1, 0, 2)  # (B, K, m)
        price_t = prices[:, t, :][:, None, :]  # (B, 1, m)
        utility = np.where(avail, vals - price_t, -np.inf)
        u_max = utility.max(axis=2)
        vmask = avail & (utility == u_max[:, :, None])
        v_best = np.where(vmask, vals, -np.inf).max(axis=2)
        cand = vmask & (vals == v_best[:, :, None])
        item = cand.argmax(axis=2)
        buy = np.isfinite(u_max) & ((u_max > 0) | ((u_max == 0) & (v_best > 0)))
        bought_value = np.where(buy, vals[sched_rows, supp_rows, item], 0.0)
        paid = np.where(buy, prices[:, t, :][sched_rows, item], 0.0)
        welfare += bought_value
        revenue += paid
        b_idx, k_idx = np.nonzero(buy)
        avail[b_idx, k_idx, item[b_idx, k_idx]] = False
    totals = revenue if objective is Objective.REVENUE else welfare
    return totals @ probs


def _orders_array(spec: SettingSpec) -> np.ndarray:
    count = _order_count(spec)
    if count > SCHEDULE_BUDGET:
        raise SizeBudgetError(
            f"order space of {spec.name!r} spans {count} canonical orders"
        )
    return np.array(list(_canonical_orders(spec)), dtype=int)


def _support(spec: SettingSpec):
    values, probs = support_values(spec)
    return values.astype(float), np.array([float(p) for p in probs])


def _cross(orders: np.ndarray, price_rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All (order, price assignment) combinations.

    ``price_rows`` has shape (P, n, m): assignment of a price vector to each
    agent id.  The returned prices are reindexed so row t holds the prices of
    the agent visited at round t.
    """
    n_orders = orders.shape[0]
    n_prices = price_rows.shape[0]
    big_orders = np.repeat(orders, n_prices, axis=0)
    big_prices = np.tile(price_rows, (n_orders, 1, 1))
    reindexed = np.take_along_axis(
        big_prices, big_orders[:, :, None], axis=1
    )
    return big_orders, reindexed


def _expand_class_prices(
    classes: tuple[tuple[int, ...], ...], combos: Iterable[tuple], m: int
) -> np.ndarray:
    rows = []
    for combo in combos:
        row = [0.0] * m
        for group, p in zip(classes, combo):
            for j in group:
                row[j] = p
        rows.append(row)
    return np.array(rows, dtype=float)


def _asp_price_vectors(spec: SettingSpec, objective: Objective) -> np.ndarray:
    grid = candidate_prices(spec, anonymous=True, objective=objective)
    classes = item_price_classes(spec)
    class_grids = [grid.merged_item_grid(group[0]) for group in classes]
    size = 1
    for g in class_grids:
        size *= len(g)
        if size > SCHEDULE_BUDGET:
            raise SizeBudgetError(
                f"anonymous price space of {spec.name!r} exceeds {SCHEDULE_BUDGET}"
            )
    return _expand_class_prices(classes, product(*class_grids), spec.m)


def optimal_asp(spec: SettingSpec, objective: Objective) -> StaticResult:
    """Exact best anonymous-static-price mechanism (static order too)."""
    if spec.regimes is not None and spec._support_builder is None:
        value, price = iid.uniform_asp(spec, objective)
        return StaticResult(
            value=value,
            order=tuple(range(spec.n)),
            prices=tuple((price,) * spec.m for _ in range(spec.n)),
            mechanism_class="ASP",
        )
    try:
        return _asp_enumerated(spec, objective)
    except SizeBudgetError:
        if spec.regimes is not None:
            value, price = iid.uniform_asp(spec, objective)
            return StaticResult(
                value=value,
                order=tuple(range(spec.n)),
                prices=tuple((price,) * spec.m for _ in range(spec.n)),
                mechanism_class="ASP",
            )
        return _asp_offline_certified(spec, objective)


def _asp_enumerated(spec: SettingSpec, objective: Objective) -> StaticResult:
    values, probs = _support(spec)
    orders = _orders_array(spec)
    vectors = _asp_price_vectors(spec, objective)
    total = orders.shape[0] * vectors.shape[0]
    if total > SCHEDULE_BUDGET:
        raise SizeBudgetError(
            f"anonymous static search of {spec.name!r} needs {total} schedules"
        )
    price_rows = np.repeat(vectors[:, None, :], spec.n, axis=1)
    big_orders, big_prices = _cross(orders, price_rows)
    scores = eval_static_schedules(values, probs, big_orders, big_prices, objective)
    best = int(scores.argmax())
    order_idx, price_idx = divmod(best, vectors.shape[0])
    vec = tuple(float(x) for x in vectors[price_idx])
    return StaticResult(
        value=float(scores[best]),
        order=tuple(int(a) for a in orders[order_idx]),
        prices=tuple(vec for _ in range(spec.n)),
        mechanism_class="ASP",
    )


def _asp_offline_certified(spec: SettingSpec, objective: Objective) -> StaticResult:
    """Anonymous-price search when the order space is too large to enumerate.

    Tries the full price grid under a few plausible orders only; a schedule
    matching the offline expectation is certainly optimal (no mechanism can
    beat full information), and only such a certificate is accepted.
    """
    if objective is Objective.MAXMIN:
        raise SizeBudgetError(
            f"anonymous static search of {spec.name!r} has too many orders"
        )
    values, probs = _support(spec)
    vectors = _asp_price_vectors(spec, objective)
    # expected best-item value: agents who stand to contribute most go first
    by_mean = np.argsort(-(probs @ values.max(axis=2)), kind="stable")
    orders = np.array([np.arange(spec.n), by_mean], dtype=int)
    if orders.shape[0] * vectors.shape[0] > SCHEDULE_BUDGET:
        raise SizeBudgetError(
            f"anonymous static search of {spec.name!r} exceeds the budget"
        )
    price_rows = np.repeat(vectors[:, None, :], spec.n, axis=1)
    big_orders, big_prices = _cross(orders, price_rows)
    scores = eval_static_schedules(values, probs, big_orders, big_prices, objective)
    best = int(scores.argmax())
    offline = float(offline_batch(spec, values, objective) @ probs)
    if scores[best] < offline - 1e-9:
        raise SizeBudgetError(
            f"anonymous static search of {spec.name!r} has too many orders "
            "and no offline-matching certificate"
        )
    order_idx, price_idx = divmod(best, vectors.shape[0])
    vec = tuple(float(x) for x in vectors[price_idx])
    return StaticResult(
        value=float(scores[best]),
        order=tuple(int(a) for a in orders[order_idx]),
        prices=tuple(vec for _ in range(spec.n)),
        mechanism_class="ASP",
    )


def _per_agent_vector_space(spec: SettingSpec, objective: Objective) -> list[np.ndarray]:
    grid = candidate_prices(spec, anonymous=False, objective=objective)
    classes = item_price_classes(spec)
    spaces = []
    for i in range(spec.n):
        class_grids = [grid.item_grid(i, group[0]) for group in classes]
        spaces.append(
            _expand_class_prices(classes, product(*class_grids), spec.m)
        )
    return spaces


def optimal_psp(spec: SettingSpec, objective: Objective) -> StaticResult:
    """Best personalized-static-price mechanism.

    Falls back to a sound restricted space (anonymous vectors plus
    per-agent scalars) when the full per-agent vector product is too large;
    the result is then flagged ``restricted``.
    """
    if spec.regimes is not None and spec._support_builder is None:
        value, seq = iid.psp_frontier(spec, objective)
        return StaticResult(
            value=value,
            order=tuple(range(spec.n)),
            prices=tuple((p,) * spec.m for p in seq),
            mechanism_class="PSP",
        )
    values, probs = _support(spec)
    orders = _orders_array(spec)
    spaces = _per_agent_vector_space(spec, objective)
    total = orders.shape[0]
    for space in spaces:
        total *= len(space)
        if total > SCHEDULE_BUDGET:
            break
    if total <= SCHEDULE_BUDGET:
        assignments = np.array(
            [rows for rows in product(*spaces)], dtype=float
        )  # (P, n, m)
        restricted = False
    else:
        if spec.regimes is not None:
            # exchangeable iid-regime agents: per-position price sequences
            # span the whole personalized class, and the frontier recursion
            # searches them exactly
            try:
                value, seq = iid.psp_frontier(spec, objective)
                return StaticResult(
                    value=value,
                    order=tuple(range(spec.n)),
                    prices=tuple((float(p),) * spec.m for p in seq),
                    mechanism_class="PSP",
                )
            except (SizeBudgetError, UnsupportedSettingError):
                pass
        anon = _asp_price_vectors(spec, objective)
        shared = np.repeat(anon[:, None, :], spec.n, axis=1)
        grid = candidate_prices(spec, anonymous=False, objective=objective)
        scalar_spaces = [grid.item_grid(i, 0) for i in range(spec.n)]
        size = 1
        for s in scalar_spaces:
            size *= len(s)
        if size * orders.shape[0] > SCHEDULE_BUDGET:
            raise SizeBudgetError(
                f"personalized static search of {spec.name!r} is too large "
                "even restricted to scalars"
            )
        scalars = np.array(list(product(*scalar_spaces)), dtype=float)
        per_scalar = np.repeat(scalars[:, :, None], spec.m, axis=2)
        assignments = np.concatenate([shared, per_scalar], axis=0)
        restricted = True
    big_orders, big_prices = _cross(orders, assignments)
    scores = eval_static_schedules(values, probs, big_orders, big_prices, objective)
    best = int(scores.argmax())
    order_idx, price_idx = divmod(best, assignments.shape[0])
    rows = assignments[price_idx]
    return StaticResult(
        value=float(scores[best]),
        order=tuple(int(a) for a in orders[order_idx]),
        prices=tuple(tuple(float(x) for x in row) for row in rows),
        mechanism_class="PSP",
        restricted=restricted,
    )


def eval_schedule(
    spec: SettingSpec,
    order: Iterable[int],
    agent_prices: np.ndarray,  # (n, m) price vector per agent id
    objective: Optional[Objective] = None,
) -> float:
    """Exact expected value of one static schedule on a finite support."""
    objective = objective or spec.objective_default
    values, probs = _support(spec)
    orders = np.array([list(order)], dtype=int)
    prices = np.asarray(agent_prices, dtype=float)[None, :, :]
    reindexed = np.take_along_axis(prices, orders[:, :, None], axis=1)
    return float(
        eval_static_schedules(values, probs, orders, reindexed, objective)[0]
    )
