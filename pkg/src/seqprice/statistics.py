"""History statistics: the observation a policy sees each round.

A statistic ``kind`` names a deterministic compression of the mechanism
history into a flat float vector.  Restricting a policy to a statistic
restricts the mechanism class it can express:

========================  ======================================  ========
kind                      contents                                length
========================  ======================================  ========
none                      empty                                   0
remaining_agents          agent-remaining bits                    n
items_agents_left         agent bits, item bits                   n + m
allocation_matrix         agent bits, item bits, allocation       n + m + n*m
price_allocation_matrix   the above plus posted prices            n + m + 2*n*m
========================  ======================================  ========

The allocation block is the row-major agent-by-item 0/1 matrix; the price
block is the row-major matrix of prices each visited agent saw for the items
still available at their round (zero elsewhere).
"""

from __future__ import annotations

import numpy as np

from seqprice.errors import InputError
from seqprice.mechanism import MechanismState

STATISTIC_KINDS = (
    "none",
    "remaining_agents",
    "items_agents_left",
    "allocation_matrix",
    "price_allocation_matrix",
)

_CLASS_BY_KIND = {
    "none": "ASP",
    "remaining_agents": "PSP",
    "items_agents_left": "SPM",
    "allocation_matrix": "SPM",
    "price_allocation_matrix": "SPM",
}


def check_kind(kind: str) -> str:
    if kind not in STATISTIC_KINDS:
        raise InputError(f"unknown statistic kind {kind!r}; known: {STATISTIC_KINDS}")
    return kind


def constrain(kind: str) -> str:
    """Mechanism class a policy limited to this statistic can express.

    With no observation a policy must fix its prices up front and can only
    order agents statically (ASP); seeing which agents remain allows prices
    personalized per agent (PSP); anything tracking items supports the full
    sequential class (SPM).
    """
    return _CLASS_BY_KIND[check_kind(kind)]


def statistic_length(kind: str, n_agents: int, n_items: int) -> int:
    check_kind(kind)
    n, m = n_agents, n_items
    if kind == "none":
        return 0
    if kind == "remaining_agents":
        return n
    if kind == "items_agents_left":
        return n + m
    if kind == "allocation_matrix":
        return n + m + n * m
    return n + m + 2 * n * m


def make_statistic(
    kind: str, state: MechanismState, price_history: np.ndarray
) -> np.ndarray:
    """Flat observation vector for the current state.

    ``price_history`` is the ``(n_agents, n_items)`` matrix of prices posted
    so far; only the ``price_allocation_matrix`` kind reads it.
    """
    check_kind(kind)
    n, m = state.n_agents, state.n_items
    if kind == "none":
        return np.zeros(0)
    parts = [
        np.array([1.0 if i in state.remaining_agents else 0.0 for i in range(n)])
    ]
    if kind != "remaining_agents":
        parts.append(
            np.array([1.0 if j in state.remaining_items else 0.0 for j in range(m)])
        )
    if kind in ("allocation_matrix", "price_allocation_matrix"):
        alloc = np.zeros((n, m))
        for i, bundle in enumerate(state.allocation):
            for j in bundle:
                alloc[i, j] = 1.0
        parts.append(alloc.ravel())
    if kind == "price_allocation_matrix":
        if price_history.shape != (n, m):
            raise InputError(
                f"price history must have shape {(n, m)}, got {price_history.shape}"
            )
        parts.append(np.asarray(price_history, dtype=float).ravel())
    return np.concatenate(parts)
