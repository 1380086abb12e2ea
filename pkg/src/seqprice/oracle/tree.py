"""Explicit decision trees produced by the exact solvers.

A node fixes the agent to visit and the prices posted on the items still
available; children are indexed by the bundle the visited agent purchased.
Replaying a tree only requires purchase feedback, so a tree is also a
:class:`~seqprice.episode.Policy` via :class:`TreePolicy`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from seqprice.errors import ProtocolError
from seqprice.mechanism import Action


@dataclass
class TreeNode:
    agent: int
    prices: dict[int, float]  # price per still-available item
    value: float  # expected objective-to-go at this node
    children: dict[frozenset[int], "TreeNode"] = field(default_factory=dict)


@dataclass
class PolicyTree:
    setting: str
    objective: str
    kind: str
    value: float
    root: Optional[TreeNode]

    def size(self) -> int:
        if self.root is None:
            return 0
        stack, count = [self.root], 0
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.children.values())
        return count


def _bundle_label(bundle: frozenset[int]) -> str:
    return "{" + ",".join(str(j) for j in sorted(bundle)) + "}"


def serialize_tree(tree: PolicyTree) -> str:
    """Stable indented text form, one node per line."""
    lines = [
        f"setting={tree.setting} objective={tree.objective} "
        f"kind={tree.kind} value={tree.value:.10g}"
    ]
    if tree.root is None:
        lines.append("  <no explicit tree: policy too large to materialize>")
        return "\n".join(lines)

    def walk(node: TreeNode, label: str, depth: int) -> None:
        prices = ",".join(f"{j}:{node.prices[j]:.10g}" for j in sorted(node.prices))
        lines.append(
            "  " * depth + f"{label}visit agent {node.agent} prices[{prices}] "
            f"value={node.value:.10g}"
        )
        for bundle in sorted(node.children, key=lambda b: tuple(sorted(b))):
            walk(node.children[bundle], f"bought {_bundle_label(bundle)} -> ", depth + 1)

    walk(tree.root, "", 1)
    return "\n".join(lines)


class TreePolicy:
    """Replay a policy tree as an episode policy.

    The tree must have been built for the setting being played; reaching a
    purchase outcome the tree has no child for is a protocol violation.
    Terminal children may be pruned (nothing left to decide), in which case
    remaining rounds visit the lowest-id remaining agent with maximal prices.
    """

    def __init__(self, tree: PolicyTree):
        if tree.root is None:
            raise ProtocolError("cannot replay a tree without materialized nodes")
        self._tree = tree
        self._cursor: Optional[TreeNode] = tree.root

    def reset(self, seed=None) -> None:
        self._cursor = self._tree.root

    def act(self, observation, remaining_agents, remaining_items, mode="eval"):
        if self._cursor is not None:
            node = self._cursor
            if not remaining_agents[node.agent]:
                raise ProtocolError(
                    f"tree wants agent {node.agent}, already visited"
                )
            prices = {
                int(j): float(node.prices[int(j)])
                for j in np.flatnonzero(remaining_items)
            }
            return Action(node.agent, prices), 0.0
        agent = int(np.flatnonzero(remaining_agents)[0])
        fallback = {int(j): 1e18 for j in np.flatnonzero(remaining_items)}
        return Action(agent, fallback), 0.0

    def observe(self, agent: int, purchased: frozenset[int]) -> None:
        if self._cursor is None:
            return
        self._cursor = self._cursor.children.get(frozenset(purchased))
