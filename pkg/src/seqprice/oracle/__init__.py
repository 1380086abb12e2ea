"""Exact solvers for finite-support settings."""

from seqprice.offline import offline_batch, offline_optimum
from seqprice.oracle.grids import PriceGrid, candidate_prices, scalar_candidates
from seqprice.oracle.tree import PolicyTree, TreeNode, TreePolicy, serialize_tree
from seqprice.oracle.evaluate import StaticSchedule, rsd_value, value_of_policy
from seqprice.oracle.solve import optimal_adaptive_spm, optimal_static, statistic_value

__all__ = [
    "PolicyTree",
    "PriceGrid",
    "StaticSchedule",
    "TreeNode",
    "TreePolicy",
    "candidate_prices",
    "offline_batch",
    "offline_optimum",
    "optimal_adaptive_spm",
    "optimal_static",
    "rsd_value",
    "scalar_candidates",
    "serialize_tree",
    "statistic_value",
    "value_of_policy",
]
