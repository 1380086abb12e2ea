"""Episode runners: one mechanism round per remaining agent, reward at the end.

Two execution paths share the same mechanics:

* :func:`run_episode` plays one episode through the object-level state
  machine (`apply_round`), driving any object implementing the
  :class:`Policy` protocol.  This is the canonical reference path.
* :func:`run_batch` plays many episodes in lockstep on numpy arrays, driving
  an array-level ``act_fn``.  Training and large evaluations use this; a
  property test pins it to the reference path.

Episodes always last exactly ``n`` rounds (every agent is visited once) and
the reward is the terminal objective value, optionally minus the realized
offline optimum (variance reduction; welfare and revenue only).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Protocol

import numpy as np

from seqprice.errors import InputError, ProtocolError
from seqprice.mechanism import (
    Action,
    MechanismState,
    Objective,
    apply_round,
    initial_state,
    objective_value,
)
from seqprice.offline import offline_batch, offline_optimum
from seqprice.settings import SettingSpec, profile_from_values
from seqprice.statistics import check_kind, make_statistic
from seqprice.valuation import ValuationProfile


class Policy(Protocol):
    """Anything that maps an observation to one round's action.

    ``act`` returns the action and its log-probability under the policy
    (0.0 for deterministic policies).  Optional hooks: ``reset(seed)`` is
    called before each episode, ``observe(agent, purchased)`` after each
    round; stateful policies (replaying a decision tree, randomized orders)
    use them.
    """

    def act(
        self,
        observation: np.ndarray,
        remaining_agents: np.ndarray,
        remaining_items: np.ndarray,
        mode: str = "eval",
    ) -> tuple[Action, float]: ...


@dataclass(frozen=True)
class RoundRecord:
    observation: np.ndarray
    action: Action
    purchased: frozenset[int]
    log_prob: float


@dataclass(frozen=True)
class TrajectoryRecord:
    seed: Optional[int]
    setting: str
    kind: str
    objective: Objective
    rounds: tuple[RoundRecord, ...]
    allocation: tuple[frozenset[int], ...]
    payments: tuple[float, ...]
    objective_value: float
    offline_value: Optional[float]
    reward: float


def _masks(state: MechanismState) -> tuple[np.ndarray, np.ndarray]:
    agents = np.zeros(state.n_agents, dtype=bool)
    items = np.zeros(state.n_items, dtype=bool)
    agents[list(state.remaining_agents)] = True
    items[list(state.remaining_items)] = True
    return agents, items


def run_episode(
    policy: Policy,
    spec: SettingSpec,
    kind: str,
    objective: Optional[Objective] = None,
    seed: Optional[int] = 0,
    variance_reduction: bool = False,
    profile: Optional[ValuationProfile] = None,
    mode: str = "eval",
) -> TrajectoryRecord:
    """Play one full episode and return its trajectory.

    The profile is sampled from ``seed`` unless given explicitly.  With
    ``variance_reduction`` the reward subtracts the realized offline optimum
    (skipped for the maxmin objective, whose benchmark is not separable).
    """
    check_kind(kind)
    objective = objective or spec.objective_default
    if profile is None:
        if seed is None:
            raise InputError("run_episode needs a seed or an explicit profile")
        rng = np.random.default_rng(seed)
        profile = profile_from_values(spec, spec.sample_batch(rng, 1)[0])
    if hasattr(policy, "reset"):
        policy.reset(seed)
    state = initial_state(spec.n, spec.m)
    price_history = np.zeros((spec.n, spec.m))
    rounds = []
    while not state.terminal:
        obs = make_statistic(kind, state, price_history)
        agents_mask, items_mask = _masks(state)
        action, logp = policy.act(obs, agents_mask, items_mask, mode)
        for j in state.remaining_items:
            price_history[action.agent, j] = action.prices[j]
        state, purchased = apply_round(state, action, profile)
        if hasattr(policy, "observe"):
            policy.observe(action.agent, purchased)
        rounds.append(RoundRecord(obs, action, purchased, logp))
    value = objective_value(objective, state.allocation, state.payments, profile)
    offline = None
    reward = value
    if variance_reduction and objective is not Objective.MAXMIN:
        offline = offline_optimum(profile, objective)
        reward = value - offline
    return TrajectoryRecord(
        seed=seed,
        setting=spec.name,
        kind=kind,
        objective=objective,
        rounds=tuple(rounds),
        allocation=state.allocation,
        payments=state.payments,
        objective_value=value,
        offline_value=offline,
        reward=reward,
    )


def format_trajectory(rec: TrajectoryRecord) -> str:
    """One-line deterministic rendering of a trajectory."""
    parts = []
    for t, r in enumerate(rec.rounds):
        prices = ",".join(
            f"{j}:{r.action.prices[j]:.6g}" for j in sorted(r.action.prices)
        )
        bought = ",".join(str(j) for j in sorted(r.purchased))
        parts.append(f"{t}:agent={r.action.agent} prices[{prices}] bought[{bought}]")
    head = (
        f"seed={rec.seed} setting={rec.setting} kind={rec.kind} "
        f"objective={rec.objective.value} value={rec.objective_value:.6g} "
        f"reward={rec.reward:.6g}"
    )
    return head + " | " + " ; ".join(parts)


class RSDPolicy:
    """Uniformly random serial dictatorship: random order, all prices zero."""

    def __init__(self, seed: int = 0):
        self._rng = np.random.default_rng(seed)

    def reset(self, seed) -> None:
        if seed is not None:
            self._rng = np.random.default_rng(seed)

    def act(self, observation, remaining_agents, remaining_items, mode="eval"):
        remaining = np.flatnonzero(remaining_agents)
        agent = int(self._rng.choice(remaining))
        prices = {int(j): 0.0 for j in np.flatnonzero(remaining_items)}
        return Action(agent, prices), float(-np.log(len(remaining)))


# --------------------------------------------------------------- batched path

# act_fn(observations, agents_mask, items_mask, rng, mode)
#   -> (agents (E,), prices (E, m), extras dict of arrays)
BatchActFn = Callable[..., tuple[np.ndarray, np.ndarray, dict]]


@dataclass
class BatchResult:
    observations: np.ndarray  # (T, E, d) statistic before each round
    agent_masks: np.ndarray  # (T, E, n)
    item_masks: np.ndarray  # (T, E, m)
    agents: np.ndarray  # (T, E) visited agent per round
    prices: np.ndarray  # (T, E, m) posted prices
    extras: list[dict]  # per-round policy extras
    rewards: np.ndarray  # (E,) terminal reward, variance reduction applied
    objective_values: np.ndarray  # (E,) raw objective value
    allocation: np.ndarray  # (E, n, m)
    payments: np.ndarray  # (E, n)


def batch_statistic(
    kind: str,
    agents_left: np.ndarray,
    avail: np.ndarray,
    alloc: np.ndarray,
    price_hist: np.ndarray,
) -> np.ndarray:
    count = agents_left.shape[0]
    if kind == "none":
        return np.zeros((count, 0))
    parts = [agents_left.astype(float)]
    if kind != "remaining_agents":
        parts.append(avail.astype(float))
    if kind in ("allocation_matrix", "price_allocation_matrix"):
        parts.append(alloc.reshape(count, -1).astype(float))
    if kind == "price_allocation_matrix":
        parts.append(price_hist.reshape(count, -1))
    return np.concatenate(parts, axis=1)


def _buy_unit_demand(values_row: np.ndarray, prices: np.ndarray, avail: np.ndarray):
    """Vectorized single-item choice: (buy?, item, value paid for)."""
    utility = np.where(avail, values_row - prices, -np.inf)
    u_max = utility.max(axis=1)
    vals = np.where(avail & (utility == u_max[:, None]), values_row, -np.inf)
    v_max = vals.max(axis=1)
    cand = avail & (utility == u_max[:, None]) & (values_row == v_max[:, None])
    item = cand.argmax(axis=1)
    buy = np.isfinite(u_max) & ((u_max > 0) | ((u_max == 0) & (v_max > 0)))
    return buy, item


def run_batch(
    act_fn: BatchActFn,
    spec: SettingSpec,
    kind: str,
    objective: Optional[Objective] = None,
    values: Optional[np.ndarray] = None,
    rng: Optional[np.random.Generator] = None,
    count: Optional[int] = None,
    variance_reduction: bool = False,
    mode: str = "train",
) -> BatchResult:
    """Play ``E`` episodes in lockstep; all episodes share the round clock.

    Either pass sampled ``values`` (shape ``(E, n, m)``, or ``(E, n, T)`` for
    the additive setting) or a generator plus ``count``.  The same generator
    also drives the policy's exploration noise.
    """
    check_kind(kind)
    objective = objective or spec.objective_default
    if values is None:
        if rng is None or count is None:
            raise InputError("run_batch needs values or (rng, count)")
        values = spec.sample_batch(rng, count)
    values = np.asarray(values, dtype=float)
    n_ep = values.shape[0]
    n, m = spec.n, spec.m
    additive = spec.valuation_kind == "additive"
    if additive:
        type_cols = [
            [j for j, t in enumerate(spec.item_types) if t == tt]
            for tt in range(spec.n_types)
        ]

    agents_left = np.ones((n_ep, n), dtype=bool)
    avail = np.ones((n_ep, m), dtype=bool)
    alloc = np.zeros((n_ep, n, m), dtype=bool)
    payments = np.zeros((n_ep, n))
    price_hist = np.zeros((n_ep, n, m))
    welfare = np.zeros(n_ep)
    revenue = np.zeros(n_ep)
    rows = np.arange(n_ep)

    obs_all, amask_all, imask_all = [], [], []
    agents_all, prices_all, extras_all = [], [], []

    for _ in range(n):
        obs = batch_statistic(kind, agents_left, avail, alloc, price_hist)
        agents, prices, extras = act_fn(obs, agents_left, avail, rng, mode)
        agents = np.asarray(agents, dtype=int)
        prices = np.asarray(prices, dtype=float)
        if not agents_left[rows, agents].all():
            raise ProtocolError("policy picked an already-visited agent")
        if not np.isfinite(prices).all() or (prices < 0).any():
            raise InputError("prices must be finite and nonnegative")

        obs_all.append(obs)
        amask_all.append(agents_left.copy())
        imask_all.append(avail.copy())
        agents_all.append(agents)
        prices_all.append(prices)
        extras_all.append(extras)

        price_hist[rows, agents] = np.where(avail, prices, 0.0)
        if additive:
            type_vals = values[rows, agents]  # (E, T)
            for t, cols in enumerate(type_cols):
                best_p = np.full(n_ep, np.inf)
                best_j = np.full(n_ep, -1)
                for c in cols:
                    better = avail[:, c] & (prices[:, c] < best_p)
                    best_p = np.where(better, prices[:, c], best_p)
                    best_j = np.where(better, c, best_j)
                u = type_vals[:, t] - best_p
                buy = (best_j >= 0) & (
                    (u > 0) | ((u == 0) & (type_vals[:, t] > 0))
                )
                idx = np.flatnonzero(buy)
                j = best_j[idx].astype(int)
                avail[idx, j] = False
                alloc[idx, agents[idx], j] = True
                payments[idx, agents[idx]] += best_p[idx]
                welfare[idx] += type_vals[idx, t]
                revenue[idx] += best_p[idx]
        else:
            buy, item = _buy_unit_demand(values[rows, agents], prices, avail)
            idx = np.flatnonzero(buy)
            j = item[idx]
            avail[idx, j] = False
            alloc[idx, agents[idx], j] = True
            paid = prices[idx, j]
            payments[idx, agents[idx]] += paid
            welfare[idx] += values[idx, agents[idx], j]
            revenue[idx] += paid
        agents_left[rows, agents] = False

    if objective is Objective.WELFARE:
        obj = welfare
    elif objective is Objective.REVENUE:
        obj = revenue
    else:
        if additive:
            per_agent = np.zeros((n_ep, n))
            for t, cols in enumerate(type_cols):
                owned = alloc[:, :, cols].any(axis=2)
                per_agent += owned * values[:, :, t]
        else:
            per_agent = np.where(alloc, values, 0.0).max(axis=2)
            per_agent[~alloc.any(axis=2)] = 0.0
        obj = per_agent.min(axis=1)

    rewards = obj.copy()
    if variance_reduction and objective is not Objective.MAXMIN:
        rewards = obj - offline_batch(spec, values, objective)

    return BatchResult(
        observations=np.stack(obs_all),
        agent_masks=np.stack(amask_all),
        item_masks=np.stack(imask_all),
        agents=np.stack(agents_all),
        prices=np.stack(prices_all),
        extras=extras_all,
        rewards=rewards,
        objective_values=obj,
        allocation=alloc,
        payments=payments,
    )


def rsd_act_fn(obs, agents_mask, items_mask, rng, mode):
    """Array-level random serial dictatorship (for fast baseline evaluation)."""
    scores = np.where(agents_mask, rng.random(agents_mask.shape), -np.inf)
    agents = scores.argmax(axis=1)
    prices = np.zeros((agents_mask.shape[0], items_mask.shape[1]))
    return agents, prices, {}
