"""Policy parameterization: masked agent choice plus bounded price head.

One network maps the observation statistic to ``n + m`` outputs.  The first
``n`` are agent scores: the visited agent is sampled from a softmax over the
not-yet-visited agents during training and is the masked argmax at
evaluation.  The last ``m`` parameterize prices through a squashed Gaussian:
a pre-squash draw ``u ~ Normal(output_j, std_j)`` posts price
``cap * sigmoid(u)``, so prices stay in ``(0, cap)`` and the evaluation-mode
price is ``cap * sigmoid(output_j)``.  Log-probabilities are taken in
pre-squash space, where the density is an ordinary Gaussian; the squash is
part of the action-to-price map, applied identically when acting and when
re-evaluating ratios, so surrogate ratios are well defined without a
change-of-variables term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from seqprice.errors import InputError, ProtocolError
from seqprice.learner.network import FeedForward
from seqprice.mechanism import Action

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class PolicyParameters:
    n: int
    m: int
    input_dim: int
    arch: str  # "mlp" or "linear"
    price_cap: float
    net: FeedForward
    log_std: np.ndarray  # (m,) learnable pre-squash stds

    def flat(self) -> np.ndarray:
        return np.concatenate([self.net.flat(), self.log_std])

    def set_flat(self, vec: np.ndarray) -> None:
        k = vec.size - self.m
        self.net.set_flat(vec[:k])
        self.log_std = vec[k:].copy()

    def copy(self) -> "PolicyParameters":
        return PolicyParameters(
            n=self.n,
            m=self.m,
            input_dim=self.input_dim,
            arch=self.arch,
            price_cap=self.price_cap,
            net=self.net.copy(),
            log_std=self.log_std.copy(),
        )


def init_policy(
    n: int,
    m: int,
    input_dim: int,
    hidden: int,
    arch: str,
    price_cap: float,
    rng: np.random.Generator,
    init_log_std: float = 0.0,
) -> PolicyParameters:
    if arch not in ("mlp", "linear"):
        raise InputError(f"unknown architecture {arch!r}")
    net = FeedForward(
        input_dim, n + m, hidden, linear=(arch == "linear"), rng=rng
    )
    # A wide initial std is the only way the squashed head can propose prices
    # far into the sigmoid tails before any gradient signal exists there.
    return PolicyParameters(
        n=n,
        m=m,
        input_dim=input_dim,
        arch=arch,
        price_cap=price_cap,
        net=net,
        log_std=np.full(m, float(init_log_std)),
    )


def policy_forward(
    params: PolicyParameters, observation: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """One observation -> (agent scores, price outputs)."""
    obs = np.asarray(observation, dtype=float).ravel()
    if obs.size != params.input_dim:
        raise InputError(
            f"observation length {obs.size}, statistic length {params.input_dim}"
        )
    out = params.net.forward(obs[None, :])[0]
    return out[: params.n], out[params.n :]


def forward_batch(
    params: PolicyParameters, observations: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    obs = np.asarray(observations, dtype=float)
    if obs.ndim != 2 or obs.shape[1] != params.input_dim:
        raise InputError(
            f"observation batch shape {obs.shape}, statistic length "
            f"{params.input_dim}"
        )
    out = params.net.forward(obs)
    return out[:, : params.n], out[:, params.n :]


def masked_log_softmax(scores: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise log-probabilities over masked-in entries (-inf elsewhere)."""
    logits = np.where(mask, scores, -np.inf)
    top = logits.max(axis=-1, keepdims=True)
    shifted = logits - top
    lse = np.log(np.exp(np.where(mask, shifted, -np.inf)).sum(axis=-1, keepdims=True))
    return shifted - lse


def _gaussian_logpdf(u, mean, std):
    z = (u - mean) / std
    return -0.5 * z * z - np.log(std) - 0.5 * LOG_2PI


def batch_select(
    params: PolicyParameters,
    scores: np.ndarray,  # (E, n)
    price_out: np.ndarray,  # (E, m)
    agent_mask: np.ndarray,
    item_mask: np.ndarray,
    mode: str,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized action selection.

    Returns (agents, prices, pre-squash draws, log-probabilities).  Prices of
    allocated items are not sampled (mean, no density term); only remaining
    items contribute to the log-probability.
    """
    if not agent_mask.any(axis=1).all():
        raise ProtocolError("no remaining agent to visit")
    logits = np.where(agent_mask, scores, -np.inf)
    if mode == "train":
        gumbel = -np.log(-np.log(rng.uniform(size=logits.shape)))
        agents = np.where(agent_mask, logits + gumbel, -np.inf).argmax(axis=1)
    else:
        agents = logits.argmax(axis=1)
    logp_cat = np.take_along_axis(
        masked_log_softmax(scores, agent_mask), agents[:, None], axis=1
    )[:, 0]

    std = np.exp(params.log_std)[None, :]
    if mode == "train":
        noise = rng.standard_normal(price_out.shape)
        u = np.where(item_mask, price_out + std * noise, price_out)
    else:
        u = price_out.copy()
    logp_price = np.where(
        item_mask, _gaussian_logpdf(u, price_out, std), 0.0
    ).sum(axis=1)
    prices = params.price_cap * expit(u)
    return agents, prices, u, logp_cat + logp_price


def select_action(
    params: PolicyParameters,
    outputs: tuple[np.ndarray, np.ndarray],
    remaining_agents: np.ndarray,
    remaining_items: np.ndarray,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> tuple[Action, float]:
    """Single-observation action from precomputed forward outputs."""
    scores, price_out = outputs
    if mode == "train" and rng is None:
        raise InputError("train-mode selection needs a generator")
    agents, prices, _, logp = batch_select(
        params,
        np.asarray(scores, dtype=float)[None, :],
        np.asarray(price_out, dtype=float)[None, :],
        np.asarray(remaining_agents, dtype=bool)[None, :],
        np.asarray(remaining_items, dtype=bool)[None, :],
        mode,
        rng if rng is not None else np.random.default_rng(0),
    )
    item_ids = np.flatnonzero(remaining_items)
    action = Action(
        agent=int(agents[0]),
        prices={int(j): float(prices[0, j]) for j in item_ids},
    )
    return action, float(logp[0])


class NeuralPolicy:
    """Policy-protocol adapter around one parameter vector."""

    def __init__(self, params: PolicyParameters, seed: int = 0):
        self.params = params
        self.rng = np.random.default_rng(seed)

    def reset(self, seed) -> None:
        if seed is not None:
            self.rng = np.random.default_rng(seed)

    def act(self, observation, remaining_agents, remaining_items, mode="eval"):
        outputs = policy_forward(self.params, observation)
        return select_action(
            self.params, outputs, remaining_agents, remaining_items, mode, self.rng
        )


def policy_act_fn(params: PolicyParameters):
    """Array-level act function for the lockstep batch runner."""

    def act(obs, agent_mask, item_mask, rng, mode):
        scores, price_out = forward_batch(params, obs)
        agents, prices, u, logp = batch_select(
            params, scores, price_out, agent_mask, item_mask, mode, rng
        )
        return agents, prices, {"u": u, "logp": logp}

    return act


def save_policy(path, params: PolicyParameters) -> None:
    """Persist parameters to an .npz archive."""
    np.savez(
        path,
        flat=params.flat(),
        meta=np.array(
            [params.n, params.m, params.input_dim, params.net.hidden], dtype=int
        ),
        arch=np.array(params.arch),
        price_cap=np.array(params.price_cap),
    )


def load_policy(path) -> PolicyParameters:
    """Rebuild parameters saved by save_policy."""
    with np.load(path) as data:
        n, m, input_dim, hidden = (int(x) for x in data["meta"])
        params = init_policy(
            n, m, input_dim=input_dim, hidden=hidden,
            arch=str(data["arch"]), price_cap=float(data["price_cap"]),
            rng=np.random.default_rng(0),
        )
        params.set_flat(data["flat"])
    return params
