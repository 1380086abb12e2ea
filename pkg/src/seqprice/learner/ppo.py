"""Clipped-surrogate policy gradient on collected episode batches.

The reward is terminal-only (one objective value per episode); intermediate
rewards are zero.  Advantages come from generalized advantage estimation
against a separately trained value network (optionally disabled, which makes
the baseline zero).  The surrogate is maximized by RMSProp steps on the
negated gradient; gradients are exact backprop through the explicit network,
and :func:`surrogate_loss` / :func:`surrogate_grad` are exposed separately
so finite differences can check them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from seqprice.errors import TrainingError
from seqprice.learner.network import FeedForward, RMSProp
from seqprice.learner.policy import (
    LOG_2PI,
    PolicyParameters,
    masked_log_softmax,
)


@dataclass
class SampleBatch:
    """Flattened per-round samples for one update."""

    obs: np.ndarray  # (S, d)
    agents: np.ndarray  # (S,)
    agent_mask: np.ndarray  # (S, n)
    item_mask: np.ndarray  # (S, m)
    u: np.ndarray  # (S, m) pre-squash price draws
    old_logp: np.ndarray  # (S,)
    advantages: np.ndarray  # (S,)
    returns: np.ndarray  # (S,)

    def take(self, idx: np.ndarray) -> "SampleBatch":
        return SampleBatch(
            obs=self.obs[idx],
            agents=self.agents[idx],
            agent_mask=self.agent_mask[idx],
            item_mask=self.item_mask[idx],
            u=self.u[idx],
            old_logp=self.old_logp[idx],
            advantages=self.advantages[idx],
            returns=self.returns[idx],
        )


def compute_gae(
    rewards: np.ndarray,  # (E,) terminal rewards
    values: np.ndarray,  # (T, E) baseline estimates per round
    gamma: float,
    lam: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Advantages and value targets; the episode pays out only at the end."""
    T, E = values.shape
    adv = np.zeros((T, E))
    next_value = np.zeros(E)
    next_adv = np.zeros(E)
    for t in range(T - 1, -1, -1):
        r = rewards if t == T - 1 else 0.0
        delta = r + gamma * next_value - values[t]
        next_adv = delta + gamma * lam * next_adv
        adv[t] = next_adv
        next_value = values[t]
    return adv, adv + values


def _log_probs(params: PolicyParameters, batch: SampleBatch):
    """Forward pass + per-sample log-probs; returns intermediates for grads."""
    out = params.net.forward(batch.obs)
    scores, mu = out[:, : params.n], out[:, params.n :]
    log_p = masked_log_softmax(scores, batch.agent_mask)
    probs = np.where(batch.agent_mask, np.exp(log_p), 0.0)
    logp_cat = np.take_along_axis(log_p, batch.agents[:, None], axis=1)[:, 0]
    std = np.exp(params.log_std)[None, :]
    z = (batch.u - mu) / std
    price_terms = np.where(
        batch.item_mask,
        -0.5 * z * z - params.log_std[None, :] - 0.5 * LOG_2PI,
        0.0,
    )
    logp = logp_cat + price_terms.sum(axis=1)
    return logp, scores, mu, probs, log_p, z, std


def surrogate_loss(
    params: PolicyParameters,
    batch: SampleBatch,
    clip_ratio: float,
    entropy_weight: float,
) -> float:
    """Mean clipped surrogate plus entropy bonus (the maximized objective)."""
    logp, _, _, probs, log_p, _, _ = _log_probs(params, batch)
    ratio = np.exp(logp - batch.old_logp)
    adv = batch.advantages
    clipped = np.clip(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio)
    surr = np.minimum(ratio * adv, clipped * adv).mean()
    safe_log = np.where(probs > 0, log_p, 0.0)
    cat_entropy = -(probs * safe_log).sum(axis=1)
    price_entropy = (
        batch.item_mask * (params.log_std + 0.5 * (1.0 + LOG_2PI))[None, :]
    ).sum(axis=1)
    entropy = (cat_entropy + price_entropy).mean()
    return float(surr + entropy_weight * entropy)


def surrogate_grad(
    params: PolicyParameters,
    batch: SampleBatch,
    clip_ratio: float,
    entropy_weight: float,
) -> tuple[float, np.ndarray]:
    """(loss, gradient of the loss w.r.t. the flat parameter vector)."""
    logp, scores, mu, probs, log_p, z, std = _log_probs(params, batch)
    S = batch.obs.shape[0]
    ratio = np.exp(logp - batch.old_logp)
    adv = batch.advantages
    clipped = np.clip(ratio, 1.0 - clip_ratio, 1.0 + clip_ratio)
    unclipped_term = ratio * adv
    clipped_term = clipped * adv
    surr = np.minimum(unclipped_term, clipped_term).mean()
    # min picks the unclipped branch -> gradient flows through the ratio
    active = unclipped_term <= clipped_term
    d_logp = np.where(active, ratio * adv, 0.0) / S

    onehot = np.zeros_like(probs)
    onehot[np.arange(S), batch.agents] = 1.0
    g_scores = d_logp[:, None] * (onehot - probs)
    g_mu = d_logp[:, None] * np.where(batch.item_mask, z / std, 0.0)
    g_log_std = (
        d_logp[:, None] * np.where(batch.item_mask, z * z - 1.0, 0.0)
    ).sum(axis=0)

    safe_log = np.where(probs > 0, log_p, 0.0)
    cat_entropy = -(probs * safe_log).sum(axis=1)
    price_entropy = (
        batch.item_mask * (params.log_std + 0.5 * (1.0 + LOG_2PI))[None, :]
    ).sum(axis=1)
    entropy = (cat_entropy + price_entropy).mean()
    # dH/dlogit_k = -p_k (log p_k + H) for the masked categorical
    g_scores += entropy_weight * (-probs * (safe_log + cat_entropy[:, None])) / S
    g_log_std += entropy_weight * batch.item_mask.sum(axis=0) / S

    grad_out = np.concatenate([g_scores, g_mu], axis=1)
    net_grads = params.net.backward(grad_out)
    flat = np.concatenate(net_grads + [g_log_std])
    loss = float(surr + entropy_weight * entropy)
    return loss, flat


def value_forward(net: FeedForward, obs: np.ndarray) -> np.ndarray:
    return net.forward(obs)[:, 0]


def value_grad(net: FeedForward, obs: np.ndarray, targets: np.ndarray):
    """0.5 * mean squared error and its gradient in flat order."""
    v = value_forward(net, obs)
    err = v - targets
    loss = 0.5 * float((err * err).mean())
    grad_out = (err / err.size)[:, None]
    return loss, np.concatenate(net.backward(grad_out))


@dataclass
class PPOState:
    params: PolicyParameters
    value_net: Optional[FeedForward]
    clip_ratio: float
    entropy_weight: float
    gamma: float
    lam: float
    epochs: int
    minibatch: int
    normalize_advantages: bool
    rng: np.random.Generator
    policy_opt: RMSProp = field(init=False)
    value_opt: Optional[RMSProp] = field(init=False)
    lr: float = 3e-4

    def __post_init__(self):
        self.policy_opt = RMSProp(self.params.flat().size, self.lr)
        self.value_opt = (
            RMSProp(self.value_net.flat().size, self.lr)
            if self.value_net is not None
            else None
        )


def build_samples(state: PPOState, batch) -> SampleBatch:
    """Flatten a lockstep batch into per-round samples with advantages."""
    T, E, d = batch.observations.shape
    obs_flat = batch.observations.reshape(T * E, d)
    if state.value_net is not None:
        values = value_forward(state.value_net, obs_flat).reshape(T, E)
    else:
        values = np.zeros((T, E))
    adv, rets = compute_gae(batch.rewards, values, state.gamma, state.lam)
    if state.normalize_advantages:
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    u = np.stack([ex["u"] for ex in batch.extras])
    old_logp = np.stack([ex["logp"] for ex in batch.extras])
    return SampleBatch(
        obs=obs_flat,
        agents=batch.agents.reshape(-1),
        agent_mask=batch.agent_masks.reshape(T * E, -1),
        item_mask=batch.item_masks.reshape(T * E, -1),
        u=u.reshape(T * E, -1),
        old_logp=old_logp.reshape(-1),
        advantages=adv.reshape(-1),
        returns=rets.reshape(-1),
    )


def ppo_update(state: PPOState, batch) -> dict:
    """K epochs of minibatch ascent; returns loss diagnostics."""
    samples = build_samples(state, batch)
    S = samples.obs.shape[0]
    last_loss, last_vloss = 0.0, 0.0
    for _ in range(state.epochs):
        perm = state.rng.permutation(S)
        for lo in range(0, S, state.minibatch):
            idx = perm[lo : lo + state.minibatch]
            mb = samples.take(idx)
            loss, grad = surrogate_grad(
                state.params, mb, state.clip_ratio, state.entropy_weight
            )
            if not np.isfinite(loss) or not np.isfinite(grad).all():
                raise TrainingError(
                    f"non-finite surrogate (loss={loss}); "
                    f"adv range [{mb.advantages.min()}, {mb.advantages.max()}]"
                )
            new_flat = state.policy_opt.step(state.params.flat(), -grad)
            state.params.set_flat(new_flat)
            if state.value_net is not None:
                vloss, vgrad = value_grad(state.value_net, mb.obs, mb.returns)
                if not np.isfinite(vloss):
                    raise TrainingError(f"non-finite value loss {vloss}")
                state.value_net.set_flat(
                    state.value_opt.step(state.value_net.flat(), vgrad)
                )
                last_vloss = vloss
            last_loss = loss
    return {"surrogate": last_loss, "value_loss": last_vloss}
