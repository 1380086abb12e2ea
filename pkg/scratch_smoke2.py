import time

import numpy as np
from fractions import Fraction

from seqprice.learner.network import FeedForward, RMSProp
from seqprice.learner.policy import init_policy
from seqprice.learner.ppo import (
    SampleBatch, surrogate_grad, surrogate_loss, value_forward, value_grad,
)
from seqprice.learner.train import TrainConfig, train_seed
from seqprice.mechanism import Objective
from seqprice.settings import independent_setting

rng = np.random.default_rng(0)

# 1. FeedForward backward FD
net = FeedForward(5, 4, hidden=8, linear=False, rng=rng)
x = rng.normal(size=(7, 5))
w = rng.normal(size=(7, 4))


def net_loss(flat):
    saved = net.flat()
    net.set_flat(flat)
    out = float((net.forward(x) * w).sum())
    net.set_flat(saved)
    return out


flat0 = net.flat()
net.forward(x)
grads = net.backward(w)
g = np.concatenate(grads)
h = 1e-5
worst = 0.0
idx = rng.choice(len(flat0), size=25, replace=False)
for i in idx:
    e = np.zeros_like(flat0)
    e[i] = h
    fd = (net_loss(flat0 + e) - net_loss(flat0 - e)) / (2 * h)
    worst = max(worst, abs(fd - g[i]))
print(f"net backward FD worst abs err: {worst:.2e}")

# 2. surrogate_grad FD
n, m, d = 3, 2, 4
params = init_policy(n, m, input_dim=d, arch="mlp", hidden=6,
                     price_cap=1.0, rng=rng)
S = 11
agent_mask = rng.random((S, n)) < 0.7
agent_mask[np.arange(S), rng.integers(0, n, S)] = True
agents = np.array([rng.choice(np.flatnonzero(row)) for row in agent_mask])
item_mask = rng.random((S, m)) < 0.7
batch = SampleBatch(
    obs=rng.normal(size=(S, d)),
    agents=agents,
    agent_mask=agent_mask,
    item_mask=item_mask,
    u=rng.normal(size=(S, m)),
    old_logp=rng.normal(scale=0.3, size=S),
    advantages=rng.normal(size=S),
    returns=rng.normal(size=S),
)
loss0, grad = surrogate_grad(params, batch, 0.2, 0.01)


def f(flat):
    saved = params.flat()
    params.set_flat(flat)
    out = surrogate_loss(params, batch, 0.2, 0.01)
    params.set_flat(saved)
    return out


flat0 = params.flat()
assert abs(f(flat0) - loss0) < 1e-12
worst = 0.0
idx = rng.choice(len(flat0), size=30, replace=False)
idx = np.concatenate([idx, np.arange(len(flat0) - m, len(flat0))])
for i in idx:
    e = np.zeros_like(flat0)
    e[i] = h
    fd = (f(flat0 + e) - f(flat0 - e)) / (2 * h)
    worst = max(worst, abs(fd - grad[i]))
print(f"surrogate FD worst abs err: {worst:.2e}")

# 3. value_grad FD
vnet = FeedForward(d, 1, hidden=6, linear=False, rng=rng)
targets = rng.normal(size=S)
vloss, gv = value_grad(vnet, batch.obs, targets)


def fv(flat):
    saved = vnet.flat()
    vnet.set_flat(flat)
    out = float(0.5 * ((value_forward(vnet, batch.obs) - targets) ** 2).mean())
    vnet.set_flat(saved)
    return out


vflat0 = vnet.flat()
assert abs(fv(vflat0) - vloss) < 1e-12
worst = 0.0
for i in rng.choice(len(vflat0), size=25, replace=False):
    e = np.zeros_like(vflat0)
    e[i] = h
    fd = (fv(vflat0 + e) - fv(vflat0 - e)) / (2 * h)
    worst = max(worst, abs(fd - gv[i]))
print(f"value FD worst abs err: {worst:.2e}")

# 4. bandit sanity: 2 agents (values 1 / 0), 1 item
dists = (
    (((1.0,), Fraction(1)),),
    (((0.0,), Fraction(1)),),
)
spec = independent_setting("bandit", dists)
cfg = TrainConfig(
    setting="bandit", kind="price_allocation_matrix",
    setting_params={}, setting_spec=spec, objective=Objective.WELFARE,
    total_steps=10_000, batch_size=64, minibatch=64, epochs=4,
    hidden=16, seeds=(0,), eval_interval=10, eval_episodes=200,
)
t0 = time.time()
try:
    curve = train_seed(cfg, 0)
    print(f"bandit final={curve.final_value:.6f} want 1.0 "
          f"[{time.time()-t0:.1f}s, {len(curve.steps)} points]")
except Exception as e:
    print(f"bandit failed: {type(e).__name__}: {e}")
