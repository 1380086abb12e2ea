import time

from seqprice.learner.train import TrainConfig, train_seed

CONFIGS = [
    ("two_worlds", "remaining_agents", {}),
    ("two_worlds", "none", {}),
    ("colors", "none", {}),
    ("inventory", "price_allocation_matrix", {}),
    ("inventory", "remaining_agents", {}),
    ("kitchen_sink", "price_allocation_matrix", {}),
    ("prop8_linear", "price_allocation_matrix", {}),
    ("correlated", "price_allocation_matrix", {"n": 20, "m": 5, "delta": 0.5}),
]

for setting, kind, params in CONFIGS:
    cfg = TrainConfig(
        setting=setting, kind=kind, setting_params=params,
        total_steps=4 * 2048, batch_size=2048, seeds=(0,),
        eval_interval=2, eval_episodes=500,
    )
    t0 = time.time()
    curve = train_seed(cfg, 0)
    dt = time.time() - t0
    spec = cfg.build_setting()
    per_update = dt / 4
    print(f"{setting:14s} {kind:24s} n={spec.n:2d} m={spec.m:2d} "
          f"{per_update:6.2f}s/update last={curve.eval_means[-1]:.4f} "
          f"exact={curve.final_exact}")
