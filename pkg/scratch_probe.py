import sys
import time

from seqprice.learner.train import TrainConfig, train_seed

PROBES = {
    "tw_agents": ("two_worlds", "remaining_agents", {}, 300, 2048, {}),
    "tw_none": ("two_worlds", "none", {}, 300, 2048, {}),
    "colors_none": ("colors", "none", {}, 300, 2048, {}),
    "inv_full": ("inventory", "price_allocation_matrix", {}, 400, 2048, {}),
    "inv_agents": ("inventory", "remaining_agents", {}, 400, 2048, {}),
    "inv_none": ("inventory", "none", {}, 400, 2048, {}),
    "kitchen_full": ("kitchen_sink", "price_allocation_matrix", {}, 500, 2048, {}),
    "kitchen_wide": ("kitchen_sink", "price_allocation_matrix", {}, 1500, 2048,
                     {"init_log_std": 1.25}),
    "kitchen_wide2": ("kitchen_sink", "price_allocation_matrix", {}, 1500, 2048,
                      {"init_log_std": 1.25, "entropy_weight": 0.03}),
    "prop8_mlp": ("prop8_linear", "price_allocation_matrix", {}, 300, 2048, {}),
    "prop8_long": ("prop8_linear", "price_allocation_matrix", {}, 2000, 2048, {}),
    "prop8_ent": ("prop8_linear", "price_allocation_matrix", {}, 2000, 2048,
                  {"entropy_weight": 0.03}),
    "prop8_lin": ("prop8_linear", "price_allocation_matrix", {}, 300, 2048, {}),
    "prop8_lin_long": ("prop8_linear", "price_allocation_matrix", {}, 2000, 2048, {}),
    "prop8_4k": ("prop8_linear", "price_allocation_matrix", {}, 4000, 2048,
                 {"entropy_weight": 0.02}),
    "prop8_fast": ("prop8_linear", "price_allocation_matrix", {}, 3000, 2048,
                   {"entropy_weight": 0.02, "lr": 1e-3}),
    "prop8_fast2": ("prop8_linear", "price_allocation_matrix", {}, 3000, 2048,
                    {"entropy_weight": 0.05, "lr": 1e-3}),
    "prop8_wide": ("prop8_linear", "price_allocation_matrix", {}, 3000, 2048,
                   {"entropy_weight": 0.02, "lr": 1e-3, "init_log_std": 1.0}),
    "prop8_lin_fast": ("prop8_linear", "price_allocation_matrix", {}, 3000, 2048,
                       {"entropy_weight": 0.02, "lr": 1e-3}),
    "kitchen_w3": ("kitchen_sink", "price_allocation_matrix", {}, 2000, 2048,
                   {"init_log_std": 1.6}),
    "kitchen_w3b": ("kitchen_sink", "price_allocation_matrix", {}, 2000, 2048,
                    {"init_log_std": 1.6, "lr": 1e-3}),
    "corr_pam": ("correlated", "price_allocation_matrix",
                 {"n": 20, "m": 5, "delta": 0.5}, 400, 2048, {}),
    "corr_psp": ("correlated", "remaining_agents",
                 {"n": 20, "m": 5, "delta": 0.5}, 400, 2048, {}),
}

name = sys.argv[1]
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 0
setting, kind, params, updates, batch, extra = PROBES[name]
cfg = TrainConfig(
    setting=setting, kind=kind, setting_params=params,
    total_steps=updates * batch, batch_size=batch, seeds=(seed,),
    eval_interval=10, eval_episodes=1000,
    arch="linear" if "_lin" in name else "mlp",
    **extra,
)
t0 = time.time()
curve = train_seed(cfg, seed)
dt = time.time() - t0
tail = ", ".join(f"{v:.4f}" for v in curve.eval_means[-6:])
print(f"{name} seed={seed}: final={curve.final_value:.6f} "
      f"exact={curve.final_exact} [{dt:.0f}s] tail=[{tail}]")
