from seqprice.learner.network import FeedForward, RMSProp
from seqprice.learner.policy import (
    NeuralPolicy,
    PolicyParameters,
    init_policy,
    policy_act_fn,
    policy_forward,
    select_action,
)
from seqprice.learner.ppo import (
    PPOState,
    SampleBatch,
    compute_gae,
    ppo_update,
    surrogate_grad,
    surrogate_loss,
)
from seqprice.learner.train import (
    AggregateCurve,
    SeedCurve,
    TrainConfig,
    evaluate_policy,
    exact_policy_value,
    seed_protocol,
    train,
    train_seed,
    write_aggregate_csv,
    write_curves_csv,
)

__all__ = [
    "AggregateCurve",
    "FeedForward",
    "NeuralPolicy",
    "PPOState",
    "PolicyParameters",
    "RMSProp",
    "SampleBatch",
    "SeedCurve",
    "TrainConfig",
    "compute_gae",
    "evaluate_policy",
    "exact_policy_value",
    "init_policy",
    "policy_act_fn",
    "policy_forward",
    "ppo_update",
    "seed_protocol",
    "select_action",
    "surrogate_grad",
    "surrogate_loss",
    "train",
    "train_seed",
    "write_aggregate_csv",
    "write_curves_csv",
]
