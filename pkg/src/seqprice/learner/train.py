"""Training loop, evaluation protocol, and seed aggregation.

Training alternates lockstep batch collection with clipped-surrogate
updates.  Evaluation always uses fresh samples drawn from a stream separate
from the training stream, with deterministic (argmax/mean) actions.  When a
setting has an enumerable support, the final policy is additionally scored
exactly by pushing the whole support through the batch runner and taking the
probability-weighted mean, so acceptance margins do not inherit Monte Carlo
noise.

Seed aggregation follows a fixed protocol: seeds are ranked by their
whole-curve mean evaluation performance, the top 3 are averaged, and a 95%
confidence band is attached from the Student-t quantile for 3 samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from seqprice.errors import InputError, SizeBudgetError, UnsupportedSettingError
from seqprice.episode import run_batch
from seqprice.learner.network import FeedForward
from seqprice.learner.policy import PolicyParameters, init_policy, policy_act_fn
from seqprice.learner.ppo import PPOState, ppo_update
from seqprice.mechanism import Objective
from seqprice.settings import SettingSpec, get_setting, normalize, support_values
from seqprice.statistics import check_kind, statistic_length

# two-sided 95% quantile of Student t with 2 degrees of freedom
T95_DF2 = 4.302652729911275

EXACT_EVAL_ELEMENTS = 4_000_000


@dataclass
class TrainConfig:
    setting: str
    kind: str
    setting_params: dict = field(default_factory=dict)
    setting_spec: Optional[SettingSpec] = None  # ad-hoc spec, bypasses catalog
    objective: Optional[Objective] = None
    total_steps: int = 200_000
    batch_size: int = 2048
    minibatch: int = 256
    epochs: int = 4
    clip_ratio: float = 0.2
    gamma: float = 1.0
    lam: float = 0.95
    lr: float = 3e-4
    entropy_weight: float = 0.01
    hidden: int = 64
    arch: str = "mlp"
    init_log_std: float = 0.0
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4, 5)
    eval_interval: int = 5  # updates between evaluations
    eval_episodes: int = 2000
    normalize_advantages: bool = True
    use_value_baseline: bool = True
    variance_reduction: bool = True
    normalize_setting: bool = True

    def __post_init__(self):
        check_kind(self.kind)
        positives = {
            "total_steps": self.total_steps,
            "batch_size": self.batch_size,
            "minibatch": self.minibatch,
            "epochs": self.epochs,
            "lr": self.lr,
            "hidden": self.hidden,
            "eval_interval": self.eval_interval,
            "eval_episodes": self.eval_episodes,
        }
        for name, value in positives.items():
            if value <= 0:
                raise InputError(f"{name} must be positive, got {value}")
        if not 0.0 < self.gamma <= 1.0:
            raise InputError(f"gamma must be in (0, 1], got {self.gamma}")
        if not 0.0 < self.clip_ratio < 1.0:
            raise InputError(f"clip_ratio must be in (0, 1), got {self.clip_ratio}")
        if not 0.0 <= self.lam <= 1.0:
            raise InputError(f"lam must be in [0, 1], got {self.lam}")
        if self.arch not in ("mlp", "linear"):
            raise InputError(f"arch must be mlp or linear, got {self.arch!r}")
        if not self.seeds:
            raise InputError("seeds must be nonempty")
        if self.entropy_weight < 0:
            raise InputError("entropy_weight must be nonnegative")

    def build_setting(self) -> SettingSpec:
        if self.setting_spec is not None:
            spec = self.setting_spec
        else:
            spec = get_setting(self.setting, **self.setting_params)
        if self.normalize_setting and not spec.normalized:
            spec = normalize(spec)
        return spec


@dataclass
class SeedCurve:
    seed: int
    steps: list[int]
    eval_means: list[float]
    eval_stds: list[float]
    final_exact: Optional[float]
    params: PolicyParameters

    @property
    def final_value(self) -> float:
        return self.final_exact if self.final_exact is not None else self.eval_means[-1]

    @property
    def curve_mean(self) -> float:
        return float(np.mean(self.eval_means))


@dataclass
class AggregateCurve:
    steps: list[int]
    top3_mean: list[float]
    ci_low: list[float]
    ci_high: list[float]
    selected_seeds: list[int]
    final_mean: float
    final_ci: tuple[float, float]


def evaluate_policy(
    params: PolicyParameters,
    spec: SettingSpec,
    kind: str,
    objective: Objective,
    rng: np.random.Generator,
    episodes: int,
) -> tuple[float, float]:
    """Deterministic-policy value on fresh samples: (mean, std over episodes)."""
    batch = run_batch(
        policy_act_fn(params),
        spec,
        kind,
        objective,
        rng=rng,
        count=episodes,
        variance_reduction=False,
        mode="eval",
    )
    return float(batch.objective_values.mean()), float(batch.objective_values.std())


def exact_policy_value(
    params: PolicyParameters, spec: SettingSpec, kind: str, objective: Objective
) -> Optional[float]:
    """Exact expected value of the deterministic policy on a finite support."""
    try:
        values, probs = support_values(spec)
    except (UnsupportedSettingError, SizeBudgetError):
        return None
    if values.size > EXACT_EVAL_ELEMENTS:
        return None
    batch = run_batch(
        policy_act_fn(params),
        spec,
        kind,
        objective,
        values=values.astype(float),
        rng=np.random.default_rng(0),
        variance_reduction=False,
        mode="eval",
    )
    return float(
        sum(float(p) * v for p, v in zip(probs, batch.objective_values))
    )


def train_seed(config: TrainConfig, seed: int) -> SeedCurve:
    spec = config.build_setting()
    objective = config.objective or spec.objective_default
    input_dim = statistic_length(config.kind, spec.n, spec.m)
    ss = np.random.SeedSequence([seed, 0x5E9])
    init_s, collect_s, update_s, eval_s = ss.spawn(4)
    init_rng = np.random.default_rng(init_s)
    collect_rng = np.random.default_rng(collect_s)

    params = init_policy(
        spec.n, spec.m, input_dim, config.hidden, config.arch,
        price_cap=spec.vmax, rng=init_rng,
        init_log_std=config.init_log_std,
    )
    value_net = (
        FeedForward(input_dim, 1, config.hidden, linear=False, rng=init_rng)
        if config.use_value_baseline
        else None
    )
    state = PPOState(
        params=params,
        value_net=value_net,
        clip_ratio=config.clip_ratio,
        entropy_weight=config.entropy_weight,
        gamma=config.gamma,
        lam=config.lam,
        epochs=config.epochs,
        minibatch=config.minibatch,
        normalize_advantages=config.normalize_advantages,
        rng=np.random.default_rng(update_s),
        lr=config.lr,
    )

    episodes_per_batch = max(1, config.batch_size // spec.n)
    steps_per_batch = episodes_per_batch * spec.n
    eval_streams = np.random.default_rng(eval_s)

    steps_list: list[int] = []
    means: list[float] = []
    stds: list[float] = []

    def record(step: int) -> None:
        mean, std = evaluate_policy(
            params, spec, config.kind, objective,
            np.random.default_rng(eval_streams.integers(2**63)),
            config.eval_episodes,
        )
        steps_list.append(step)
        means.append(mean)
        stds.append(std)

    record(0)
    steps_done = 0
    updates = 0
    vr = config.variance_reduction and objective is not Objective.MAXMIN
    while steps_done < config.total_steps:
        batch = run_batch(
            policy_act_fn(params),
            spec,
            config.kind,
            objective,
            rng=collect_rng,
            count=episodes_per_batch,
            variance_reduction=vr,
            mode="train",
        )
        ppo_update(state, batch)
        steps_done += steps_per_batch
        updates += 1
        if updates % config.eval_interval == 0:
            record(steps_done)
    if not steps_list or steps_list[-1] != steps_done:
        record(steps_done)

    final_exact = exact_policy_value(params, spec, config.kind, objective)
    return SeedCurve(
        seed=seed,
        steps=steps_list,
        eval_means=means,
        eval_stds=stds,
        final_exact=final_exact,
        params=params,
    )


def train(config: TrainConfig) -> list[SeedCurve]:
    return [train_seed(config, seed) for seed in config.seeds]


def seed_protocol(curves: list[SeedCurve], select_top: int = 3) -> AggregateCurve:
    """Rank seeds by whole-curve mean, average the best, attach a 95% band."""
    if len(curves) < select_top:
        raise InputError(
            f"seed protocol needs at least {select_top} curves, got {len(curves)}"
        )
    grids = {tuple(c.steps) for c in curves}
    if len(grids) != 1:
        raise InputError("seed curves disagree on evaluation steps")
    ranked = sorted(curves, key=lambda c: c.curve_mean, reverse=True)
    best = ranked[:select_top]
    stack = np.array([c.eval_means for c in best])  # (3, K)
    mean = stack.mean(axis=0)
    sd = stack.std(axis=0, ddof=1) if select_top > 1 else np.zeros(stack.shape[1])
    half = T95_DF2 * sd / np.sqrt(select_top)
    finals = np.array([c.final_value for c in best])
    fmean = float(finals.mean())
    fsd = float(finals.std(ddof=1)) if select_top > 1 else 0.0
    fhalf = T95_DF2 * fsd / np.sqrt(select_top)
    return AggregateCurve(
        steps=list(curves[0].steps),
        top3_mean=[float(x) for x in mean],
        ci_low=[float(x) for x in mean - half],
        ci_high=[float(x) for x in mean + half],
        selected_seeds=[c.seed for c in best],
        final_mean=fmean,
        final_ci=(fmean - fhalf, fmean + fhalf),
    )


def write_curves_csv(path, curves: list[SeedCurve]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "seed", "eval_mean", "eval_std"])
        for curve in curves:
            for step, mean, std in zip(curve.steps, curve.eval_means, curve.eval_stds):
                writer.writerow([step, curve.seed, f"{mean:.10g}", f"{std:.10g}"])


def write_aggregate_csv(path, agg: AggregateCurve) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "top3_mean", "ci_low", "ci_high"])
        for step, mean, lo, hi in zip(agg.steps, agg.top3_mean, agg.ci_low, agg.ci_high):
            writer.writerow([step, f"{mean:.10g}", f"{lo:.10g}", f"{hi:.10g}"])
