"""Experiment runner: trains/solves every arm and writes the artifact tree.

One experiment directory holds, per learned arm, the per-seed learning
curves and the top-3 aggregate (CSV), the trained parameters (.npz per
seed), plus a summary table over all arms, a learning-curve figure, and a
manifest recording the config hash and every seed used, which together make
each number in the summary reproducible.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Optional, Union

from seqprice.errors import (
    InputError,
    SizeBudgetError,
    UnsupportedSettingError,
)
from seqprice.experiment.config import ArmSpec, ExperimentConfig, parse_config
from seqprice.experiment.report import (
    SummaryRow,
    SummaryTable,
    render_curves_figure,
    write_summary_csv,
)
from seqprice.learner.policy import save_policy
from seqprice.learner.train import (
    TrainConfig,
    seed_protocol,
    train,
    write_aggregate_csv,
    write_curves_csv,
)
from seqprice.mechanism import Objective
from seqprice.oracle.evaluate import rsd_value
from seqprice.oracle.solve import optimal_adaptive_spm, optimal_static
from seqprice.settings import get_setting, normalize

N_SEEDS_DEFAULT = 6


def _as_config(config: Union[ExperimentConfig, str, Path]) -> ExperimentConfig:
    if isinstance(config, ExperimentConfig):
        return config
    return parse_config(config)


def _build_spec(cfg: ExperimentConfig):
    spec = get_setting(cfg.setting, **cfg.setting_params)
    if cfg.normalize and not spec.normalized:
        spec = normalize(spec)
    return spec


def _train_config(cfg: ExperimentConfig, arm: ArmSpec) -> TrainConfig:
    merged = dict(cfg.train_overrides)
    merged.update(arm.train_overrides)
    n_seeds = merged.pop("n_seeds", N_SEEDS_DEFAULT)
    seeds = tuple(range(cfg.seed, cfg.seed + n_seeds))
    return TrainConfig(
        setting=cfg.setting,
        kind=arm.kind,
        setting_params=cfg.setting_params,
        objective=cfg.objective,
        seeds=seeds,
        normalize_setting=cfg.normalize,
        **merged,
    )


def _oracle_reference(spec, objective: Objective, kind: str) -> Optional[float]:
    try:
        return optimal_adaptive_spm(
            spec, objective, kind=kind, build_tree=False
        ).value
    except (SizeBudgetError, UnsupportedSettingError):
        return None


def _baseline_row(spec, objective: Objective, arm: ArmSpec) -> SummaryRow:
    if arm.baseline == "rsd":
        value, exact = rsd_value(spec, objective)
        note = "exact" if exact else "monte-carlo"
        return SummaryRow(
            arm=arm.name, source="rsd", value=value, note=note
        )
    if arm.baseline in ("oracle_asp", "oracle_psp"):
        res = optimal_static(spec, objective, arm.baseline[-3:].upper())
        note = "restricted" if res.restricted else ""
        return SummaryRow(
            arm=arm.name, source=arm.baseline, value=res.value, note=note
        )
    res = optimal_adaptive_spm(
        spec, objective, kind="price_allocation_matrix", build_tree=False
    )
    return SummaryRow(
        arm=arm.name, source="oracle_spm", value=res.value, note=res.method
    )


def _run_learned_arm(
    cfg: ExperimentConfig, arm: ArmSpec, out: Path
) -> SummaryRow:
    spec = _build_spec(cfg)
    objective = cfg.objective or spec.objective_default
    tconfig = _train_config(cfg, arm)
    curves = train(tconfig)
    agg = seed_protocol(curves)
    write_curves_csv(out / f"arm_{arm.name}_curves.csv", curves)
    write_aggregate_csv(out / f"arm_{arm.name}_aggregate.csv", agg)
    for curve in curves:
        save_policy(out / f"arm_{arm.name}_seed{curve.seed}.npz", curve.params)
    oracle_ref = _oracle_reference(spec, objective, arm.kind)
    return SummaryRow(
        arm=arm.name,
        source=arm.kind,
        value=agg.final_mean,
        ci_low=agg.final_ci[0],
        ci_high=agg.final_ci[1],
        oracle_ref=oracle_ref,
        note=f"seeds {tconfig.seeds[0]}..{tconfig.seeds[-1]}",
    )


def _run_arm(cfg: ExperimentConfig, arm: ArmSpec, out: Path) -> SummaryRow:
    try:
        if arm.learned:
            return _run_learned_arm(cfg, arm, out)
        spec = _build_spec(cfg)
        objective = cfg.objective or spec.objective_default
        return _baseline_row(spec, objective, arm)
    except (SizeBudgetError, UnsupportedSettingError) as e:
        # a too-big oracle kills this arm only; the others still run
        return SummaryRow(
            arm=arm.name,
            source=arm.kind or arm.baseline,
            value=None,
            error=f"{type(e).__name__}: {e}",
        )


def _run_arm_remote(config_text: str, arm_index: int, out_str: str) -> SummaryRow:
    cfg = parse_config(config_text)
    return _run_arm(cfg, cfg.arms[arm_index], Path(out_str))


def _manifest(cfg: ExperimentConfig, rows: list[SummaryRow]) -> dict:
    digest = hashlib.sha256(cfg.source_text.encode()).hexdigest()
    arms = {}
    for arm in cfg.arms:
        entry: dict = {"kind": arm.kind, "baseline": arm.baseline}
        if arm.learned:
            merged = dict(cfg.train_overrides)
            merged.update(arm.train_overrides)
            n_seeds = merged.pop("n_seeds", N_SEEDS_DEFAULT)
            entry["seeds"] = list(range(cfg.seed, cfg.seed + n_seeds))
            entry["train_overrides"] = merged
        arms[arm.name] = entry
    return {
        "config_sha256": digest,
        "setting": cfg.setting,
        "setting_params": cfg.setting_params,
        "objective": cfg.objective.value if cfg.objective else None,
        "normalize": cfg.normalize,
        "master_seed": cfg.seed,
        "arms": arms,
        "errors": {r.arm: r.error for r in rows if r.error},
    }


def run_experiment(
    config: Union[ExperimentConfig, str, Path],
    out_dir: Optional[Union[str, Path]] = None,
    parallel_arms: bool = False,
) -> Path:
    """Run every arm of a config; returns the artifact directory."""
    cfg = _as_config(config)
    out = Path(out_dir or cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)

    if parallel_arms and len(cfg.arms) > 1:
        with ProcessPoolExecutor(max_workers=len(cfg.arms)) as pool:
            futures = [
                pool.submit(_run_arm_remote, cfg.source_text, i, str(out))
                for i in range(len(cfg.arms))
            ]
            rows = [f.result() for f in futures]
    else:
        rows = [_run_arm(cfg, arm, out) for arm in cfg.arms]

    table = SummaryTable(
        setting=cfg.setting,
        objective=(cfg.objective or _build_spec(cfg).objective_default).value,
        rows=rows,
    )
    write_summary_csv(out / "summary.csv", table)
    with open(out / "manifest.json", "w") as fh:
        json.dump(_manifest(cfg, rows), fh, indent=2, sort_keys=True)
        fh.write("\n")
    render_curves_figure(out, cfg, rows)
    if rows and all(r.error for r in rows):
        raise SizeBudgetError(
            f"every arm failed; see {out / 'summary.csv'} for details"
        )
    return out


def solve_experiment(
    config: Union[ExperimentConfig, str, Path],
    out_dir: Optional[Union[str, Path]] = None,
) -> Path:
    """Oracle-only pass: exact values per arm, no training.

    Learned arms are solved under their statistic; baselines as usual.  When
    the statistic solver exposes its subproblem table, it lands in
    ``subproblems_<arm>.csv`` (one row per (agent, remaining agents, items
    left) action value).
    """
    cfg = _as_config(config)
    out = Path(out_dir or cfg.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    spec = _build_spec(cfg)
    rows = []
    for arm in cfg.arms:
        try:
            if arm.learned:
                objective = cfg.objective or spec.objective_default
                res = optimal_adaptive_spm(
                    spec, objective, kind=arm.kind, build_tree=False
                )
                rows.append(
                    SummaryRow(
                        arm=arm.name, source=arm.kind, value=res.value,
                        note=res.method,
                    )
                )
                if res.q_table:
                    _write_q_table(out / f"subproblems_{arm.name}.csv", res.q_table)
            else:
                objective = cfg.objective or spec.objective_default
                rows.append(_baseline_row(spec, objective, arm))
        except (SizeBudgetError, UnsupportedSettingError) as e:
            rows.append(
                SummaryRow(
                    arm=arm.name, source=arm.kind or arm.baseline, value=None,
                    error=f"{type(e).__name__}: {e}",
                )
            )
    table = SummaryTable(
        setting=cfg.setting,
        objective=(cfg.objective or spec.objective_default).value,
        rows=rows,
    )
    write_summary_csv(out / "solution.csv", table)
    with open(out / "manifest.json", "w") as fh:
        json.dump(_manifest(cfg, rows), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if rows and all(r.error for r in rows):
        raise SizeBudgetError(
            f"every arm failed; see {out / 'solution.csv'} for details"
        )
    return out


def _write_q_table(path: Path, q: dict) -> None:
    import csv

    rows = sorted(
        (agent, ";".join(str(a) for a in sorted(agents)), len(items), value)
        for (agent, agents, items), value in q.items()
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["agent", "agents_left", "items_left", "value"])
        for agent, agents, n_items, value in rows:
            writer.writerow([agent, agents, n_items, f"{value:.10g}"])


def evaluate_experiment(
    config: Union[ExperimentConfig, str, Path],
    out_dir: Union[str, Path],
    seed: Optional[int] = None,
    episodes: int = 2000,
) -> Path:
    """Re-evaluate the trained policies stored in an artifact directory."""
    import csv

    import numpy as np

    from seqprice.learner.policy import load_policy
    from seqprice.learner.train import evaluate_policy

    cfg = _as_config(config)
    out = Path(out_dir)
    if not (out / "manifest.json").exists():
        raise InputError(f"no manifest.json under {out}; train first")
    spec = _build_spec(cfg)
    objective = cfg.objective or spec.objective_default
    eval_seed = cfg.seed if seed is None else seed
    rows = []
    for arm in cfg.arms:
        if not arm.learned:
            continue
        for path in sorted(out.glob(f"arm_{arm.name}_seed*.npz")):
            seed_id = int(path.stem.rsplit("seed", 1)[1])
            params = load_policy(path)
            mean, std = evaluate_policy(
                params, spec, arm.kind, objective,
                np.random.default_rng([eval_seed, seed_id]), episodes,
            )
            rows.append((arm.name, seed_id, episodes, mean, std))
    if not rows:
        raise InputError("no trained policies found to evaluate")
    with open(out / "evaluation.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["arm", "seed", "episodes", "eval_mean", "eval_std"])
        for arm_name, seed_id, eps, mean, std in rows:
            writer.writerow([arm_name, seed_id, eps, f"{mean:.10g}", f"{std:.10g}"])
    return out
