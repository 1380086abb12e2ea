"""Experiment configuration: flat key=value text with one [arm] block per arm.

Example::

    setting = correlated
    n = 20
    m = 5
    delta = 0.5
    seed = 0
    total_steps = 409600

    [arm]
    name = pam
    kind = price_allocation_matrix

    [arm]
    name = rsd
    baseline = rsd

Keys before the first ``[arm]`` apply to the whole experiment; keys inside an
arm block apply to that arm (training keys override the globals there).
Parse errors carry the offending line number and field name.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from seqprice.errors import InputError
from seqprice.mechanism import Objective
from seqprice.statistics import STATISTIC_KINDS

BASELINES = ("rsd", "oracle_asp", "oracle_psp", "oracle_spm")

# training keys accepted globally and per arm, with their parsers
_TRAIN_KEYS = {
    "total_steps": int,
    "batch_size": int,
    "minibatch": int,
    "epochs": int,
    "clip_ratio": float,
    "gamma": float,
    "lam": float,
    "lr": float,
    "entropy_weight": float,
    "hidden": int,
    "arch": str,
    "init_log_std": float,
    "eval_interval": int,
    "eval_episodes": int,
    "n_seeds": int,
}

_SETTING_PARAM_KEYS = {"n": int, "m": int, "delta": float}


def _parse_bool(raw: str) -> bool:
    low = raw.lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


@dataclass
class ArmSpec:
    name: str
    kind: Optional[str] = None  # statistic kind for a learned arm
    baseline: Optional[str] = None  # rsd / oracle_asp / oracle_psp / oracle_spm
    train_overrides: dict = field(default_factory=dict)

    @property
    def learned(self) -> bool:
        return self.kind is not None


@dataclass
class ExperimentConfig:
    setting: str
    setting_params: dict = field(default_factory=dict)
    objective: Optional[Objective] = None
    normalize: bool = True
    seed: int = 0
    arms: list[ArmSpec] = field(default_factory=list)
    train_overrides: dict = field(default_factory=dict)
    out: Optional[str] = None
    source_text: str = ""


class ConfigError(InputError):
    """Config parse/validation failure with line and field context."""

    def __init__(self, line: int, fieldname: str, message: str):
        self.line = line
        self.field = fieldname
        super().__init__(f"config line {line}, field {fieldname!r}: {message}")


def _split_line(lineno: int, line: str) -> tuple[str, str]:
    if "=" not in line:
        raise ConfigError(lineno, line.strip(), "expected key = value")
    key, _, raw = line.partition("=")
    return key.strip(), raw.strip()


def parse_config(source: Union[str, Path]) -> ExperimentConfig:
    """Parse a config file path or literal config text."""
    if isinstance(source, Path) or (
        "\n" not in str(source) and Path(str(source)).is_file()
    ):
        text = Path(source).read_text()
    else:
        text = str(source)

    cfg = ExperimentConfig(setting="", source_text=text)
    current: Optional[ArmSpec] = None
    seen_setting = False
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if line != "[arm]":
                raise ConfigError(lineno, line, "only [arm] blocks are allowed")
            current = ArmSpec(name="")
            cfg.arms.append(current)
            continue
        key, raw = _split_line(lineno, line)
        try:
            if current is None:
                seen_setting |= _apply_global(cfg, key, raw)
            else:
                _apply_arm(current, key, raw)
        except ConfigError:
            raise
        except (ValueError, KeyError) as e:
            raise ConfigError(lineno, key, str(e)) from None

    _validate(cfg, seen_setting)
    return cfg


def _apply_global(cfg: ExperimentConfig, key: str, raw: str) -> bool:
    if key == "setting":
        cfg.setting = raw
        return True
    if key == "objective":
        cfg.objective = Objective(raw)
    elif key == "normalize":
        cfg.normalize = _parse_bool(raw)
    elif key == "seed":
        cfg.seed = int(raw)
    elif key == "out":
        cfg.out = raw
    elif key in _SETTING_PARAM_KEYS:
        cfg.setting_params[key] = _SETTING_PARAM_KEYS[key](raw)
    elif key in _TRAIN_KEYS:
        cfg.train_overrides[key] = _TRAIN_KEYS[key](raw)
    else:
        raise KeyError(f"unknown key {key!r}")
    return False


def _apply_arm(arm: ArmSpec, key: str, raw: str) -> None:
    if key == "name":
        arm.name = raw
    elif key == "kind":
        if raw not in STATISTIC_KINDS:
            raise ValueError(f"unknown statistic kind {raw!r}")
        arm.kind = raw
    elif key == "baseline":
        if raw not in BASELINES:
            raise ValueError(f"unknown baseline {raw!r}; known: {BASELINES}")
        arm.baseline = raw
    elif key in _TRAIN_KEYS:
        arm.train_overrides[key] = _TRAIN_KEYS[key](raw)
    else:
        raise KeyError(f"unknown arm key {key!r}")


def _validate(cfg: ExperimentConfig, seen_setting: bool) -> None:
    if not seen_setting or not cfg.setting:
        raise ConfigError(0, "setting", "config must name a setting")
    if not cfg.arms:
        raise ConfigError(0, "arm", "config must declare at least one [arm]")
    names = [arm.name for arm in cfg.arms]
    for i, name in enumerate(names):
        if not name:
            raise ConfigError(0, "name", f"arm #{i + 1} has no name")
    if len(set(names)) != len(names):
        dup = sorted({x for x in names if names.count(x) > 1})
        raise ConfigError(0, "name", f"duplicate arm names: {dup}")
    for arm in cfg.arms:
        if (arm.kind is None) == (arm.baseline is None):
            raise ConfigError(
                0, arm.name, "each arm needs exactly one of kind= or baseline="
            )
