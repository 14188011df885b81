"""Experiment configuration: a flat JSON file and/or command-line flags.

Flags override file values.  Unknown keys are rejected in both places, and
the seed must always be given explicitly.
"""
from __future__ import annotations

import argparse
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .groups import GroupError, parse_group

BUDGET_KEYS = ("d", "s", "t", "q_c", "q_f", "q_g", "r", "q")
CORE_KEYS = ("experiment", "group", "trials", "seed", "output", "format")
SEED_BITS = 64


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int
    group: Optional[str] = None
    trials: Optional[int] = None
    budgets: dict[str, int] = field(default_factory=dict)
    output: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        validate(self)

    def get(self, key: str, default: Optional[int] = None) -> Optional[int]:
        return self.budgets.get(key, default)


def validate(cfg: ExperimentConfig) -> None:
    if not cfg.experiment:
        raise ConfigError("experiment name is required")
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or not 0 <= cfg.seed < 2**SEED_BITS:
        raise ConfigError(f"seed must be an integer in [0, 2^{SEED_BITS})")
    if cfg.trials is not None and (not isinstance(cfg.trials, int) or cfg.trials < 1):
        raise ConfigError("trials must be an integer >= 1")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    for k, v in cfg.budgets.items():
        if k not in BUDGET_KEYS:
            raise ConfigError(f"unknown budget key {k!r}")
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ConfigError(f"budget {k} must be a nonnegative integer, got {v!r}")
    if cfg.group is not None:
        try:
            parse_group(cfg.group)
        except GroupError as e:
            raise ConfigError(f"bad group spec {cfg.group!r}: {e}") from e


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def flag_parser(prog: str = "grouplab run") -> argparse.ArgumentParser:
    p = _Parser(prog=prog, add_help=False)
    p.add_argument("--config", help="flat JSON file with default values")
    p.add_argument("--experiment")
    p.add_argument("--group")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--output")
    p.add_argument("--format", choices=("csv", "json"))
    for k in BUDGET_KEYS:
        p.add_argument(f"--{k}", type=int, dest=k)
        if "_" in k:
            p.add_argument(f"--{k.replace('_', '-')}", type=int, dest=k, help=argparse.SUPPRESS)
    return p


def _load_file(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a flat JSON object")
    for k, v in data.items():
        if k not in CORE_KEYS and k not in BUDGET_KEYS:
            raise ConfigError(f"{path}: unknown key {k!r}")
        if isinstance(v, (dict, list)):
            raise ConfigError(f"{path}: key {k!r} must hold a scalar")
    return data


def parse_config(args: Sequence[str] = (), text: Optional[str] = None) -> ExperimentConfig:
    """Build a config from flags, an optional ``--config`` file, and/or JSON ``text``.

    Precedence: flags, then the file, then ``text``.
    """
    ns = flag_parser().parse_args(list(args))
    merged: dict = {}
    if text is not None:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
        if not isinstance(data, dict):
            raise ConfigError("expected a flat JSON object")
        unknown = [k for k in data if k not in CORE_KEYS and k not in BUDGET_KEYS]
        if unknown:
            raise ConfigError(f"unknown key(s) {unknown}")
        merged.update(data)
    if ns.config:
        merged.update(_load_file(ns.config))
    for k, v in vars(ns).items():
        if k != "config" and v is not None:
            merged[k] = v
    if "experiment" not in merged:
        raise ConfigError("--experiment is required")
    if "seed" not in merged:
        raise ConfigError("--seed is required (there is no default seed)")
    budgets = {k: merged[k] for k in BUDGET_KEYS if k in merged}
    return ExperimentConfig(
        experiment=merged["experiment"],
        seed=merged["seed"],
        group=merged.get("group"),
        trials=merged.get("trials"),
        budgets=budgets,
        output=merged.get("output"),
        format=merged.get("format", "csv"),
    )
