"""Command-line entry point: ``grouplab list | run | table``."""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .config import ConfigError, parse_config
from .experiments import REGISTRY, run_experiment
from .results import emit, load, render_table


def cmd_list() -> int:
    width = max(len(n) for n in REGISTRY)
    for name, exp in REGISTRY.items():
        defaults = [f"--group {exp.group}", f"--trials {exp.trials}"] + [f"--{k} {v}" for k, v in exp.budgets.items()]
        print(f"{name.ljust(width)}  {exp.summary}  [{' '.join(defaults)}]")
    return 0


def cmd_run(args: Sequence[str]) -> int:
    cfg = parse_config(args)
    rows = run_experiment(cfg)
    text = emit(rows, cfg.format, cfg.output)
    if cfg.output is None:
        sys.stdout.write(text)
    return 1 if any(r.verdict == "FAIL" for r in rows) else 0


def cmd_table(paths: Sequence[str], output: Optional[str]) -> int:
    rows = [row for p in paths for row in load(p)]
    text = render_table(rows)
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 1 if any(r.verdict == "FAIL" for r in rows) else 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = argparse.ArgumentParser(prog="grouplab", description="Group cipher experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list experiments and their smoke-test defaults")
    sub.add_parser("run", help="run one experiment (see `grouplab run --help`)", add_help=False)
    tp = sub.add_parser("table", help="merge result files into one comparison table")
    tp.add_argument("files", nargs="+")
    tp.add_argument("--output")

    if argv and argv[0] == "run":
        if "--help" in argv[1:] or "-h" in argv[1:]:
            print("usage: grouplab run --experiment NAME --seed N [--group SPEC] [--trials N] "
                  "[--config FILE] [--output PATH] [--format csv|json] "
                  "[--d N] [--s N] [--t N] [--q_c N] [--q_f N] [--q_g N] [--r N] [--q N]")
            return 0
        try:
            return cmd_run(argv[1:])
        except ConfigError as e:
            print(f"grouplab run: error: {e}", file=sys.stderr)
            return 2
    ns = parser.parse_args(argv)
    if ns.command == "list":
        return cmd_list()
    try:
        return cmd_table(ns.files, ns.output)
    except (OSError, ValueError) as e:
        print(f"grouplab table: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
