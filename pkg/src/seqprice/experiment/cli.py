"""Command-line interface.

    seqprice solve    --config CFG [--out DIR]              exact oracles only
    seqprice train    --config CFG [--out DIR] [--seed N] [--parallel-arms]
    seqprice evaluate --config CFG --out DIR [--seed N]     rerun saved policies
    seqprice compare  DIR [DIR ...] [--out DIR]             merge + flag ordering

Exit codes: 0 success, 2 validation/config error, 3 budget or size error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from seqprice.errors import InputError, SizeBudgetError, UnsupportedSettingError
from seqprice.experiment.config import parse_config
from seqprice.experiment.report import (
    compare,
    render_compare_figure,
    write_compare_csv,
)
from seqprice.experiment.runner import (
    evaluate_experiment,
    run_experiment,
    solve_experiment,
)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="seqprice",
        description="sequential price mechanisms: oracles, training, reports",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    for verb in ("solve", "train", "evaluate"):
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True, help="experiment config path")
        p.add_argument("--out", default=None, help="artifact directory")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        if verb == "train":
            p.add_argument(
                "--parallel-arms", action="store_true",
                help="run arms in parallel processes",
            )

    p = sub.add_parser("compare")
    p.add_argument("dirs", nargs="+", help="artifact directories to merge")
    p.add_argument("--out", default=None, help="where to write the merged table")
    return parser


def _load(args) -> object:
    cfg = parse_config(Path(args.config))
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.verb == "solve":
            out = solve_experiment(_load(args), args.out)
            print(out / "solution.csv")
        elif args.verb == "train":
            out = run_experiment(
                _load(args), args.out, parallel_arms=args.parallel_arms
            )
            print(out / "summary.csv")
        elif args.verb == "evaluate":
            if args.out is None:
                raise InputError("evaluate needs --out pointing at a trained run")
            out = evaluate_experiment(_load(args), args.out, seed=args.seed)
            print(out / "evaluation.csv")
        else:  # compare
            table = compare(args.dirs)
            out = Path(args.out or args.dirs[0])
            out.mkdir(parents=True, exist_ok=True)
            write_compare_csv(out / "compare.csv", table)
            render_compare_figure(out, table)
            for violation in table.violations:
                print(f"ordering violation: {violation}", file=sys.stderr)
            print(out / "compare.csv")
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (SizeBudgetError, UnsupportedSettingError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
