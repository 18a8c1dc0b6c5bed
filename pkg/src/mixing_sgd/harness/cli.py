"""Command-line interface.

    mixing-sgd bias-sweep    --config cfg.txt --out bias.csv
    mixing-sgd compare       --config cfg.txt --out curves.csv
    mixing-sgd mixing-check  --config cfg.txt --out phi.csv
    mixing-sgd bounds-report --config cfg.txt --out bounds.json

Global flags: --seed overrides the config base_seed, --threads the worker
count, --verbose prints progress to stderr.  Exit codes: 0 success, 2
configuration error, 3 numerical failure (NaN/Inf).
"""

from __future__ import annotations

import argparse
import sys

from ..errors import ConfigError, NumericalError
from .config import parse_config_file
from .runner import cmd_bias_sweep, cmd_bounds_report, cmd_compare, cmd_mixing_check

_COMMANDS = {
    "bias-sweep": cmd_bias_sweep,
    "compare": cmd_compare,
    "mixing-check": cmd_mixing_check,
    "bounds-report": cmd_bounds_report,
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment config file")
    common.add_argument("--out", required=True, help="output CSV/JSON path")
    common.add_argument("--seed", type=int, default=None,
                        help="override the config base_seed")
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes for trial fan-out")
    common.add_argument("--verbose", action="store_true",
                        help="progress output on stderr")
    parser = argparse.ArgumentParser(
        prog="mixing-sgd",
        description="SGD over dependent data: bias sweeps, scheme comparisons, "
                    "mixing checks and bound reports")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("bias-sweep", parents=[common],
                   help="dependence-induced bias over a (rate, tau, B) grid")
    sub.add_parser("compare", parents=[common],
                   help="loss-vs-samples curves for the configured runs")
    sub.add_parser("mixing-check", parents=[common],
                   help="mixing coefficients of the stream and its subsampled twin")
    sub.add_parser("bounds-report", parents=[common],
                   help="evaluate every theoretical bound at the configured constants")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = parse_config_file(args.config)
        if args.seed is not None:
            cfg.base_seed = int(args.seed)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be >= 1")
            cfg.threads = int(args.threads)
        if args.verbose:
            print(f"config ok: base_seed={cfg.base_seed} threads={cfg.threads}",
                  file=sys.stderr)
        out_text = _COMMANDS[args.command](cfg, verbose=args.verbose)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(out_text)
        if args.verbose:
            print(f"wrote {args.out}", file=sys.stderr)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
