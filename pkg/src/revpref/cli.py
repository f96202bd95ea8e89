"""Command-line entry point.

Exit status is 0 when every bound check passes, 2 when a check fails and 1
on a parse or runtime error.
"""

from __future__ import annotations

import argparse
import sys

from . import bench
from .config import ConfigError, load_experiment
from .errors import RevprefError

EXIT_OK, EXIT_ERROR, EXIT_BOUND = 0, 1, 2

_ACCEPTS = {
    "offline": ("offline", "sweep"),
    "online": ("online",),
    "profit": ("profit",),
    "revenue": ("revenue",),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="revpref", description="Run pricing experiments against a simulated market.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*_ACCEPTS, "suite"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=name != "suite", help="experiment config file")
        sp.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
        sp.add_argument("--out", default=None, help=f"output directory (else ${bench.OUT_ENV}, else ./results)")
        sp.add_argument("--check-bounds", action="store_true", help="print each summary row with its bound and slack")
    return parser


def _report(record, verbose, stream):
    status = "PASS" if record.passed else "FAIL"
    print(f"{status} {record.experiment_id} ({record.kind}, {record.wall_clock:.2f}s)", file=stream)
    if verbose:
        print("  " + ",".join(record.summary_columns), file=stream)
        for row in record.summary:
            print("  " + ",".join(bench._cell(x) for x in row), file=stream)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = bench.default_out_dir(args.out)
    try:
        if args.command == "suite":
            configs = bench.make_benchmark_suite(0 if args.seed is None else args.seed)
        else:
            with open(args.config) as fh:
                cfg = load_experiment(fh.read(), seed=args.seed)
            if cfg.kind not in _ACCEPTS[args.command]:
                raise ConfigError(f"[experiment] kind: {cfg.kind!r} cannot run under '{args.command}'")
            configs = [cfg]
        passed = True
        for cfg in configs:
            record = bench.run_experiment(cfg, out_dir)
            _report(record, args.check_bounds, sys.stdout)
            passed = passed and record.passed
    except (OSError, RevprefError, FloatingPointError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK if passed else EXIT_BOUND


if __name__ == "__main__":
    sys.exit(main())
