"""Command line entry point: ``risfair run`` and ``risfair selftest``.

Exit codes: 0 success, 1 invalid input, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import config, harness, selftest

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_INVALID)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="risfair", description="RIS-aided fair-rate downlink simulator")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", help="run a Monte Carlo sweep")
    run.add_argument("--config", required=True, help="key=value configuration file")
    run.add_argument("--sweep", choices=["pmax", "n", "d"])
    run.add_argument("--values", help="comma separated sweep values")
    run.add_argument("--trials", type=int)
    run.add_argument("--xi", help="rate ratios such as 1:2:3:4")
    run.add_argument("--seed", type=int)
    run.add_argument("--out", default="risfair", help="output prefix")
    run.add_argument("--workers", type=int, help="worker processes (capped by RISFAIR_THREADS)")
    run.add_argument("-v", "--verbose", action="store_true")
    sub.add_parser("selftest", help="run built-in invariant and oracle checks")
    return p


def _overrides(args) -> dict[str, str]:
    flags = {
        "experiment.sweep": args.sweep,
        "experiment.values": args.values,
        "experiment.trials": None if args.trials is None else str(args.trials),
        "experiment.xi": args.xi,
        "experiment.seed": None if args.seed is None else str(args.seed),
        "experiment.workers": None if args.workers is None else str(args.workers),
    }
    return {k: v for k, v in flags.items() if v is not None}


def output_paths(prefix: str) -> tuple[Path, Path, Path]:
    base = Path(prefix)
    return (
        base.with_name(base.name + "_records.csv"),
        base.with_name(base.name + "_summary.csv"),
        base.with_name(base.name + "_summary.gp"),
    )


def cmd_run(args) -> int:
    try:
        values = config.load(args.config)
        values.update(_overrides(args))
        spec = config.build_spec(values)
    except (harness.ConfigError, ValueError) as exc:
        print(f"risfair: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"risfair: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INVALID

    records_csv, summary_csv, gp = output_paths(args.out)
    try:
        records = harness.run_experiment(spec)
        harness.write_records_csv(records, records_csv, spec.K)
        harness.write_summary_csv(harness.summarize(records), summary_csv)
        harness.write_gnuplot(summary_csv, spec.sweep_variable, spec.methods, gp)
    except Exception as exc:
        print(f"risfair: run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {records_csv}, {summary_csv}, {gp}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "selftest":
        return EXIT_OK if selftest.run() else EXIT_RUNTIME
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
