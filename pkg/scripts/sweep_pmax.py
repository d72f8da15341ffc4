"""Average sum SE versus BS power budget for equal and unequal rate ratios."""

from _common import parse_args, run_and_report

from risfair.harness import ExperimentSpec

if __name__ == "__main__":
    args = parse_args(__doc__)
    for tag, xi in (("equal", [1, 1, 1, 1]), ("weighted", [1, 2, 3, 4])):
        spec = ExperimentSpec(sweep_variable="pmax", sweep_values=[-10, -5, 0, 5, 10],
                              trials=args.trials, base_seed=args.seed, xi_ratios=xi)
        run_and_report(spec, f"pmax_{tag}", args.outdir, args.workers)
