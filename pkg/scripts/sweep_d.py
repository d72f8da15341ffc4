"""Average sum SE versus RIS horizontal position at 0 dBm."""

from _common import parse_args, run_and_report

from risfair.harness import ExperimentSpec

if __name__ == "__main__":
    args = parse_args(__doc__)
    spec = ExperimentSpec(sweep_variable="d", sweep_values=[20, 60, 100, 140, 180],
                          trials=args.trials, base_seed=args.seed, pmax_dbm=0.0)
    run_and_report(spec, "ris_distance", args.outdir, args.workers)
