"""Average sum SE versus number of RIS elements at 0 dBm."""

from _common import parse_args, run_and_report

from risfair.harness import ExperimentSpec

if __name__ == "__main__":
    args = parse_args(__doc__)
    spec = ExperimentSpec(sweep_variable="n", sweep_values=[10, 20, 30, 40],
                          trials=args.trials, base_seed=args.seed, pmax_dbm=0.0)
    run_and_report(spec, "n_elements", args.outdir, args.workers)
