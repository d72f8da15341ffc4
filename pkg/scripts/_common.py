"""Shared plumbing for the sweep scripts."""

from __future__ import annotations

import argparse
import time
from pathlib import Path

from risfair import harness
from risfair.harness import ExperimentSpec


def parse_args(description: str) -> argparse.Namespace:
    ap = argparse.ArgumentParser(description=description)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--outdir", default="results")
    return ap.parse_args()


def run_and_report(spec: ExperimentSpec, name: str, outdir: str, workers=None) -> list[harness.SummaryRow]:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    records = harness.run_experiment(spec, workers)
    rows = harness.summarize(records)
    harness.write_records_csv(records, out / f"{name}_records.csv", spec.K)
    summary = harness.write_summary_csv(rows, out / f"{name}_summary.csv")
    harness.write_gnuplot(summary, spec.sweep_variable, spec.methods)
    print(f"{name}: {len(records)} records in {time.perf_counter() - t0:.1f}s")
    print(f"{'method':<14}{'value':>8}{'mean SE':>12}{'95% CI':>26}")
    for r in rows:
        print(f"{r.method:<14}{r.sweep_value:>8g}{r.mean_se:>12.4f}   [{r.ci95_lo:.4f}, {r.ci95_hi:.4f}]")
    return rows
