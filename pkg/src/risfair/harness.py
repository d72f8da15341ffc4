"""Monte Carlo sweeps over P_max, N or D with paired method comparisons.

Every (sweep value, trial) pair draws one realization from seed
``base_seed + trial`` and evaluates every requested method on it. Records
come back in deterministic (sweep value, trial, method) order regardless of
how many workers ran them.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import solver as solver_mod
from .channel import Geometry, PathLossParams, dbm_to_watts, noise_power, place_users, sample_channels
from .phaseopt import PhaseConfig
from .poweropt import FairnessSpec, PowerConfig
from .solver import SolverConfig

SWEEP_VARIABLES = ("pmax_dbm", "n_elements", "ris_distance_m")
SWEEP_ALIASES = {"pmax": "pmax_dbm", "n": "n_elements", "d": "ris_distance_m"}
METHODS = ("proposed", "random_phase", "non_ris")
MAX_RESAMPLES = 20


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


@dataclass
class ExperimentSpec:
    sweep_variable: str = "pmax_dbm"
    sweep_values: list[float] = field(default_factory=lambda: [-10.0, 0.0, 10.0])
    trials: int = 100
    base_seed: int = 0
    M: int = 4
    K: int = 4
    N: int = 10
    D: float = 100.0
    pmax_dbm: float = 0.0
    eta: float = 0.8
    xi_ratios: list[float] = field(default_factory=lambda: [1.0, 1.0, 1.0, 1.0])
    bandwidth_hz: float = 180e3
    psd_dbm_per_hz: float = -174.0
    user_center: tuple[float, float] = (200.0, 0.0)
    user_radius: float = 10.0
    freeze_users: bool = False
    pathloss: PathLossParams = field(default_factory=PathLossParams)
    methods: list[str] = field(default_factory=lambda: list(METHODS))
    solver: SolverConfig = field(default_factory=SolverConfig)
    workers: int = 1

    def validate(self) -> "ExperimentSpec":
        self.sweep_variable = SWEEP_ALIASES.get(self.sweep_variable, self.sweep_variable)
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError(f"experiment.sweep: unknown sweep variable {self.sweep_variable!r}")
        if not self.sweep_values:
            raise ConfigError("experiment.values: must be nonempty")
        if self.trials < 1:
            raise ConfigError("experiment.trials: must be >= 1")
        if len(self.xi_ratios) != self.K:
            raise ConfigError(f"experiment.xi: has {len(self.xi_ratios)} entries but channel.K={self.K}")
        if any(x <= 0 for x in self.xi_ratios):
            raise ConfigError("experiment.xi: entries must be positive")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ConfigError(f"experiment.methods: unknown or empty {bad}")
        if self.M < self.K:
            raise ConfigError("channel.M: need at least K antennas for ZF")
        if not 0 < self.eta <= 1:
            raise ConfigError("channel.eta: must lie in (0, 1]")
        if self.user_radius < 0:
            raise ConfigError("channel.user_radius: must be >= 0")
        if self.sweep_variable == "n_elements" and any(v < 1 or v != int(v) for v in self.sweep_values):
            raise ConfigError("experiment.values: N sweep needs positive integers")
        if self.sweep_variable == "ris_distance_m" and any(v <= 0 for v in self.sweep_values):
            raise ConfigError("experiment.values: D sweep needs positive distances")
        return self

    @property
    def sigma2(self) -> float:
        return noise_power(self.bandwidth_hz, self.psd_dbm_per_hz)

    def point(self, value: float) -> tuple[int, float, float]:
        """(N, D, P_max in watts) at one sweep value."""
        N, D, pdbm = self.N, self.D, self.pmax_dbm
        if self.sweep_variable == "pmax_dbm":
            pdbm = value
        elif self.sweep_variable == "n_elements":
            N = int(value)
        else:
            D = value
        return N, D, dbm_to_watts(pdbm)


@dataclass
class TrialRecord:
    trial_index: int
    seed: int
    method: str
    sweep_variable: str
    sweep_value: float
    sum_se: float
    per_user_rates: list[float]
    t: float
    outer_iters: int
    consumed_power: float
    surrogate_deviation: float
    outage: bool
    resamples: int = 0


def _record(spec, trial, seed, method, value, res, resamples) -> TrialRecord:
    if res.outage:
        rates = [float("nan")] * spec.K
        return TrialRecord(trial, seed, method, spec.sweep_variable, value, float("nan"), rates,
                           float("nan"), 0, float("nan"), float("nan"), True, resamples)
    return TrialRecord(
        trial_index=trial,
        seed=seed,
        method=method,
        sweep_variable=spec.sweep_variable,
        sweep_value=value,
        sum_se=res.sum_se,
        per_user_rates=[float(r) for r in res.per_user_rates],
        t=res.t,
        outer_iters=res.outer_iters,
        consumed_power=res.power.consumed_power,
        surrogate_deviation=res.surrogate_deviation,
        outage=False,
        resamples=resamples,
    )


def realization(spec: ExperimentSpec, value: float, trial: int, attempt: int = 0):
    """Channel draw for one (sweep value, trial); the same for every method."""
    seed = spec.base_seed + trial
    N, D, _ = spec.point(value)
    user_key = [spec.base_seed, 0] if spec.freeze_users else [seed, 0, attempt]
    users = place_users(np.random.SeedSequence(user_key), spec.K, spec.user_center, spec.user_radius)
    geom = Geometry(users, D=D)
    return sample_channels(np.random.SeedSequence([seed, 1, attempt]), geom, spec.pathloss, spec.M, N, spec.K)


def _evaluate(method, spec, channels, xi, P_max, trial, attempt):
    seed = spec.base_seed + trial
    sigma2 = spec.sigma2
    if method == "proposed":
        return solver_mod.solve(channels, xi, P_max, spec.eta, sigma2, spec.solver)
    if method == "random_phase":
        return solver_mod.baseline_random_phase(
            channels, xi, P_max, spec.eta, sigma2, np.random.SeedSequence([seed, 2, attempt]), spec.solver.power
        )
    return solver_mod.baseline_non_ris(channels, xi, P_max, sigma2, spec.solver.power)


def run_trial(spec: ExperimentSpec, value: float, trial: int) -> list[TrialRecord]:
    xi = FairnessSpec(spec.xi_ratios)
    _, _, P_max = spec.point(value)
    seed = spec.base_seed + trial
    for attempt in range(MAX_RESAMPLES + 1):
        channels = realization(spec, value, trial, attempt)
        results = {m: _evaluate(m, spec, channels, xi, P_max, trial, attempt) for m in spec.methods}
        if not any(r.outage for r in results.values()):
            break
    return [_record(spec, trial, seed, m, value, results[m], attempt) for m in spec.methods]


def _run_item(args):
    spec, value, trial = args
    return run_trial(spec, value, trial)


def worker_count(requested: int | None = None) -> int:
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("RISFAIR_THREADS")
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> list[TrialRecord]:
    spec.validate()
    items = [(spec, float(v), t) for v in spec.sweep_values for t in range(spec.trials)]
    n = worker_count(workers if workers is not None else spec.workers)
    if n == 1:
        chunks = [_run_item(it) for it in items]
    else:
        with ProcessPoolExecutor(max_workers=n) as pool:
            chunks = list(pool.map(_run_item, items, chunksize=max(1, len(items) // (4 * n))))
    return [r for chunk in chunks for r in chunk]


@dataclass
class SummaryRow:
    method: str
    sweep_value: float
    mean_se: float
    std_se: float
    ci95_lo: float
    ci95_hi: float
    mean_iters: float
    outage_rate: float
    count: int

    @property
    def empty(self) -> bool:
        return self.count == 0


def summarize(records: list[TrialRecord]) -> list[SummaryRow]:
    if not records:
        raise ValueError("no records to summarize")
    cells: dict[tuple[str, float], list[TrialRecord]] = {}
    for r in records:
        cells.setdefault((r.method, r.sweep_value), []).append(r)
    rows = []
    for (method, value), recs in cells.items():
        ok = [r for r in recs if not r.outage]
        outage_rate = 1.0 - len(ok) / len(recs)
        if not ok:
            nan = float("nan")
            rows.append(SummaryRow(method, value, nan, nan, nan, nan, nan, outage_rate, 0))
            continue
        se = np.array([r.sum_se for r in ok])
        mean = float(se.mean())
        std = float(se.std(ddof=1)) if se.size > 1 else 0.0
        half = 1.96 * std / math.sqrt(se.size)
        iters = float(np.mean([r.outer_iters for r in ok]))
        rows.append(SummaryRow(method, value, mean, std, mean - half, mean + half, iters, outage_rate, len(ok)))
    order = {m: i for i, m in enumerate(METHODS)}
    rows.sort(key=lambda r: (order.get(r.method, 99), r.sweep_value))
    return rows


def record_columns(K: int) -> list[str]:
    return (
        ["trial", "seed", "method", "sweep_var", "sweep_value", "sum_se_bpshz", "t"]
        + [f"rate_u{k}" for k in range(1, K + 1)]
        + ["consumed_power_w", "outer_iters", "surrogate_dev", "outage"]
    )


SUMMARY_COLUMNS = ["method", "sweep_value", "mean_se", "std_se", "ci95_lo", "ci95_hi", "mean_iters", "outage_rate"]


def _fmt(x) -> str:
    return repr(float(x))


def write_records_csv(records: list[TrialRecord], path, K: int | None = None) -> Path:
    path = Path(path)
    if K is None:
        K = max((len(r.per_user_rates) for r in records), default=0)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(record_columns(K))
            for r in records:
                w.writerow(
                    [r.trial_index, r.seed, r.method, r.sweep_variable, _fmt(r.sweep_value), _fmt(r.sum_se), _fmt(r.t)]
                    + [_fmt(x) for x in r.per_user_rates]
                    + [_fmt(r.consumed_power), r.outer_iters, _fmt(r.surrogate_deviation), int(r.outage)]
                )
    except OSError as exc:
        raise OSError(f"cannot write records CSV {path}: {exc}") from exc
    return path


def read_records_csv(path) -> list[TrialRecord]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    out = []
    for row in rows:
        rate_keys = sorted((k for k in row if k.startswith("rate_u")), key=lambda k: int(k[6:]))
        out.append(
            TrialRecord(
                trial_index=int(row["trial"]),
                seed=int(row["seed"]),
                method=row["method"],
                sweep_variable=row["sweep_var"],
                sweep_value=float(row["sweep_value"]),
                sum_se=float(row["sum_se_bpshz"]),
                per_user_rates=[float(row[k]) for k in rate_keys],
                t=float(row["t"]),
                outer_iters=int(row["outer_iters"]),
                consumed_power=float(row["consumed_power_w"]),
                surrogate_deviation=float(row["surrogate_dev"]),
                outage=bool(int(row["outage"])),
            )
        )
    return out


def write_summary_csv(rows: list[SummaryRow], path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SUMMARY_COLUMNS)
            for r in rows:
                w.writerow([r.method, _fmt(r.sweep_value), _fmt(r.mean_se), _fmt(r.std_se), _fmt(r.ci95_lo),
                            _fmt(r.ci95_hi), _fmt(r.mean_iters), _fmt(r.outage_rate)])
    except OSError as exc:
        raise OSError(f"cannot write summary CSV {path}: {exc}") from exc
    return path


_XLABELS = {"pmax_dbm": "P_max (dBm)", "n_elements": "N (RIS elements)", "ris_distance_m": "D (m)"}


def write_gnuplot(summary_csv, sweep_variable: str, methods, path=None) -> Path:
    """Self-contained gnuplot script plotting mean SE with 95% CI bars."""
    summary_csv = Path(summary_csv)
    path = Path(path) if path else summary_csv.with_suffix(".gp")
    png = summary_csv.with_suffix(".png").name
    plots = ", \\\n     ".join(
        f"'{summary_csv.name}' using 2:(strcol(1) eq '{m}' ? $3 : 1/0):5:6 with yerrorlines title '{m}'"
        for m in methods
    )
    text = (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set terminal pngcairo size 800,600\n"
        f"set output '{png}'\n"
        f"set xlabel '{_XLABELS.get(sweep_variable, sweep_variable)}'\n"
        "set ylabel 'average SE (bit/s/Hz)'\n"
        "set grid\n"
        f"plot {plots}\n"
    )
    path.write_text(text, encoding="utf-8")
    return path


def with_overrides(spec: ExperimentSpec, **kw) -> ExperimentSpec:
    return replace(spec, **kw)


def default_solver_config() -> SolverConfig:
    return SolverConfig(phase=PhaseConfig(), power=PowerConfig())
