"""Alternating phase/power optimization and the two baselines."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg, poweropt, zf
from .channel import ChannelSet
from .phaseopt import PhaseConfig, optimize_phase
from .poweropt import PowerConfig, PowerSolution
from .zf import PhaseShift

log = logging.getLogger(__name__)


@dataclass
class SolverConfig:
    max_outer_iters: int = 50
    outer_tol: float = 1e-6
    p_min_clamp: float = 1e-12  # relative to max(p)
    restarts: int = 1
    restart_seed: int = 0
    phase: PhaseConfig = field(default_factory=PhaseConfig)
    power: PowerConfig = field(default_factory=PowerConfig)

    def __post_init__(self):
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if self.outer_tol <= 0:
            raise ValueError("outer_tol must be > 0")
        if not 0 < self.p_min_clamp < 1:
            raise ValueError("p_min_clamp must lie in (0, 1)")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


@dataclass
class TraceEntry:
    t: float
    consumed_power: float
    surrogate_deviation: float


@dataclass
class SolveResult:
    phase: PhaseShift | None
    power: PowerSolution | None
    outer_iters: int = 0
    trace: list[TraceEntry] = field(default_factory=list)
    outage: bool = False
    lagrangian_gap: float = float("nan")

    @property
    def sum_se(self) -> float:
        return float("nan") if self.power is None else self.power.sum_se

    @property
    def per_user_rates(self) -> np.ndarray:
        return np.full(0, np.nan) if self.power is None else self.power.rates

    @property
    def t(self) -> float:
        return float("nan") if self.power is None else self.power.t

    @property
    def surrogate_deviation(self) -> float:
        devs = [e.surrogate_deviation for e in self.trace if np.isfinite(e.surrogate_deviation)]
        return float(np.mean(devs)) if devs else float("nan")


def _outage() -> SolveResult:
    return SolveResult(phase=None, power=None, outage=True)


def _cross_check(W, xi, sigma2, P_max, sol: PowerSolution, cfg: PowerConfig) -> float:
    if not cfg.lagrangian_enabled:
        return float("nan")
    alt = poweropt.lagrangian_power_route(W, xi, sigma2, P_max, cfg)
    return abs(alt.t - sol.t) / sol.t if sol.t > 0 else abs(alt.t)


def _phase_weights(power: PowerSolution, xi, clamp: float) -> np.ndarray:
    """Strictly positive powers for the phase step.

    The floor is relative so tiny absolute powers keep their ratios; at t = 0
    the profile's limiting direction ``p ~ xi`` is used instead.
    """
    top = float(np.max(power.p, initial=0.0))
    if not top > 0:
        return np.array(poweropt._xi_array(xi), dtype=float)
    return np.maximum(power.p, clamp * top)


def _alternate(channels, xi, P_max, sigma2, ps: PhaseShift, cfg: SolverConfig) -> SolveResult:
    W = zf.zf_precoder(channels, ps)
    power = poweropt.max_t_bisection(W, xi, sigma2, P_max, cfg.power.bisect_tol)
    trace = [TraceEntry(power.t, power.consumed_power, float("nan"))]
    it = 0
    for it in range(1, cfg.max_outer_iters + 1):
        p = _phase_weights(power, xi, cfg.p_min_clamp)
        step = optimize_phase(channels, p, ps, cfg.phase)
        if step.accepted:
            ps = step.phase
            W = zf.zf_precoder(channels, ps)
            t_prev = power.t
            power = poweropt.max_t_bisection(W, xi, sigma2, P_max, cfg.power.bisect_tol, t_lo=t_prev)
        trace.append(TraceEntry(power.t, power.consumed_power, step.surrogate_deviation))
        t_old = trace[-2].t
        if not step.accepted or abs(power.t - t_old) <= cfg.outer_tol * max(abs(t_old), 1e-300):
            break
    res = SolveResult(phase=ps, power=power, outer_iters=it, trace=trace)
    res.lagrangian_gap = _cross_check(W, xi, sigma2, P_max, power, cfg.power)
    return res


def solve(channels: ChannelSet, xi, P_max: float, eta: float, sigma2: float, cfg: SolverConfig | None = None) -> SolveResult:
    """Alternate phase and power updates until the rate multiplier settles.

    The first start uses ``phi = 1``; extra restarts (``cfg.restarts > 1``)
    draw random angles from ``cfg.restart_seed`` and the best run is kept.
    Rank-deficient effective channels yield an outage result.
    """
    cfg = cfg or SolverConfig()
    starts = [PhaseShift.unit(channels.N, eta)]
    if cfg.restarts > 1:
        rng = np.random.default_rng(cfg.restart_seed)
        starts += [PhaseShift.from_angles(rng.uniform(0, 2 * np.pi, channels.N), eta) for _ in range(cfg.restarts - 1)]
    best = None
    for ps in starts:
        try:
            res = _alternate(channels, xi, P_max, sigma2, ps, cfg)
        except (zf.ZFRankError, linalg.LinAlgFailure) as exc:
            log.debug("start skipped: %s", exc)
            continue
        if best is None or res.t > best.t:
            best = res
    return best if best is not None else _outage()


def _fixed(W, xi, P_max, sigma2, ps, cfg: PowerConfig | None) -> SolveResult:
    cfg = cfg or PowerConfig()
    power = poweropt.max_t_bisection(W, xi, sigma2, P_max, cfg.bisect_tol)
    res = SolveResult(phase=ps, power=power, outer_iters=0, trace=[TraceEntry(power.t, power.consumed_power, float("nan"))])
    res.lagrangian_gap = _cross_check(W, xi, sigma2, P_max, power, cfg)
    return res


def baseline_random_phase(channels, xi, P_max, eta, sigma2, seed, cfg: PowerConfig | None = None) -> SolveResult:
    rng = np.random.default_rng(seed)
    ps = PhaseShift.from_angles(rng.uniform(0.0, 2.0 * np.pi, channels.N), eta)
    try:
        W = zf.zf_precoder(channels, ps)
    except zf.ZFRankError:
        return _outage()
    return _fixed(W, xi, P_max, sigma2, ps, cfg)


def baseline_non_ris(channels, xi, P_max, sigma2, cfg: PowerConfig | None = None) -> SolveResult:
    try:
        W = zf.zf_from_effective(channels.h_direct.conj())
    except zf.ZFRankError:
        return _outage()
    return _fixed(W, xi, P_max, sigma2, None, cfg)
