"""Quick built-in invariant and oracle checks, run by ``risfair selftest``."""

from __future__ import annotations

import time
from collections.abc import Callable

import numpy as np

from . import linalg, phaseopt, poweropt, zf
from .channel import ChannelSet, Geometry, PathLossParams, noise_power, place_users, sample_channels
from .solver import solve


def _crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def check_penrose(rng) -> str:
    worst = 0.0
    for i in range(50):
        m, n = rng.integers(1, 7, size=2)
        a = _crandn(rng, m, n)
        if i % 5 == 0 and min(m, n) > 1:
            a = _crandn(rng, m, 1) @ _crandn(rng, 1, n)
        x = linalg.pinv(a)
        scale = max(np.linalg.norm(a), 1e-300)
        worst = max(
            worst,
            np.linalg.norm(a @ x @ a - a) / scale,
            np.linalg.norm(x @ a @ x - x) / max(np.linalg.norm(x), 1e-300),
            np.linalg.norm((a @ x).conj().T - a @ x),
            np.linalg.norm((x @ a).conj().T - x @ a),
        )
    if worst > 1e-9:
        raise AssertionError(f"Penrose residual {worst:.2e}")
    return f"max residual {worst:.1e}"


def check_surrogate_reflect_only(rng) -> str:
    worst = 0.0
    for _ in range(20):
        k = rng.integers(1, 5)
        ch = ChannelSet(_crandn(rng, k, k), np.zeros((k, k)), _crandn(rng, k, k))
        p = rng.uniform(0.5, 2.0, k)
        ps = zf.PhaseShift.from_angles(rng.uniform(0, 2 * np.pi, k), 0.8)
        sq = phaseopt.build_surrogate(ch, p)
        f = phaseopt.direct_power_objective(ch, ps, p)
        s = phaseopt.surrogate_objective(sq, ps)
        worst = max(worst, abs(s - f) / f)
    if worst > 1e-9:
        raise AssertionError(f"surrogate mismatch {worst:.2e}")
    return f"max relative gap {worst:.1e}"


def check_bisection(rng) -> str:
    sigma2 = noise_power(180e3, -174.0)
    for _ in range(20):
        W = linalg.pinv(_crandn(rng, 3, 4)) * 1e3
        xi = poweropt.FairnessSpec(rng.uniform(1, 4, 3))
        sol = poweropt.max_t_bisection(W, xi, sigma2, 1e-2)
        ratio = sol.consumed_power / 1e-2
        if not 1 - 1e-6 <= ratio <= 1 + 1e-9:
            raise AssertionError(f"budget ratio {ratio}")
        q = sol.rates / xi.xi
        if np.ptp(q) > 1e-9 * q.mean():
            raise AssertionError("rates not proportional")
    return "budget active, rates proportional"


def check_monotone_trace(rng) -> str:
    pl = PathLossParams()
    sigma2 = noise_power(180e3, -174.0)
    for seed in range(5):
        geom = Geometry(place_users(seed, 4), D=100.0)
        ch = sample_channels(seed, geom, pl, 4, 10)
        res = solve(ch, poweropt.FairnessSpec([1, 1, 1, 1]), 1e-3, 0.8, sigma2)
        ts = [e.t for e in res.trace]
        if any(b < a for a, b in zip(ts, ts[1:])):
            raise AssertionError(f"trace decreased for seed {seed}: {ts}")
    return "t trace non-decreasing"


CHECKS: list[tuple[str, Callable]] = [
    ("pseudo-inverse Penrose conditions", check_penrose),
    ("surrogate exact without direct link", check_surrogate_reflect_only),
    ("bisection budget and proportionality", check_bisection),
    ("alternation monotone", check_monotone_trace),
]


def run(out=print) -> bool:
    rng = np.random.default_rng(12345)
    ok = True
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            detail = fn(rng)
            out(f"PASS  {name}: {detail} ({time.perf_counter() - t0:.2f}s)")
        except Exception as exc:  # report every check, keep going
            ok = False
            out(f"FAIL  {name}: {exc}")
    return ok
