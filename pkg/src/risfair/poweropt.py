"""Power allocation for a fixed phase configuration under ZF.

With interference nulled, user ``k`` needs ``p_k(t) = sigma2 * (2**(t*xi_k) - 1)``
to reach rate ``t * xi_k``, so the subproblem reduces to the largest ``t``
whose power profile fits in the budget. ``max_t_bisection`` solves that
directly; ``lagrangian_power_route`` runs the closed-form KKT powers with
dual (mu) updates and is kept as an independent cross-check.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import zf

log = logging.getLogger(__name__)

LN2 = np.log(2.0)


@dataclass(frozen=True)
class FairnessSpec:
    """Proportional rate coefficients, stored normalized so ``min(xi) == 1``."""

    xi: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float).reshape(-1)
        if xi.size == 0 or np.any(~np.isfinite(xi)) or np.any(xi <= 0):
            raise ValueError(f"proportional coefficients must be positive, got {xi}")
        object.__setattr__(self, "xi", xi / xi.min())

    @classmethod
    def parse(cls, text: str) -> "FairnessSpec":
        """Parse ``"1:2:3:4"``."""
        return cls([float(v) for v in text.split(":")])

    @property
    def K(self) -> int:
        return self.xi.size


@dataclass
class PowerSolution:
    t: float
    p: np.ndarray
    consumed_power: float
    rates: np.ndarray
    mu: np.ndarray = field(default_factory=lambda: np.zeros(0))
    converged: bool = True
    iterations: int = 0

    @property
    def sum_se(self) -> float:
        return float(np.sum(self.rates))


@dataclass
class PowerConfig:
    bisect_tol: float = 1e-9
    lagrangian_enabled: bool = False
    max_iters: int = 5000
    step0: float = 1.0
    tol: float = 1e-7


def _xi_array(xi) -> np.ndarray:
    return xi.xi if isinstance(xi, FairnessSpec) else np.asarray(xi, dtype=float)


def power_profile(t: float, xi, sigma2: float) -> np.ndarray:
    if t < 0:
        raise ValueError("rate multiplier t must be >= 0")
    return sigma2 * np.expm1(t * _xi_array(xi) * LN2)


def rates_from_power(p, sigma2: float) -> np.ndarray:
    return np.log1p(np.asarray(p, dtype=float) / sigma2) / LN2


def consumed_power_at(t: float, xi, sigma2: float, W) -> float:
    return zf.transmit_power(W, power_profile(t, xi, sigma2))


def _solution(t: float, xi, sigma2: float, W, **extra) -> PowerSolution:
    p = power_profile(t, xi, sigma2)
    return PowerSolution(
        t=t,
        p=p,
        consumed_power=zf.transmit_power(W, p),
        rates=t * _xi_array(xi),
        **extra,
    )


def max_t_bisection(W, xi, sigma2: float, P_max: float, tol: float = 1e-9, t_lo: float = 0.0) -> PowerSolution:
    """Largest t with ``consumed_power_at(t) <= P_max``.

    ``t_lo`` is an optional known-feasible lower bracket; the result never
    falls below it. Bisection stops once the bracket is within ``tol``
    relative to its upper end.
    """
    if P_max <= 0:
        raise ValueError("P_max must be > 0")
    xi_a = _xi_array(xi)
    norms = zf.column_norms_sq(W)

    def fits(t):
        return float(np.sum(norms * sigma2 * np.expm1(t * xi_a * LN2))) <= P_max

    lo = t_lo if t_lo > 0 and fits(t_lo) else 0.0
    hi = max(1.0, 2.0 * lo)
    while fits(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e6:
            raise RuntimeError("rate multiplier bracket diverged; check precoder norms")
    for _ in range(400):
        if hi - lo <= tol * hi:
            break
        mid = 0.5 * (lo + hi)
        if fits(mid):
            lo = mid
        else:
            hi = mid
    return _solution(lo, xi_a, sigma2, W)


def stationary_powers(t: float, mu, B, xi, sigma2: float) -> np.ndarray:
    """Closed-form stationary powers for given duals ``mu`` and multiplier ``t``.

    ``B`` is the K^2 x K^2 matrix of ``zf.b_matrix``. Cross terms enter through
    the square-root ratios of the t-profile. Negative values are clipped to 0.
    """
    xi_a = _xi_array(xi)
    mu = np.asarray(mu, dtype=float)
    K = xi_a.size
    idx = np.arange(K) * (K + 1)
    b = np.real(B[np.ix_(idx, idx)])  # b[k, j] = b_{l(k), l(j)}
    r = np.expm1(max(t, 1e-300) * xi_a * LN2)
    ratio = np.sqrt(r[None, :] / r[:, None])  # ratio[k, j] = sqrt(r_j / r_k)
    p = np.empty(K)
    numer1 = 1.0 - np.sum(mu[1:] * xi_a[1:] / xi_a[0])
    p[0] = numer1 / (LN2 * mu[0] * np.sum(b[0, :] * ratio[0, :])) - sigma2
    for k in range(1, K):
        upper = np.sum(b[k, k + 1 :] * ratio[k, k + 1 :])
        lower = np.sum(b[:k, k] * ratio[k, :k])
        p[k] = (1.0 + mu[k]) / (LN2 * (mu[0] * b[k, k] + mu[0] * (upper + lower))) - sigma2
    return np.maximum(p, 0.0)


def _t_for_mu1(mu1: float, bdiag: np.ndarray, xi: np.ndarray) -> float:
    """t at which the closed-form powers are exactly proportional, given mu_1.

    Solves ``ln2 * mu1 * sum_k (xi_k/xi_1) b_kk 2**(t xi_k) = sum_k xi_k/xi_1``
    (normalized units, sigma2 = 1); the left side is increasing in t.
    """
    w = xi / xi[0]
    target = np.sum(w)

    def f(t):
        return np.log(LN2 * mu1 * np.sum(w * bdiag * np.exp(LN2 * t * xi))) - np.log(target)

    if f(0.0) >= 0:
        return 0.0
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    return float(brentq(f, 0.0, hi, xtol=1e-14, rtol=1e-14))


def lagrangian_power_route(W, xi, sigma2: float, P_max: float, cfg: PowerConfig | None = None) -> PowerSolution:
    """Dual route: closed-form stationary powers with dual updates.

    Work is done in normalized units (powers over sigma2, budget 1). For a
    given ``mu_1`` the ratio multipliers ``mu_k`` (k >= 2) are set to the
    smallest values that make ``R_k = (xi_k/xi_1) R_1``, which fixes ``t``;
    ``mu_1`` then takes multiplicative subgradient steps on the budget
    residual. The ``mu_k`` price equality constraints and may come out
    negative. Each iterate is reduced to the proportional profile at
    ``t = min_k R_k / xi_k``; the best budget-feasible one is returned.
    Falls back to bisection when the duals do not settle.
    """
    cfg = cfg or PowerConfig()
    if P_max <= 0:
        raise ValueError("P_max must be > 0")
    xi_a = _xi_array(xi)
    K = xi_a.size
    norms = zf.column_norms_sq(W)
    B = zf.b_matrix(W) * (sigma2 / P_max)  # budget becomes sum_k b~_kk p~_k <= 1
    bdiag = norms * (sigma2 / P_max)

    mu = np.zeros(K)
    mu[0] = K / (LN2 * (1.0 + np.sum(bdiag)))  # equal-weight water-filling level
    best_t = 0.0
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        t = _t_for_mu1(mu[0], bdiag, xi_a)
        mu[1:] = LN2 * mu[0] * bdiag[1:] * np.exp(LN2 * t * xi_a[1:]) - 1.0
        p = stationary_powers(t, mu, B, xi_a, 1.0)
        rates = np.log1p(p) / LN2
        t_it = float(np.min(rates / xi_a))
        if np.sum(bdiag * np.expm1(t_it * xi_a * LN2)) <= 1.0 + 1e-9:
            best_t = max(best_t, t_it)
        g_budget = float(np.sum(bdiag * p)) - 1.0
        step = cfg.step0 / np.sqrt(1.0 + it / 50.0)
        mu_old = mu[0]
        mu[0] *= np.exp(np.clip(step * g_budget, -2.0, 2.0))
        if abs(mu[0] - mu_old) <= cfg.tol * mu_old and abs(g_budget) < 1e-6:
            converged = True
            break
    mu_out = mu * np.r_[1.0 / P_max, np.ones(K - 1)]
    if not converged or best_t <= 0:
        log.warning("lagrangian power route did not converge in %d iterations; using bisection", it)
        sol = max_t_bisection(W, xi_a, sigma2, P_max, cfg.bisect_tol)
        sol.converged = False
        sol.iterations = it
        sol.mu = mu_out
        return sol
    return _solution(best_t, xi_a, sigma2, W, mu=mu_out, converged=True, iterations=it)
