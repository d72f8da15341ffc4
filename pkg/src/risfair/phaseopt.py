"""Phase-shift subproblem at fixed power.

For fixed powers ``P`` the best RIS configuration minimizes the ZF power
``F(Phi) = tr(X^+ P X^{+H})`` with ``X = H1^H + H2^H Phi G``; a lower ``F``
leaves budget room for a larger rate multiplier. The search works in the
variable ``y = diag(Phi^{-1})``:

1. ``build_surrogate`` assembles the quadratic ``y^H A y + 2 Re(b^H y) + c0``
   equal to ``|| G^+ (Z + Phi^{-1}) Hb2^+ ||_F^2`` with
   ``Hb_i = Q^{-1} H_i^H``, ``Z = G Hb1^+ Hb2`` and ``Q = sqrt(P)``.
2. A Lagrange-dual loop over ``lambda >= 0`` solves the stationarity system
   in closed form and maps each ``y`` back to feasible phases.
3. Every candidate is scored on the exact ``F``; a candidate is kept only if
   it strictly lowers ``F``. An optional refinement on ``F`` follows: a
   cyclic per-element grid search over unit-modulus angles, then L-BFGS-B
   over magnitudes in [0, 1] and angles.

The quadratic matches ``F`` exactly only when the direct link vanishes and
all factors are square and invertible; elsewhere it is a search heuristic,
which is why step 3 exists.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import minimize

from . import linalg, zf
from .channel import ChannelSet
from .zf import PhaseShift


@dataclass
class PhaseConfig:
    max_dual_iters: int = 200
    step0: float = 0.1
    y_min: float = 1e-8
    use_literal_lemma1: bool = False
    violation_tol: float = 1e-6
    objective_tol: float = 1e-9
    refine: bool = True
    refine_maxiter: int = 200
    coordinate_grid: int = 36
    coordinate_sweeps: int = 3


@dataclass
class SurrogateQuadratic:
    """Quadratic model of the ZF power in ``y = vec(Phi^{-1})``.

    ``A_red``/``z_red`` are the restrictions of ``A_full``/``z`` to the
    diagonal positions ``l(n)``. ``b_red = (A_full z)[l(n)]`` is the exact
    linear coefficient for a diagonal ``Phi^{-1}``; it reduces to
    ``A_red z_red`` when ``Z`` is diagonal.
    """

    kron_factor: np.ndarray  # (Hb2^{+T} kron G^+), (K*M) x N^2
    z: np.ndarray  # vec(Z), N^2
    A_red: np.ndarray
    z_red: np.ndarray
    b_red: np.ndarray
    constant_c0: float
    G_pinv: np.ndarray = field(repr=False)
    Hb2_pinv: np.ndarray = field(repr=False)
    Z: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.A_red.shape[0]

    @cached_property
    def A_full(self) -> np.ndarray:
        return self.kron_factor.conj().T @ self.kron_factor

    def value(self, y) -> float:
        y = np.asarray(y, dtype=np.complex128).reshape(-1)
        quad = np.real(np.vdot(y, self.A_red @ y))
        lin = 2.0 * np.real(np.vdot(self.b_red, y))
        return float(quad + lin + self.constant_c0)

    def frobenius_form(self, y) -> float:
        """``|| G^+ (Z + diag(y)) Hb2^+ ||_F^2``, the pre-vectorization form."""
        inner = self.Z + np.diag(np.asarray(y, dtype=np.complex128).reshape(-1))
        return linalg.fro_norm_sq(self.G_pinv @ inner @ self.Hb2_pinv)


@dataclass
class PhaseDualState:
    lam: np.ndarray
    step0: float = 0.1
    iteration: int = 0

    def __post_init__(self):
        self.lam = np.asarray(self.lam, dtype=float)
        if np.any(self.lam < 0):
            raise ValueError("dual variables must be nonnegative")

    @property
    def step_size(self) -> float:
        return self.step0 / np.sqrt(max(self.iteration, 1))


@dataclass
class PhaseStep:
    phase: PhaseShift
    accepted: bool
    objective_before: float
    objective_after: float
    surrogate_deviation: float
    dual_iters: int = 0
    surrogate_accepted: bool = False
    refined: bool = False
    ridge_used: bool = False


def build_surrogate(channels: ChannelSet, p, rel_tol: float = linalg.DEFAULT_PINV_RTOL) -> SurrogateQuadratic:
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("surrogate needs strictly positive powers; clamp p to p_min first")
    q_inv = 1.0 / np.sqrt(p)
    hb1 = q_inv[:, None] * channels.h_direct.conj()  # Q^{-1} H1^H, K x M
    hb2 = q_inv[:, None] * channels.h_reflect.conj()  # Q^{-1} H2^H, K x N
    G = channels.G
    N = channels.N
    g_p = linalg.pinv(G, rel_tol)  # M x N
    hb1_p = linalg.pinv(hb1, rel_tol)  # M x K
    hb2_p = linalg.pinv(hb2, rel_tol)  # N x K
    C = hb2_p.T  # K x N
    Z = G @ hb1_p @ hb2
    kf = np.kron(C, g_p)
    # diagonal restriction of (C kron G^+)^H (C kron G^+) is a Hadamard product
    A_red = (C.conj().T @ C) * (g_p.conj().T @ g_p)
    A_red = 0.5 * (A_red + A_red.conj().T)
    R = g_p @ Z @ hb2_p  # (C kron G^+) vec(Z), reshaped M x K
    b_red = np.sum(g_p.conj() * (R @ hb2_p.conj().T), axis=0)
    idx = np.arange(N) * (N + 1)
    z = linalg.vec(Z).reshape(-1)
    return SurrogateQuadratic(
        kron_factor=kf,
        z=z,
        A_red=A_red,
        z_red=z[idx],
        b_red=b_red,
        constant_c0=linalg.fro_norm_sq(R),
        G_pinv=g_p,
        Hb2_pinv=hb2_p,
        Z=Z,
    )


def direct_power_objective(channels: ChannelSet, ps: PhaseShift, p) -> float:
    """Exact ZF power ``tr(W P W^H)`` for ``W = X^+``; raises ZFRankError if infeasible."""
    p = np.asarray(p, dtype=float)
    if not np.any(p):
        return 0.0
    W = zf.zf_precoder(channels, ps)
    return zf.transmit_power(W, p)


def direct_power_gradient(channels: ChannelSet, ps: PhaseShift, p) -> tuple[float, np.ndarray]:
    """``F`` and ``c`` with ``dF = -2 sqrt(eta) Re(sum_n c_n dphi_n)``.

    Uses ``F = tr(P (X X^H)^{-1})`` for full-row-rank ``X``.
    """
    X = zf.effective_channel(channels, ps)
    S_inv = np.linalg.inv(X @ X.conj().T)
    p = np.asarray(p, dtype=float)
    F = float(np.real(np.sum(p * np.diag(S_inv))))
    T = X.conj().T @ (S_inv * p[None, :]) @ S_inv  # X^H S^-1 P S^-1, M x K
    c = np.sum(channels.G * (T @ channels.h_reflect.conj()).T, axis=1)
    return F, c


def surrogate_objective(sq: SurrogateQuadratic, ps: PhaseShift, y_min: float = 1e-8) -> float:
    mag = np.sqrt(ps.eta) * np.abs(ps.phi)
    if np.any(mag < y_min):
        raise ValueError("phase magnitude too small; Phi^{-1} is undefined")
    return sq.value(1.0 / (np.sqrt(ps.eta) * ps.phi))


def _normalized(sq: SurrogateQuadratic) -> tuple[np.ndarray, np.ndarray, float]:
    s = float(np.max(np.real(np.diag(sq.A_red))))
    if not s > 0:
        s = 1.0
    return sq.A_red / s, sq.b_red / s, s


def inner_solve(sq: SurrogateQuadratic, lam, ridge: float = 1e-12) -> tuple[np.ndarray, bool]:
    """Stationary point of the Lagrangian: ``(A_red + diag(lam)) y = -b_red``.

    ``lam`` is expressed relative to ``max(diag(A_red))``. Returns ``y`` and
    whether a ridge was needed.
    """
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0):
        raise ValueError("lambda must be nonnegative")
    A, b, _ = _normalized(sq)
    return linalg.solve_hermitian_psd(A + np.diag(lam), -b, ridge=ridge)


def literal_fixed_point_step(sq: SurrogateQuadratic, lam, y_prev, ridge: float = 1e-12) -> tuple[np.ndarray, bool]:
    """Fixed-point reading ``y <- -A (A + diag(lam))^{-1} y_prev``."""
    A, _, _ = _normalized(sq)
    x, ridged = linalg.solve_hermitian_psd(A + np.diag(np.asarray(lam, dtype=float)), y_prev, ridge=ridge)
    return -(A @ x), ridged


def phases_from_y(y, eta: float, y_min: float = 1e-8) -> PhaseShift:
    y = np.asarray(y, dtype=np.complex128).reshape(-1)
    mag = np.abs(y)
    unit = np.where(mag > 0, y / np.where(mag > 0, mag, 1.0), 1.0)
    y = unit * np.maximum(mag, y_min)
    return PhaseShift(eta, zf.clip_to_unit_disc(1.0 / (np.sqrt(eta) * y)))


def dual_update(state: PhaseDualState, y) -> PhaseDualState:
    it = state.iteration + 1
    step = state.step0 / np.sqrt(it)
    g = np.abs(np.asarray(y).reshape(-1)) ** 2 - 1.0
    return PhaseDualState(np.maximum(0.0, state.lam + step * g), state.step0, it)


def _try_objective(channels, ps, p) -> float:
    try:
        return direct_power_objective(channels, ps, p)
    except zf.ZFRankError:
        return np.inf


def coordinate_phase_search(channels: ChannelSet, p, ps: PhaseShift, grid: int = 36, sweeps: int = 3) -> PhaseShift:
    """Cyclic exact 1-D search: each element in turn takes the best unit-modulus
    angle on a ``grid``-point circle, all other elements held fixed."""
    p = np.asarray(p, dtype=float)
    eta = ps.eta
    phi = ps.phi.copy()
    angles = np.exp(2j * np.pi * np.arange(grid) / grid)
    hr = channels.h_reflect.conj()  # K x N
    G = channels.G
    sqe = np.sqrt(eta)
    X = zf.effective_channel(channels, ps)
    for _ in range(sweeps):
        moved = False
        for n in range(ps.N):
            rank1 = sqe * np.outer(hr[:, n], G[n, :])  # K x M
            base = X - phi[n] * rank1
            cands = np.concatenate([[phi[n]], angles])
            Xs = base[None] + cands[:, None, None] * rank1[None]
            S = Xs @ np.conj(np.swapaxes(Xs, 1, 2))
            with np.errstate(all="ignore"):
                try:
                    diag = np.real(np.diagonal(np.linalg.inv(S), axis1=1, axis2=2))
                except np.linalg.LinAlgError:
                    continue
            F = diag @ p
            F[~np.isfinite(F) | (F <= 0)] = np.inf
            j = int(np.argmin(F))
            if j > 0 and F[j] < F[0] * (1.0 - 1e-12):
                phi[n] = cands[j]
                X = base + phi[n] * rank1
                moved = True
        if not moved:
            break
    return PhaseShift(eta, zf.clip_to_unit_disc(phi))


def refine_phase(channels: ChannelSet, p, ps: PhaseShift, maxiter: int = 200) -> PhaseShift:
    """Local descent on the exact ZF power over ``phi = r e^{i theta}``, ``r in [0, 1]``."""
    N = ps.N
    eta = ps.eta
    sqe = np.sqrt(eta)
    try:
        F0, _ = direct_power_gradient(channels, ps, p)
    except np.linalg.LinAlgError:
        return ps
    if not F0 > 0:
        return ps

    def fun(x):
        r, th = x[:N], x[N:]
        e = np.exp(1j * th)
        cand = PhaseShift(eta, np.clip(r, 0.0, 1.0) * e)
        try:
            F, c = direct_power_gradient(channels, cand, p)
        except np.linalg.LinAlgError:
            return np.inf, np.zeros_like(x)
        ce = c * e
        g_r = -2.0 * sqe * np.real(ce)
        g_th = 2.0 * sqe * np.imag(ce * r)
        return F / F0, np.concatenate([g_r, g_th]) / F0

    x0 = np.concatenate([np.abs(ps.phi), np.angle(ps.phi)])
    bounds = [(0.0, 1.0)] * N + [(None, None)] * N
    res = minimize(fun, x0, jac=True, method="L-BFGS-B", bounds=bounds, options={"maxiter": maxiter})
    r = np.clip(res.x[:N], 0.0, 1.0)
    return PhaseShift(eta, zf.clip_to_unit_disc(r * np.exp(1j * res.x[N:])))


def optimize_phase(channels: ChannelSet, p, ps_prev: PhaseShift, cfg: PhaseConfig | None = None) -> PhaseStep:
    """One safeguarded phase update at fixed powers ``p`` (all > 0)."""
    cfg = cfg or PhaseConfig()
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise ValueError("optimize_phase needs strictly positive powers")
    eta = ps_prev.eta
    F_prev = direct_power_objective(channels, ps_prev, p)
    threshold = F_prev * (1.0 - 1e-12)

    sq = build_surrogate(channels, p)
    try:
        s_prev = surrogate_objective(sq, ps_prev, cfg.y_min)
        deviation = abs(s_prev - F_prev) / F_prev if F_prev > 0 else 0.0
    except ValueError:
        deviation = np.nan

    best_ps, best_F = ps_prev, F_prev
    state = PhaseDualState(np.zeros(channels.N), cfg.step0)
    y = 1.0 / (np.sqrt(eta) * np.where(np.abs(ps_prev.phi) > cfg.y_min, ps_prev.phi, 1.0))
    ridge_used = False
    last_val = np.inf
    it = 0
    for it in range(1, cfg.max_dual_iters + 1):
        if cfg.use_literal_lemma1:
            y, ridged = literal_fixed_point_step(sq, state.lam, y)
        else:
            y, ridged = inner_solve(sq, state.lam)
        ridge_used |= ridged
        cand = phases_from_y(y, eta, cfg.y_min)
        F_c = _try_objective(channels, cand, p)
        if F_c < best_F:
            best_ps, best_F = cand, F_c
        val = sq.value(y)
        violation = float(np.max(np.abs(y) ** 2 - 1.0, initial=0.0))
        if violation < cfg.violation_tol or abs(val - last_val) <= cfg.objective_tol * max(abs(val), 1e-300):
            break
        last_val = val
        state = dual_update(state, y)
    surrogate_ok = best_F < threshold

    refined = False
    if cfg.refine:
        start = best_ps if surrogate_ok else ps_prev
        if cfg.coordinate_grid > 0:
            start = coordinate_phase_search(channels, p, start, cfg.coordinate_grid, cfg.coordinate_sweeps)
        cand = refine_phase(channels, p, start, cfg.refine_maxiter)
        F_c = _try_objective(channels, cand, p)
        if F_c < min(best_F, threshold):
            best_ps, best_F = cand, F_c
            refined = True

    accepted = best_F < threshold
    if not accepted:
        best_ps, best_F = ps_prev, F_prev
    return PhaseStep(
        phase=best_ps,
        accepted=accepted,
        objective_before=F_prev,
        objective_after=best_F,
        surrogate_deviation=deviation,
        dual_iters=it,
        surrogate_accepted=surrogate_ok,
        refined=refined,
        ridge_used=ridge_used,
    )
