"""Effective channel, zero-forcing precoder, SINR/rate and power accounting.

The stacked effective channel is ``X = H1^H + H2^H Phi G`` (K x M); row ``k``
is ``h_k^H``. Powers ``p`` are plain length-K arrays in watts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .channel import ChannelSet

ZF_RANK_RTOL = 1e-10
PHI_MAG_TOL = 1e-9


class ZFRankError(ValueError):
    """The effective channel is rank-deficient, so ZF cannot null interference."""


@dataclass(frozen=True)
class PhaseShift:
    eta: float
    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=np.complex128).reshape(-1)
        object.__setattr__(self, "phi", phi)
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"reflection efficiency eta={self.eta} not in (0, 1]")
        if phi.size and np.abs(phi).max() > 1.0 + PHI_MAG_TOL:
            raise ValueError(f"|phi_n| exceeds 1 (max {np.abs(phi).max():.6g})")

    @classmethod
    def unit(cls, N: int, eta: float) -> "PhaseShift":
        return cls(eta, np.ones(N, dtype=np.complex128))

    @classmethod
    def from_angles(cls, theta, eta: float) -> "PhaseShift":
        return cls(eta, clip_to_unit_disc(np.exp(1j * np.asarray(theta, dtype=float))))

    @property
    def N(self) -> int:
        return self.phi.size

    @property
    def matrix(self) -> np.ndarray:
        return np.sqrt(self.eta) * np.diag(self.phi)


def clip_to_unit_disc(phi) -> np.ndarray:
    """Scale entries so that ``abs(phi) <= 1`` holds exactly in floating point."""
    phi = np.array(phi, dtype=np.complex128).reshape(-1)
    mag = np.abs(phi)
    big = mag > 1.0
    phi[big] /= mag[big]
    while np.any(big := np.abs(phi) > 1.0):
        phi[big] *= np.nextafter(1.0, 0.0)
    return phi


def effective_channel(channels: ChannelSet, ps: PhaseShift) -> np.ndarray:
    if ps.N != channels.N:
        raise ValueError(f"phase vector has {ps.N} entries, channel has N={channels.N}")
    # diag(phi) G as a row scaling
    phi_g = (np.sqrt(ps.eta) * ps.phi)[:, None] * channels.G
    return channels.h_direct.conj() + channels.h_reflect.conj() @ phi_g


def zf_from_effective(X: np.ndarray) -> np.ndarray:
    s = np.linalg.svd(X, compute_uv=False)
    K = X.shape[0]
    if s.size < K or s[-1] < ZF_RANK_RTOL * s[0]:
        smin = s[-1] if s.size else 0.0
        raise ZFRankError(f"effective channel {X.shape} rank-deficient (sigma_min/sigma_max={smin / s[0]:.3e})")
    return linalg.pinv(X)


def zf_precoder(channels: ChannelSet, ps: PhaseShift) -> np.ndarray:
    """W = pinv(X), M x K, so that X W = I_K."""
    return zf_from_effective(effective_channel(channels, ps))


def sinr_all(X: np.ndarray, W: np.ndarray, p, sigma2: float) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    gains = np.abs(X @ W) ** 2  # gains[k, i] = |h_k^H w_i|^2
    signal = p * np.diag(gains)
    interference = gains @ p - signal
    return signal / (interference + sigma2)


def sinr(k: int, channels: ChannelSet, ps: PhaseShift, W, p, sigma2: float) -> float:
    """SINR of user ``k`` (0-based) for an arbitrary precoder ``W``."""
    X = effective_channel(channels, ps)
    return float(sinr_all(X, np.asarray(W), p, sigma2)[k])


def user_rate(sinr_value):
    return np.log2(1.0 + np.asarray(sinr_value, dtype=float))


def transmit_power(W, p) -> float:
    """tr(P W^H W) = sum_k p_k ||w_k||^2."""
    W = np.asarray(W)
    p = np.asarray(p, dtype=float)
    return float(np.sum(p * column_norms_sq(W)))


def column_norms_sq(W) -> np.ndarray:
    return np.sum(np.abs(np.asarray(W)) ** 2, axis=0)


def b_matrix(W) -> np.ndarray:
    """B = (I_K kron W)^H (I_K kron W), K^2 x K^2."""
    W = linalg.as_matrix(W)
    K = W.shape[1]
    IW = linalg.kron(np.eye(K), W)
    return IW.conj().T @ IW


def b_entry(B: np.ndarray, k: int, j: int) -> complex:
    """b_{l(k), l(j)} for 0-based users ``k``, ``j``."""
    K = int(round(np.sqrt(B.shape[0])))
    return B[linalg.diag_index(k, K), linalg.diag_index(j, K)]
