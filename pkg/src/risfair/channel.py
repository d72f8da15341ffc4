"""Simulation geometry, path loss, Rayleigh channels and noise power.

Distances are in meters on a 2-D plane. The BS sits at the origin and the
RIS at ``(D, 50)``; users are dropped uniformly on a disc.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SeedLike = int | list[int] | tuple[int, ...] | np.random.SeedSequence


@dataclass(frozen=True)
class PathLossParams:
    reference_loss_db: float = 30.0
    exponent_bs_user: float = 4.5
    exponent_bs_ris: float = 2.2
    exponent_ris_user: float = 2.2

    def __post_init__(self):
        if self.reference_loss_db < 0:
            raise ValueError("reference_loss_db must be >= 0")
        for name in ("exponent_bs_user", "exponent_bs_ris", "exponent_ris_user"):
            a = getattr(self, name)
            if not 1.5 <= a <= 6.0:
                raise ValueError(f"{name}={a} outside [1.5, 6]")


@dataclass(frozen=True)
class Geometry:
    user_positions: np.ndarray  # (K, 2)
    D: float = 100.0
    ris_height: float = 50.0
    bs_position: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.D <= 0:
            raise ValueError("RIS horizontal coordinate D must be > 0")

    @property
    def ris_position(self) -> np.ndarray:
        return np.array([self.D, self.ris_height])

    @property
    def K(self) -> int:
        return self.user_positions.shape[0]

    def distances(self) -> tuple[np.ndarray, float, np.ndarray]:
        """(BS-user distances, BS-RIS distance, RIS-user distances)."""
        bs = np.asarray(self.bs_position, dtype=float)
        ris = self.ris_position
        d_bu = np.linalg.norm(self.user_positions - bs, axis=1)
        d_br = float(np.linalg.norm(ris - bs))
        d_ru = np.linalg.norm(self.user_positions - ris, axis=1)
        return d_bu, d_br, d_ru


@dataclass
class ChannelSet:
    """One realization: ``G`` (N x M), ``h_direct`` (K x M), ``h_reflect`` (K x N).

    Row ``k`` of ``h_direct`` / ``h_reflect`` holds the column vectors
    ``h_{d,k}`` / ``h_{r,k}`` (not conjugated).
    """

    G: np.ndarray
    h_direct: np.ndarray
    h_reflect: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.G = np.asarray(self.G, dtype=np.complex128)
        self.h_direct = np.asarray(self.h_direct, dtype=np.complex128)
        self.h_reflect = np.asarray(self.h_reflect, dtype=np.complex128)
        n, m = self.G.shape
        k = self.h_direct.shape[0]
        if self.h_direct.shape != (k, m) or self.h_reflect.shape != (k, n):
            raise ValueError(
                f"inconsistent shapes G={self.G.shape} h_direct={self.h_direct.shape} "
                f"h_reflect={self.h_reflect.shape}"
            )
        for name in ("G", "h_direct", "h_reflect"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")

    @property
    def M(self) -> int:
        return self.G.shape[1]

    @property
    def N(self) -> int:
        return self.G.shape[0]

    @property
    def K(self) -> int:
        return self.h_direct.shape[0]

    @property
    def H1(self) -> np.ndarray:
        """Direct channels stacked as columns, M x K."""
        return self.h_direct.T

    @property
    def H2(self) -> np.ndarray:
        """Reflect channels stacked as columns, N x K."""
        return self.h_reflect.T


def noise_power(bandwidth_hz: float, psd_dbm_per_hz: float) -> float:
    """Thermal noise power in watts for a given bandwidth and PSD."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth_hz must be > 0")
    dbm = psd_dbm_per_hz + 10.0 * np.log10(bandwidth_hz)
    return float(10.0 ** ((dbm - 30.0) / 10.0))


def dbm_to_watts(dbm: float) -> float:
    return float(10.0 ** ((dbm - 30.0) / 10.0))


def link_gain(distance, exponent: float, reference_loss_db: float) -> np.ndarray:
    """Linear large-scale power gain ``10**(-PL/10)`` with ``PL = ref + 10*a*log10(d)``."""
    d = np.asarray(distance, dtype=float)
    pl_db = reference_loss_db + 10.0 * exponent * np.log10(d)
    return 10.0 ** (-pl_db / 10.0)


def rayleigh(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) samples.

    Real and imaginary parts are drawn interleaved, so for a fixed trailing
    shape the leading rows do not depend on how many rows are requested.
    """
    shape = tuple(np.atleast_1d(shape))
    x = rng.standard_normal(shape + (2,))
    return (x[..., 0] + 1j * x[..., 1]) / np.sqrt(2.0)


def place_users(seed: SeedLike, K: int, center=(200.0, 0.0), radius: float = 10.0) -> np.ndarray:
    """K points uniform on a disc (polar sampling with sqrt radius)."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(size=K))
    theta = rng.uniform(0.0, 2.0 * np.pi, size=K)
    c = np.asarray(center, dtype=float)
    return c + np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def sample_channels(
    seed: SeedLike,
    geometry: Geometry,
    pl: PathLossParams,
    M: int,
    N: int,
    K: int | None = None,
) -> ChannelSet:
    """Path loss from link distances times i.i.d. Rayleigh fading on every link."""
    K = geometry.K if K is None else K
    if K != geometry.K:
        raise ValueError(f"geometry has {geometry.K} users, asked for {K}")
    # one stream per link: the direct channels do not depend on N, and the
    # first n RIS rows are shared by every N >= n
    if isinstance(seed, np.random.SeedSequence):
        # copy so the caller's sequence is not advanced by spawn()
        ss = np.random.SeedSequence(seed.entropy, spawn_key=seed.spawn_key)
    else:
        ss = np.random.SeedSequence(seed)
    rng_d, rng_g, rng_r = (np.random.default_rng(s) for s in ss.spawn(3))
    d_bu, d_br, d_ru = geometry.distances()
    g_bu = link_gain(d_bu, pl.exponent_bs_user, pl.reference_loss_db)
    g_br = link_gain(d_br, pl.exponent_bs_ris, pl.reference_loss_db)
    g_ru = link_gain(d_ru, pl.exponent_ris_user, pl.reference_loss_db)
    G = np.sqrt(g_br) * rayleigh(rng_g, (N, M))
    h_direct = np.sqrt(g_bu)[:, None] * rayleigh(rng_d, (K, M))
    h_reflect = np.sqrt(g_ru)[:, None] * rayleigh(rng_r, (N, K)).T
    return ChannelSet(G, h_direct, h_reflect, meta={"d_bu": d_bu, "d_br": d_br, "d_ru": d_ru})
