"""Per-trial channel realizations for the two-user, two-eavesdropper system.

Every trial owns a private ``numpy.random.Generator`` derived from
``(master_seed, trial_index)``, so a trial's channels do not depend on which
worker runs it or in what order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .link_budget import GroundChannelParams, LinkBudget, db_to_linear, ground_pathloss_db

RNG_ALGORITHM = "PCG64"


@dataclass(frozen=True)
class FadingParams:
    """Rician fading of the satellite links.

    The forward link has a lognormal line-of-sight envelope (linear-domain mean
    ``los_mean`` and variance ``los_variance``) plus a complex Gaussian diffuse
    part of power ``diffuse_power``. The return link uses a fixed K-factor with
    unit total power.
    """

    los_mean: float = 0.787
    los_variance: float = 0.0671
    diffuse_power: float = 0.0456
    rl_k_factor_db: float = 15.0

    def __post_init__(self):
        if not self.los_mean > 0:
            raise ValueError("los_mean must be positive")
        if self.los_variance < 0:
            raise ValueError("los_variance must be non-negative")
        if not self.diffuse_power >= 0:
            raise ValueError("diffuse_power must be non-negative")
        if not math.isfinite(self.rl_k_factor_db):
            raise ValueError("rl_k_factor_db must be finite")

    @property
    def fl_mean_power(self) -> float:
        return self.los_mean**2 + self.los_variance + self.diffuse_power


@dataclass(frozen=True)
class ChannelSet:
    """One draw of every channel in the system.

    Satellite vectors have one entry per feed. ``h_u*_sat`` are uplinks,
    ``h_sat_*`` downlinks; forward-link signals are received as ``h.T @ w``.
    """

    h_u1_sat: np.ndarray
    h_u2_sat: np.ndarray
    h_sat_u1: np.ndarray
    h_sat_u2: np.ndarray
    h_sat_e1: np.ndarray
    h_sat_e2: np.ndarray
    h_u1_e1: complex
    h_u2_e2: complex
    eve_distances_m: tuple[float, float] = (float("nan"), float("nan"))

    def __post_init__(self):
        vecs = (self.h_u1_sat, self.h_u2_sat, self.h_sat_u1, self.h_sat_u2, self.h_sat_e1, self.h_sat_e2)
        n = len(vecs[0])
        if n < 2 or any(np.ndim(v) != 1 or len(v) != n for v in vecs):
            raise ValueError("satellite channel vectors must all have the same length >= 2")
        if not all(np.all(np.isfinite(v)) for v in vecs):
            raise ValueError("channel entries must be finite")
        if not (np.isfinite(self.h_u1_e1) and np.isfinite(self.h_u2_e2)):
            raise ValueError("ground channel entries must be finite")

    @property
    def n_feeds(self) -> int:
        return len(self.h_u1_sat)

    def map_vectors(self, fn) -> "ChannelSet":
        """Apply ``fn(name, value)`` to every channel coefficient/vector."""
        names = ("h_u1_sat", "h_u2_sat", "h_sat_u1", "h_sat_u2", "h_sat_e1", "h_sat_e2", "h_u1_e1", "h_u2_e2")
        kw = {n: fn(n, getattr(self, n)) for n in names}
        return ChannelSet(**kw, eve_distances_m=self.eve_distances_m)


@dataclass(frozen=True)
class SystemConfig:
    """Everything needed to draw one trial's channels."""

    n_feeds: int = 5
    link_budget: LinkBudget = field(default_factory=LinkBudget)
    fading: FadingParams = field(default_factory=FadingParams)
    ground: GroundChannelParams = field(default_factory=GroundChannelParams)
    eve_distance_m: float | None = None  # fixed distance; None draws from ground.eve_distance_range_m

    def __post_init__(self):
        if self.n_feeds < 2:
            raise ValueError(f"need at least 2 feeds, got {self.n_feeds}")
        if self.eve_distance_m is not None and not self.eve_distance_m > 0:
            raise ValueError("eavesdropper distance must be positive")


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Independent generator stream for one trial."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, trial_index])))


def _cn(rng: np.random.Generator, size, power: float = 1.0) -> np.ndarray:
    """Circular complex Gaussian samples with E|x|^2 = power."""
    scale = math.sqrt(power / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def fl_rician_fading(rng: np.random.Generator, size, fading: FadingParams) -> np.ndarray:
    """Forward-link fading: lognormal LOS envelope, uniform phase, Gaussian diffuse."""
    m, v = fading.los_mean, fading.los_variance
    s2 = math.log1p(v / m**2)
    mu = math.log(m) - s2 / 2.0
    amp = rng.lognormal(mu, math.sqrt(s2), size) if s2 > 0 else np.full(size, m)
    phase = rng.uniform(0.0, 2.0 * math.pi, size)
    los = amp * np.exp(1j * phase)
    if fading.diffuse_power == 0:
        return los
    return los + _cn(rng, size, fading.diffuse_power)


def rl_rician_fading(rng: np.random.Generator, size, k_factor_db: float) -> np.ndarray:
    """Return-link fading with K-factor ``k_factor_db`` and unit mean power."""
    k = db_to_linear(k_factor_db)
    los_amp = math.sqrt(k / (k + 1.0))
    phase = rng.uniform(0.0, 2.0 * math.pi, size)
    return los_amp * np.exp(1j * phase) + _cn(rng, size, 1.0 / (k + 1.0))


def draw_satellite_channel(rng: np.random.Generator, n_feeds: int, fading: FadingParams,
                           pathloss_db: float, gains_db: float,
                           direction: Literal["RL", "FL"]) -> np.ndarray:
    if n_feeds < 2:
        raise ValueError(f"need at least 2 feeds, got {n_feeds}")
    if direction == "FL":
        g = fl_rician_fading(rng, n_feeds, fading)
    elif direction == "RL":
        g = rl_rician_fading(rng, n_feeds, fading.rl_k_factor_db)
    else:
        raise ValueError(f"direction must be 'RL' or 'FL', got {direction!r}")
    return math.sqrt(db_to_linear(gains_db - pathloss_db)) * g


def draw_ground_channel(rng: np.random.Generator, distance: float, freq: float,
                        params: GroundChannelParams, gains_db: float) -> complex:
    """Rayleigh user-to-eavesdropper coefficient with distance-dependent pathloss."""
    pl = ground_pathloss_db(distance, freq, params.pathloss_exponent)
    return complex(math.sqrt(db_to_linear(gains_db - pl)) * _cn(rng, None))


def draw_scenario(rng: np.random.Generator, config: SystemConfig) -> ChannelSet:
    lb, fad, n = config.link_budget, config.fading, config.n_feeds
    pl, gains = lb.sat_link_pathloss_db, lb.sat_antenna_gain_dbi + lb.terminal_antenna_gain_dbi

    def sat(direction):
        return draw_satellite_channel(rng, n, fad, pl, gains, direction)

    h_u1_sat, h_u2_sat = sat("RL"), sat("RL")
    h_sat_u1, h_sat_u2 = sat("FL"), sat("FL")
    h_sat_e1, h_sat_e2 = sat("FL"), sat("FL")
    lo, hi = config.ground.eve_distance_range_m
    # always consume the draw so fixed-distance runs share the remaining stream
    d1, d2 = (float(x) for x in rng.uniform(lo, hi, 2))
    if config.eve_distance_m is not None:
        d1 = d2 = float(config.eve_distance_m)
    g1 = draw_ground_channel(rng, d1, lb.rl_freq_hz, config.ground, lb.ground_gains_db)
    g2 = draw_ground_channel(rng, d2, lb.rl_freq_hz, config.ground, lb.ground_gains_db)
    return ChannelSet(h_u1_sat, h_u2_sat, h_sat_u1, h_sat_u2, h_sat_e1, h_sat_e2, g1, g2, (d1, d2))
