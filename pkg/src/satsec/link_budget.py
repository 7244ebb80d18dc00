"""Link budget constants, unit conversions, noise power and ground pathloss.

Defaults reproduce the L-band LEO mobile-satellite link budget used throughout
the package. Everything downstream works in linear units; dB only appears in
configuration and reporting.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .rates import NoiseModel

SPEED_OF_LIGHT = 2.99792458e8  # m/s

BAND_MIN_HZ = 1616.0e6
BAND_MAX_HZ = 1626.5e6


def _check_finite(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {x!r}")
    return arr


def db_to_linear(x):
    """10**(x/10). Scalars in, float out; arrays in, arrays out."""
    arr = _check_finite(x, "dB value")
    out = np.power(10.0, arr / 10.0)
    return float(out) if out.ndim == 0 else out


def linear_to_db(x):
    arr = _check_finite(x, "linear value")
    if np.any(arr <= 0):
        raise ValueError(f"linear value must be positive, got {x!r}")
    out = 10.0 * np.log10(arr)
    return float(out) if out.ndim == 0 else out


def noise_power(k_db: float, temp: float, bandwidth: float) -> float:
    """Thermal noise power K*T*B in watts, with K given in dBW/K/Hz."""
    if not temp > 0:
        raise ValueError(f"noise temperature must be positive, got {temp}")
    if not bandwidth > 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    return db_to_linear(k_db) * temp * bandwidth


def ground_pathloss_db(distance: float, carrier_freq: float, exponent: float) -> float:
    """Terrestrial pathloss ``10 log10[(4 pi / lambda)^2 d^exponent]`` in dB."""
    if not distance > 0:
        raise ValueError(f"distance must be positive, got {distance}")
    if not carrier_freq > 0:
        raise ValueError(f"carrier frequency must be positive, got {carrier_freq}")
    wavelength = SPEED_OF_LIGHT / carrier_freq
    return 20.0 * math.log10(4.0 * math.pi / wavelength) + 10.0 * exponent * math.log10(distance)


def max_doppler_hz(speed: float, carrier_freq: float) -> float:
    """Maximum Doppler shift v*f/c for a terminal moving at ``speed`` m/s."""
    if speed < 0:
        raise ValueError(f"speed must be non-negative, got {speed}")
    return speed * carrier_freq / SPEED_OF_LIGHT


@dataclass(frozen=True)
class LinkBudget:
    """Physical link parameters. Units are in the field names' suffixes."""

    boltzmann_db: float = -226.8  # dBW/K/Hz, as tabulated (physical value is -228.6)
    carrier_bandwidth_hz: float = 41.67e3
    sat_noise_temp_k: float = 290.0
    terminal_noise_temp_k: float = 321.0
    total_sat_power_dbw: float = 31.46
    fl_tx_power_dbw: float = 7.65
    user_tx_power_dbw: float = 0.0
    sat_antenna_gain_dbi: float = 24.3
    terminal_antenna_gain_dbi: float = 3.5
    sat_link_pathloss_db: float = 151.0
    rl_freq_hz: float = 1616.0e6
    fl_freq_hz: float = 1616.0e6
    sat_doppler_hz: float = 270.0
    beams: int = 48
    feeds_total: int = 318
    carriers_per_beam: int = 20
    frequency_reuse_factor: int = 12
    guard_bandwidth_hz: float = 2.0e3

    def __post_init__(self):
        for f in dataclasses.fields(self):
            _check_finite(getattr(self, f.name), f.name)
        if self.sat_noise_temp_k <= 0 or self.terminal_noise_temp_k <= 0:
            raise ValueError("noise temperatures must be positive")
        if self.carrier_bandwidth_hz <= 0:
            raise ValueError("carrier bandwidth must be positive")
        for name in ("rl_freq_hz", "fl_freq_hz"):
            f = getattr(self, name)
            if not BAND_MIN_HZ <= f <= BAND_MAX_HZ:
                raise ValueError(f"{name}={f} outside the 1616-1626.5 MHz band")

    # linear-domain views
    @property
    def sat_noise_w(self) -> float:
        return noise_power(self.boltzmann_db, self.sat_noise_temp_k, self.carrier_bandwidth_hz)

    @property
    def terminal_noise_w(self) -> float:
        return noise_power(self.boltzmann_db, self.terminal_noise_temp_k, self.carrier_bandwidth_hz)

    @property
    def fl_power_w(self) -> float:
        return db_to_linear(self.fl_tx_power_dbw)

    @property
    def total_sat_power_w(self) -> float:
        return db_to_linear(self.total_sat_power_dbw)

    @property
    def user_power_w(self) -> float:
        return db_to_linear(self.user_tx_power_dbw)

    @property
    def sat_link_gains_db(self) -> float:
        """Antenna gains net of the fixed satellite-path loss, both directions."""
        return self.sat_antenna_gain_dbi + self.terminal_antenna_gain_dbi - self.sat_link_pathloss_db

    @property
    def ground_gains_db(self) -> float:
        """Terminal-to-terminal antenna gains (user and eavesdropper are both terminals)."""
        return 2.0 * self.terminal_antenna_gain_dbi

    def noise_model(self) -> NoiseModel:
        n_t = self.terminal_noise_w
        return NoiseModel(sigma2_sat=self.sat_noise_w, sigma2_u1=n_t, sigma2_u2=n_t,
                          sigma2_e1=n_t, sigma2_e2=n_t)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "LinkBudget":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown link budget keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "LinkBudget":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise OSError(f"cannot read link budget file {path}: {exc}") from exc
        return cls.from_dict(data)


@dataclass(frozen=True)
class GroundChannelParams:
    """User-to-eavesdropper terrestrial link parameters."""

    pathloss_exponent: float = 3.7
    user_speed_mps: float = 10.0
    eve_distance_range_m: tuple[float, float] = (2000.0, 2500.0)

    def __post_init__(self):
        if not self.pathloss_exponent > 2:
            raise ValueError("pathloss exponent must exceed 2")
        lo, hi = self.eve_distance_range_m
        if not (0 < lo <= hi):
            raise ValueError(f"bad eavesdropper distance range {self.eve_distance_range_m}")
        if self.user_speed_mps < 0:
            raise ValueError("user speed must be non-negative")
