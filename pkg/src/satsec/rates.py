"""Capacity and secrecy-rate formulas for both exchange schemes.

Rates are in bits per channel use with the bandwidth factor omitted. All
functions broadcast over numpy arrays, so a whole grid of time fractions
(or a stack of beamformers along the leading axes) can be evaluated at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class NoiseModel:
    """Noise variances in watts at the satellite, the users and the eavesdroppers."""

    sigma2_sat: float
    sigma2_u1: float
    sigma2_u2: float
    sigma2_e1: float
    sigma2_e2: float

    def __post_init__(self):
        for name in ("sigma2_sat", "sigma2_u1", "sigma2_u2", "sigma2_e1", "sigma2_e2"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    def scaled(self, k: float) -> "NoiseModel":
        return NoiseModel(*(k * v for v in (self.sigma2_sat, self.sigma2_u1, self.sigma2_u2,
                                            self.sigma2_e1, self.sigma2_e2)))


@dataclass(frozen=True)
class TimeAllocation:
    """Time fractions. ``t3`` is the second forward slot of the conventional
    scheme and is zero for the XOR scheme."""

    t1: float
    t2: float
    t3: float = 0.0

    def __post_init__(self):
        ts = (self.t1, self.t2, self.t3)
        if any(t < 0 or t > 1 for t in ts):
            raise ValueError(f"time fractions must lie in [0, 1], got {ts}")
        if abs(sum(ts) - 1.0) > 1e-9:
            raise ValueError(f"time fractions must sum to 1, got {ts}")


def _check_fraction(t):
    t = np.asarray(t, dtype=float)
    if np.any((t < 0) | (t > 1)):
        raise ValueError(f"time fraction out of range: {t}")
    return t


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def rl_capacity(p_user, h, sigma2, t1):
    """Return-link capacity t1*log2(1 + p*||h||^2/sigma2) of a user to the
    multi-feed satellite."""
    t1 = _check_fraction(t1)
    gain = np.sum(np.abs(np.asarray(h)) ** 2, axis=-1)
    return _out(t1 * np.log2(1.0 + p_user * gain / sigma2))


def eve_rl_capacity(p_user, h, sigma2, t1):
    """Capacity of the single-antenna eavesdropper overhearing a user's uplink."""
    t1 = _check_fraction(t1)
    return _out(t1 * np.log2(1.0 + p_user * np.abs(h) ** 2 / sigma2))


def received_snr(w, h, sigma2):
    """|h^T w|^2 / sigma2; ``w`` may carry leading batch axes."""
    return _out(np.abs(np.asarray(w) @ np.asarray(h)) ** 2 / sigma2)


def fl_rate(w, h, sigma2, t):
    """Forward-link rate t*log2(1 + |h^T w|^2/sigma2)."""
    t = _check_fraction(t)
    return _out(t * np.log2(1.0 + received_snr(w, h, sigma2)))


def rl_secrecy(i_user, i_eve):
    return _out(np.maximum(0.0, np.asarray(i_user) - np.asarray(i_eve)))


def fl_secrecy_xor(sr_rl_u1, sr_rl_u2, i_fl_u1, i_fl_u2):
    """Forward-link secrecy rate of the XOR broadcast.

    Both return links secure: the broadcast rate is the weaker user's rate.
    Only U2's uplink secure: only U2's message is delivered, so U1's rate
    counts, and symmetrically. No secure uplink: nothing to protect, 0.
    """
    args = [np.asarray(x, dtype=float) for x in (sr_rl_u1, sr_rl_u2, i_fl_u1, i_fl_u2)]
    if any(np.any(a < 0) for a in args):
        raise ValueError("rates must be non-negative")
    s1, s2, i1, i2 = args
    out = np.where((s1 > 0) & (s2 > 0), np.minimum(i1, i2),
                   np.where(s2 > 0, i1, np.where(s1 > 0, i2, 0.0)))
    return _out(out)


def end_to_end_xor(sr_rl, sr_fl):
    return _out(np.minimum(sr_rl, sr_fl))


def sum_secrecy_xor(sr_u1, sr_u2):
    return _out(np.asarray(sr_u1) + np.asarray(sr_u2))


def fl_secrecy_con(i_fl_user, i_fl_eve):
    return _out(np.maximum(0.0, np.asarray(i_fl_user) - np.asarray(i_fl_eve)))


def end_to_end_con(sr_rl_own, sr_fl_delivery):
    """A user's message is secure end to end only as far as both its own uplink
    and the forward hop that delivers it to the other user."""
    return _out(np.minimum(sr_rl_own, sr_fl_delivery))


def sum_secrecy_con(sr_u1, sr_u2):
    return _out(np.asarray(sr_u1) + np.asarray(sr_u2))
