"""XOR network-coding exchange: broadcast beamformer design and RL/FL time split.

The gateway decodes both uplinks, XORs the bit streams and broadcasts one
stream to both users, so a single beamformer must serve both forward links.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import rates
from .channel_gen import ChannelSet
from .rates import NoiseModel, TimeAllocation
from .solvers import MaxMinSdpResult, maxmin_sdp, rank_one_extract

CASE_BOTH = "case-1"
CASE_U2_ONLY = "case-2"  # U1's uplink insecure: only U2's message, delivered to U1
CASE_U1_ONLY = "case-3"  # U2's uplink insecure: only U1's message, delivered to U2
ALL_BLOCKED = "all-blocked"

DEFAULT_USER_POWERS = (1.0, 1.0)  # W, 0 dBW terminals


@dataclass(frozen=True)
class SearchConfig:
    time_bins: int = 100
    beta_bins: int = 100
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.time_bins < 2 or self.beta_bins < 2:
            raise ValueError("search grids need at least 2 bins")

    def time_grid(self) -> np.ndarray:
        m = self.time_bins
        return np.arange(1, m + 1) / (m + 1)

    def beta_grid(self) -> np.ndarray:
        m = self.beta_bins
        return np.arange(1, m + 1) / (m + 1)


@dataclass(frozen=True)
class XorSolution:
    time: TimeAllocation
    beamformer: np.ndarray
    gram: np.ndarray
    gamma_star: float
    u_star: float
    sum_secrecy: float
    rl_secrecy: tuple[float, float]
    fl_rates: tuple[float, float]
    branch: str


def rl_secrecy_rates(ch: ChannelSet, noise: NoiseModel, t1, p_users=DEFAULT_USER_POWERS):
    """Return-link secrecy rates of both users for uplink time ``t1``."""
    p1, p2 = p_users
    sr1 = rates.rl_secrecy(rates.rl_capacity(p1, ch.h_u1_sat, noise.sigma2_sat, t1),
                           rates.eve_rl_capacity(p1, ch.h_u1_e1, noise.sigma2_e1, t1))
    sr2 = rates.rl_secrecy(rates.rl_capacity(p2, ch.h_u2_sat, noise.sigma2_sat, t1),
                           rates.eve_rl_capacity(p2, ch.h_u2_e2, noise.sigma2_e2, t1))
    return sr1, sr2


def branch_of(sr1: float, sr2: float) -> str:
    if sr1 > 0 and sr2 > 0:
        return CASE_BOTH
    if sr2 > 0:
        return CASE_U2_ONLY
    if sr1 > 0:
        return CASE_U1_ONLY
    return ALL_BLOCKED


def broadcast_sdp(ch: ChannelSet, noise: NoiseModel, p_s: float) -> MaxMinSdpResult:
    """Max-min SNR broadcast design; independent of the time split.

    The returned ``beamformer`` is the rank-one factor recovered from the Gram
    matrix, ready to use.
    """
    A = np.outer(np.conj(ch.h_sat_u1), ch.h_sat_u1)
    B = np.outer(np.conj(ch.h_sat_u2), ch.h_sat_u2)
    sdp = maxmin_sdp(A, B, noise.sigma2_u1, noise.sigma2_u2, p_s)
    return replace(sdp, beamformer=rank_one_extract(sdp, A, B, p_s))


def _matched_beam(h: np.ndarray, sigma2: float, p_s: float):
    g = np.conj(h)
    w = math.sqrt(p_s) * g / np.linalg.norm(g)
    return w, rates.received_snr(w, h, sigma2)


def rl_cap_power_scaling(w, gamma_star: float, cap_u: float, t2: float):
    """Back the broadcast power off until the weakest forward rate equals the
    uplink secrecy cap; power beyond that buys no end-to-end secrecy."""
    if cap_u < 0:
        raise ValueError("cap must be non-negative")
    if gamma_star <= 0 or t2 * math.log2(1.0 + gamma_star) <= cap_u:
        return w
    gamma_cap = 2.0 ** (cap_u / t2) - 1.0
    return w * math.sqrt(gamma_cap / gamma_star)


def design_beamformer_xor(ch: ChannelSet, noise: NoiseModel, t1: float, t2: float, p_s: float, *,
                          p_users=DEFAULT_USER_POWERS, sdp: MaxMinSdpResult | None = None,
                          ) -> XorSolution:
    """Broadcast beamformer and resulting sum secrecy for a fixed time split.

    ``sdp`` may carry a precomputed ``broadcast_sdp`` result for this channel
    set; it does not depend on the time split.
    """
    if not (0 < t1 < 1 and 0 < t2 < 1) or abs(t1 + t2 - 1.0) > 1e-12:
        raise ValueError(f"invalid XOR time split t1={t1}, t2={t2}")
    time = TimeAllocation(t1, t2, 0.0)
    sr1, sr2 = rl_secrecy_rates(ch, noise, t1, p_users)
    branch = branch_of(sr1, sr2)
    n = ch.n_feeds

    if branch == ALL_BLOCKED:
        zero = np.zeros(n, dtype=complex)
        return XorSolution(time, zero, np.zeros((n, n), dtype=complex), 0.0, 0.0, 0.0,
                           (sr1, sr2), (0.0, 0.0), branch)

    if branch == CASE_BOTH:
        if sdp is None:
            sdp = broadcast_sdp(ch, noise, p_s)
        w0, gamma = sdp.beamformer, sdp.gamma_star
    elif branch == CASE_U2_ONLY:
        w0, gamma = _matched_beam(ch.h_sat_u1, noise.sigma2_u1, p_s)
    else:
        w0, gamma = _matched_beam(ch.h_sat_u2, noise.sigma2_u2, p_s)

    cap = max(sr1, sr2)
    u_star = min(t2 * math.log2(1.0 + gamma), cap)
    w = rl_cap_power_scaling(w0, gamma, cap, t2)

    i1 = rates.fl_rate(w, ch.h_sat_u1, noise.sigma2_u1, t2)
    i2 = rates.fl_rate(w, ch.h_sat_u2, noise.sigma2_u2, t2)
    sr_fl = rates.fl_secrecy_xor(sr1, sr2, i1, i2)
    total = rates.sum_secrecy_xor(rates.end_to_end_xor(sr1, sr_fl), rates.end_to_end_xor(sr2, sr_fl))
    return XorSolution(time, w, np.outer(w, np.conj(w)), float(gamma), float(u_star), float(total),
                       (sr1, sr2), (i1, i2), branch)


def sum_secrecy_grid_xor(ch: ChannelSet, noise: NoiseModel, t1, p_s: float, *,
                         p_users=DEFAULT_USER_POWERS, sdp: MaxMinSdpResult | None = None) -> np.ndarray:
    """Sum secrecy for an array of uplink fractions in one vectorized pass.

    The case branch does not depend on ``t1`` (a secrecy rate's sign is fixed
    by the channel gains), so the broadcast beam is shared by every grid point
    and only the uplink cap and the power back-off vary.
    """
    t1 = np.asarray(t1, dtype=float)
    if np.any((t1 <= 0) | (t1 >= 1)):
        raise ValueError("uplink fractions must lie in (0, 1)")
    t2 = 1.0 - t1
    sr1, sr2 = rl_secrecy_rates(ch, noise, t1, p_users)
    branch = branch_of(*rl_secrecy_rates(ch, noise, 0.5, p_users))
    if branch == ALL_BLOCKED:
        return np.zeros_like(t1)
    if branch == CASE_BOTH:
        if sdp is None:
            sdp = broadcast_sdp(ch, noise, p_s)
        w0, gamma = sdp.beamformer, sdp.gamma_star
    elif branch == CASE_U2_ONLY:
        w0, gamma = _matched_beam(ch.h_sat_u1, noise.sigma2_u1, p_s)
    else:
        w0, gamma = _matched_beam(ch.h_sat_u2, noise.sigma2_u2, p_s)
    snr1 = rates.received_snr(w0, ch.h_sat_u1, noise.sigma2_u1)
    snr2 = rates.received_snr(w0, ch.h_sat_u2, noise.sigma2_u2)
    cap = np.maximum(sr1, sr2)
    if gamma > 0:
        full = np.log2(1.0 + gamma)
        binds = t2 * full > cap
        scale = np.where(binds, (np.exp2(np.minimum(cap / t2, full)) - 1.0) / gamma, 1.0)
    else:
        scale = np.ones_like(t1)
    i1 = t2 * np.log2(1.0 + snr1 * scale)
    i2 = t2 * np.log2(1.0 + snr2 * scale)
    sr_fl = rates.fl_secrecy_xor(sr1, sr2, i1, i2)
    return np.minimum(sr1, sr_fl) + np.minimum(sr2, sr_fl)


def optimize_time_xor(ch: ChannelSet, noise: NoiseModel, p_s: float, search: SearchConfig = SearchConfig(),
                      *, p_users=DEFAULT_USER_POWERS, sdp: MaxMinSdpResult | None = None) -> XorSolution:
    """Best uplink time over the open grid {k/(m+1)}.

    The grid is screened in one vectorized pass and the winner is rebuilt by
    ``design_beamformer_xor``. The equal split t1 = 1/2 is always a candidate,
    so the result never falls below it.
    """
    grid = np.union1d(search.time_grid(), [0.5])
    if sdp is None and branch_of(*rl_secrecy_rates(ch, noise, 0.5, p_users)) == CASE_BOTH:
        sdp = broadcast_sdp(ch, noise, p_s)
    values = sum_secrecy_grid_xor(ch, noise, grid, p_s, p_users=p_users, sdp=sdp)
    t_best = float(grid[int(np.argmax(values))])
    equal = design_beamformer_xor(ch, noise, 0.5, 0.5, p_s, p_users=p_users, sdp=sdp)
    if t_best == 0.5:
        return equal
    best = design_beamformer_xor(ch, noise, t_best, 1.0 - t_best, p_s, p_users=p_users, sdp=sdp)
    return best if best.sum_secrecy > equal.sum_secrecy else equal
