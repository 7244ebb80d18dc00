"""Conventional two-slot exchange used as the reference scheme.

The gateway forwards each user's message in its own forward slot: ``w1``
(power beta*P_S) carries U1's message to U2 during ``t2`` while E2 listens,
and ``w2`` (power (1-beta)*P_S) carries U2's message to U1 during ``t3`` while
E1 listens. Eavesdropping of the other user's slot is neglected, so the
resulting sum secrecy is an upper bound.

For fixed beta each beamformer maximizes a generalized Rayleigh quotient,
the slot times then follow from a three-variable LP, and beta is found by
grid search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rates
from .channel_gen import ChannelSet
from .rates import NoiseModel, TimeAllocation
from .solvers import LpResult, gen_eig_max, hermitian_eig_max, rank_one_pencil_max, tiny_lp, tiny_lp_batch
from .xor_scheme import DEFAULT_USER_POWERS, SearchConfig, rl_secrecy_rates

EQUAL_TIMES = TimeAllocation(0.5, 0.25, 0.25)


@dataclass(frozen=True)
class ConvDesignIntermediates:
    """Pencil matrices and LP constants for one beta.

    ``lambda_w1`` is the top eigenvalue of (U2, E2), which governs ``w1``;
    ``lambda_w2`` that of (U1, E1), which governs ``w2``. ``c_const`` and
    ``d_const`` are the per-unit-time uplink secrecy rates (unclamped).
    """

    beta: float
    u1_mat: np.ndarray
    u2_mat: np.ndarray
    e1_mat: np.ndarray
    e2_mat: np.ndarray
    lambda_w1: float
    lambda_w2: float
    dir_w1: np.ndarray
    dir_w2: np.ndarray
    c_const: float
    d_const: float
    sigma_ratio_2: float  # sigma2_e2 / sigma2_u2
    sigma_ratio_1: float  # sigma2_e1 / sigma2_u1


@dataclass(frozen=True)
class ConvSolution:
    beta: float
    w1: np.ndarray
    w2: np.ndarray
    time: TimeAllocation
    u1: float
    u2: float
    sum_secrecy: float


def _outer(h):
    return np.outer(np.conj(h), h)


def uplink_secrecy_constants(ch: ChannelSet, noise: NoiseModel, p_users=DEFAULT_USER_POWERS):
    """(c, d): log2 of user-to-eavesdropper uplink SNR ratios, per unit time."""
    p1, p2 = p_users
    c = (rates.rl_capacity(p1, ch.h_u1_sat, noise.sigma2_sat, 1.0)
         - rates.eve_rl_capacity(p1, ch.h_u1_e1, noise.sigma2_e1, 1.0))
    d = (rates.rl_capacity(p2, ch.h_u2_sat, noise.sigma2_sat, 1.0)
         - rates.eve_rl_capacity(p2, ch.h_u2_e2, noise.sigma2_e2, 1.0))
    return c, d


def _pencils(ch: ChannelSet, noise: NoiseModel, betas, p_s: float):
    """Stacked (U1, E1, U2, E2) for an array of betas, shape (k, N, N)."""
    betas = np.asarray(betas, dtype=float)
    eye = np.eye(ch.n_feeds)
    p1 = ((1.0 - betas) * p_s)[:, None, None]
    p2 = (betas * p_s)[:, None, None]
    U1 = noise.sigma2_u1 / p1 * eye + _outer(ch.h_sat_u1)
    E1 = noise.sigma2_e1 / p1 * eye + _outer(ch.h_sat_e1)
    U2 = noise.sigma2_u2 / p2 * eye + _outer(ch.h_sat_u2)
    E2 = noise.sigma2_e2 / p2 * eye + _outer(ch.h_sat_e2)
    return U1, E1, U2, E2


def build_intermediates(ch: ChannelSet, noise: NoiseModel, beta: float, p_s: float,
                        p_users=DEFAULT_USER_POWERS) -> ConvDesignIntermediates:
    if not 0 < beta < 1:
        raise ValueError(f"beta must lie strictly between 0 and 1, got {beta}")
    U1, E1, U2, E2 = (m[0] for m in _pencils(ch, noise, [beta], p_s))
    lam1, v1 = gen_eig_max(U2, E2)
    lam2, v2 = gen_eig_max(U1, E1)
    c, d = uplink_secrecy_constants(ch, noise, p_users)
    return ConvDesignIntermediates(beta, U1, U2, E1, E2, float(lam1), float(lam2), v1, v2, c, d,
                                   noise.sigma2_e2 / noise.sigma2_u2, noise.sigma2_e1 / noise.sigma2_u1)


def design_beamformers_con(inter: ConvDesignIntermediates, beta: float, p_s: float):
    """Top generalized eigenvectors scaled to the full per-beam power."""
    w1 = math.sqrt(beta * p_s) * inter.dir_w1
    w2 = math.sqrt((1.0 - beta) * p_s) * inter.dir_w2
    return w1, w2


def lp_coefficients(inter: ConvDesignIntermediates):
    """(c, d, a, b) for ``tiny_lp``; negative log terms clamp to zero."""
    a = max(0.0, math.log2(inter.sigma_ratio_2 * inter.lambda_w1))
    b = max(0.0, math.log2(inter.sigma_ratio_1 * inter.lambda_w2))
    return max(0.0, inter.c_const), max(0.0, inter.d_const), a, b


def allocate_time_con(inter: ConvDesignIntermediates, noise: NoiseModel | None = None) -> LpResult:
    return tiny_lp(*lp_coefficients(inter))


def sum_secrecy_con(ch: ChannelSet, noise: NoiseModel, w1, w2, t1, t2, t3, p_users=DEFAULT_USER_POWERS):
    """Sum end-to-end secrecy from explicit beamformers and slot times.

    Broadcasts over leading axes of ``w1``/``w2`` and over array times.
    """
    sr1, sr2 = rl_secrecy_rates(ch, noise, t1, p_users)
    fl_to_u2 = rates.fl_secrecy_con(rates.fl_rate(w1, ch.h_sat_u2, noise.sigma2_u2, t2),
                                    rates.fl_rate(w1, ch.h_sat_e2, noise.sigma2_e2, t2))
    fl_to_u1 = rates.fl_secrecy_con(rates.fl_rate(w2, ch.h_sat_u1, noise.sigma2_u1, t3),
                                    rates.fl_rate(w2, ch.h_sat_e1, noise.sigma2_e1, t3))
    return rates.sum_secrecy_con(rates.end_to_end_con(sr1, fl_to_u2), rates.end_to_end_con(sr2, fl_to_u1))


def beam_stack(ch: ChannelSet, noise: NoiseModel, betas, p_s: float):
    """Beamformers and pencil eigenvalues over an array of betas.

    Each pencil is a scaled identity plus a rank-one term, so the closed-form
    2x2 reduction replaces a dense eigen-solve per beta. Returns
    (w1, w2, lambda_w1, lambda_w2).
    """
    betas = np.asarray(betas, dtype=float)
    if np.any((betas <= 0) | (betas >= 1)):
        raise ValueError("beta values must lie strictly between 0 and 1")
    p1, p2 = (1.0 - betas) * p_s, betas * p_s
    lam1, v1 = rank_one_pencil_max(noise.sigma2_u2 / p2, np.conj(ch.h_sat_u2),
                                   noise.sigma2_e2 / p2, np.conj(ch.h_sat_e2))
    lam2, v2 = rank_one_pencil_max(noise.sigma2_u1 / p1, np.conj(ch.h_sat_u1),
                                   noise.sigma2_e1 / p1, np.conj(ch.h_sat_e1))
    w1 = np.sqrt(p2)[:, None] * v1
    w2 = np.sqrt(p1)[:, None] * v2
    return w1, w2, lam1, lam2


def optimize_beta(ch: ChannelSet, noise: NoiseModel, p_s: float, search: SearchConfig = SearchConfig(), *,
                  p_users=DEFAULT_USER_POWERS, times: TimeAllocation | None = None,
                  beams=None) -> ConvSolution:
    """Grid search over beta.

    With ``times=None`` the slot times come from the LP at every beta (the
    equal split stays a candidate so the result never falls below it);
    otherwise ``times`` is held fixed. ``beams`` may carry a precomputed
    ``beam_stack`` over ``search.beta_grid()``.
    """
    betas = search.beta_grid()
    w1, w2, lam1, lam2 = beam_stack(ch, noise, betas, p_s) if beams is None else beams
    c, d = uplink_secrecy_constants(ch, noise, p_users)
    c, d = max(0.0, c), max(0.0, d)
    if times is None:
        fixed = EQUAL_TIMES
    else:
        fixed = times
    t = np.tile([fixed.t1, fixed.t2, fixed.t3], (len(betas), 1))
    base = sum_secrecy_con(ch, noise, w1, w2, t[:, 0], t[:, 1], t[:, 2], p_users)
    values = base
    if times is None:
        ra = noise.sigma2_e2 / noise.sigma2_u2
        rb = noise.sigma2_e1 / noise.sigma2_u1
        with np.errstate(divide="ignore"):
            a = np.maximum(0.0, np.log2(ra * lam1))
            b = np.maximum(0.0, np.log2(rb * lam2))
        lp_t = np.stack(tiny_lp_batch(c, d, a, b)[:3], axis=-1)
        lp_vals = sum_secrecy_con(ch, noise, w1, w2, lp_t[:, 0], lp_t[:, 1], lp_t[:, 2], p_users)
        use_lp = lp_vals > base
        values = np.where(use_lp, lp_vals, base)
        t = np.where(use_lp[:, None], lp_t, t)
    k = int(np.argmax(values))
    t1, t2, t3 = (float(x) for x in t[k])
    v1 = rates.fl_secrecy_con(rates.fl_rate(w1[k], ch.h_sat_u2, noise.sigma2_u2, t2),
                              rates.fl_rate(w1[k], ch.h_sat_e2, noise.sigma2_e2, t2))
    v2 = rates.fl_secrecy_con(rates.fl_rate(w2[k], ch.h_sat_u1, noise.sigma2_u1, t3),
                              rates.fl_rate(w2[k], ch.h_sat_e1, noise.sigma2_e1, t3))
    u1 = min(t1 * c, v1)
    u2 = min(t1 * d, v2)
    return ConvSolution(float(betas[k]), w1[k], w2[k], _times(t1, t2, t3), u1, u2, float(values[k]))


def _times(t1, t2, t3) -> TimeAllocation:
    # LP vertices may land exactly on the simplex boundary; renormalize rounding
    s = t1 + t2 + t3
    if abs(s - 1.0) <= 1e-12:
        return TimeAllocation(t1, t2, t3)
    return TimeAllocation(t1 / s, t2 / s, t3 / s)


def fl_positive_secrecy_possible(h_u, h_e, sigma2_u: float, sigma2_e: float) -> bool:
    """Whether some beam gives the user a higher SNR than the eavesdropper."""
    M = _outer(h_u) / sigma2_u - _outer(h_e) / sigma2_e
    lam, _ = hermitian_eig_max(M)
    return lam > 1e-12 * (np.sum(np.abs(h_u) ** 2) / sigma2_u)


def scaled_fl_secrecy(alpha, w, h_u, h_e, sigma2_u: float, sigma2_e: float, t: float):
    """Forward secrecy term with the beam scaled by ``alpha`` (unclamped):
    t*log2[(s_e/s_u) * (s_u + a^2 |h_u^T w|^2) / (s_e + a^2 |h_e^T w|^2)]."""
    alpha = np.asarray(alpha, dtype=float)
    gu = abs(np.dot(h_u, w)) ** 2
    ge = abs(np.dot(h_e, w)) ** 2
    return t * np.log2((sigma2_e / sigma2_u) * (sigma2_u + alpha**2 * gu) / (sigma2_e + alpha**2 * ge))


def theorem1_monotonicity_check(ch: ChannelSet, noise: NoiseModel, beta: float, p_s: float,
                                alpha_grid=None, times: TimeAllocation = EQUAL_TIMES) -> bool | None:
    """Check that scaling a below-budget beam up toward full power never
    lowers its forward secrecy term.

    The optimal beams at ``beta`` are shrunk by the largest alpha and the
    secrecy term is evaluated along ``alpha_grid`` (default 50 points on
    [1, 2]). Links where no beam can favor the user over the eavesdropper are
    skipped; returns None when both links are skipped.
    """
    if alpha_grid is None:
        alpha_grid = np.linspace(1.0, 2.0, 50)
    alpha_grid = np.asarray(alpha_grid, dtype=float)
    inter = build_intermediates(ch, noise, beta, p_s)
    w1, w2 = design_beamformers_con(inter, beta, p_s)
    amax = float(np.max(alpha_grid))
    links = ((w1, ch.h_sat_u2, ch.h_sat_e2, noise.sigma2_u2, noise.sigma2_e2, times.t2),
             (w2, ch.h_sat_u1, ch.h_sat_e1, noise.sigma2_u1, noise.sigma2_e1, times.t3))
    checked = False
    for w, hu, he, su, se, t in links:
        if not fl_positive_secrecy_possible(hu, he, su, se):
            continue
        checked = True
        f = scaled_fl_secrecy(alpha_grid, w / amax, hu, he, su, se, t)
        if np.any(np.diff(f) < -1e-12 * max(1.0, float(np.max(np.abs(f))))):
            return False
    return True if checked else None
