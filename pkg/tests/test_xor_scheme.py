import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from satsec.channel_gen import ChannelSet, draw_scenario, trial_rng
from satsec.rates import NoiseModel
from satsec.solvers import min_snr
from satsec.xor_scheme import (ALL_BLOCKED, CASE_BOTH, CASE_U1_ONLY, CASE_U2_ONLY, SearchConfig, branch_of,
                               broadcast_sdp, design_beamformer_xor, optimize_time_xor, rl_cap_power_scaling,
                               sum_secrecy_grid_xor)

UNIT_NOISE = NoiseModel(1.0, 1.0, 1.0, 1.0, 1.0)


def orthogonal_set(rl_gain=1e6, eve_gain=1e-6, n=3):
    e0, e1 = np.eye(n, dtype=complex)[0], np.eye(n, dtype=complex)[1]
    up = math.sqrt(rl_gain) * np.ones(n) / math.sqrt(n)
    return ChannelSet(up, up, e0, e1, e0 * 1e-3, e1 * 1e-3, math.sqrt(eve_gain), math.sqrt(eve_gain))


def test_branches():
    assert branch_of(1, 1) == CASE_BOTH
    assert branch_of(0, 1) == CASE_U2_ONLY
    assert branch_of(1, 0) == CASE_U1_ONLY
    assert branch_of(0, 0) == ALL_BLOCKED


def test_orthogonal_users_forward_rate():
    sol = design_beamformer_xor(orthogonal_set(), UNIT_NOISE, 0.5, 0.5, 4.0)
    assert sol.branch == CASE_BOTH
    assert sol.gamma_star == pytest.approx(2.0)
    assert sol.u_star == pytest.approx(0.5 * math.log2(3))
    assert sol.sum_secrecy == pytest.approx(2 * 0.5 * math.log2(3))
    assert sol.fl_rates == pytest.approx((0.5 * math.log2(3),) * 2)


def test_all_blocked_gives_zero():
    ch = orthogonal_set(rl_gain=1.0, eve_gain=100.0)
    sol = design_beamformer_xor(ch, UNIT_NOISE, 0.5, 0.5, 4.0)
    assert sol.branch == ALL_BLOCKED
    assert sol.sum_secrecy == 0.0
    assert not np.any(sol.beamformer)


def test_uplink_cap_binds():
    # per-unit-time uplink secrecy of 0.2 bits, so 0.1 bits at t1 = 0.5
    g_u = 2 ** 1.2 - 1  # log2(1 + g_u) - log2(1 + 1) = 0.2
    n = 3
    up = math.sqrt(g_u) * np.eye(n)[0]
    base = orthogonal_set()
    ch = dataclasses.replace(base, h_u1_sat=up, h_u2_sat=up, h_u1_e1=1.0, h_u2_e2=1.0)
    sol = design_beamformer_xor(ch, UNIT_NOISE, 0.5, 0.5, 4.0)
    assert sol.rl_secrecy == pytest.approx((0.1, 0.1))
    assert sol.u_star == pytest.approx(0.1)
    assert np.vdot(sol.beamformer, sol.beamformer).real < 4.0
    assert sol.sum_secrecy == pytest.approx(0.2)


def test_single_secure_uplink_uses_matched_beam():
    base = orthogonal_set()
    ch = dataclasses.replace(base, h_u1_e1=1e6)  # U1's uplink is overheard
    sol = design_beamformer_xor(ch, UNIT_NOISE, 0.5, 0.5, 4.0)
    assert sol.branch == CASE_U2_ONLY
    # U2's message goes to U1 only: all power along U1's channel
    assert abs(sol.beamformer[0]) ** 2 == pytest.approx(4.0)
    assert sol.sum_secrecy == pytest.approx(0.5 * math.log2(5))


def test_power_scaling_rules():
    w = np.array([2.0, 0.0])
    np.testing.assert_array_equal(rl_cap_power_scaling(w, 4.0, 10.0, 0.5), w)
    scaled = rl_cap_power_scaling(w, 4.0, 0.5, 0.5)  # cap 0.5 at t2 0.5 means gamma_cap = 1
    assert np.vdot(scaled, scaled).real == pytest.approx(np.vdot(w, w).real / 4)
    with pytest.raises(ValueError):
        rl_cap_power_scaling(w, 4.0, -1.0, 0.5)


def test_post_scaling_snr_hits_cap(channels, noise, p_s):
    for ch in channels:
        sdp = broadcast_sdp(ch, noise, p_s)
        w = rl_cap_power_scaling(sdp.beamformer, sdp.gamma_star, 0.3, 0.5)
        A = np.outer(np.conj(ch.h_sat_u1), ch.h_sat_u1)
        B = np.outer(np.conj(ch.h_sat_u2), ch.h_sat_u2)
        assert min_snr(w, A, B, noise.sigma2_u1, noise.sigma2_u2) == pytest.approx(2 ** 0.6 - 1, rel=1e-9)


def test_time_split_validation(channels, noise, p_s):
    with pytest.raises(ValueError):
        design_beamformer_xor(channels[0], noise, 0.5, 0.4, p_s)
    with pytest.raises(ValueError):
        design_beamformer_xor(channels[0], noise, 0.0, 1.0, p_s)


def test_search_grid_is_open_interval():
    g = SearchConfig(time_bins=100).time_grid()
    assert g[0] == pytest.approx(1 / 101) and g[-1] == pytest.approx(100 / 101)
    with pytest.raises(ValueError):
        SearchConfig(time_bins=1)


def test_grid_screen_matches_scalar_design(channels, noise, p_s):
    t = SearchConfig(time_bins=25).time_grid()
    for ch in channels:
        fast = sum_secrecy_grid_xor(ch, noise, t, p_s)
        slow = [design_beamformer_xor(ch, noise, x, 1 - x, p_s).sum_secrecy for x in t]
        np.testing.assert_allclose(fast, slow, rtol=1e-9, atol=1e-12)


def _exhaustive_best_t1(ch, noise, p_s, p_users, bins=10_000):
    t = np.arange(1, bins) / bins
    vals = [design_beamformer_xor(ch, noise, x, 1 - x, p_s, p_users=p_users).sum_secrecy for x in t]
    return float(t[int(np.argmax(vals))])


def test_rl_limited_pushes_time_to_uplink(system, noise, p_s):
    ch = draw_scenario(trial_rng(3, 0), system)
    p_users = (1e-4, 1e-4)
    sol = optimize_time_xor(ch, noise, p_s, p_users=p_users)
    assert sol.time.t1 > 0.85
    assert sol.time.t1 == pytest.approx(_exhaustive_best_t1(ch, noise, p_s, p_users, 2000), abs=0.011)


def test_fl_limited_pushes_time_to_forward_link(system, noise):
    ch = draw_scenario(trial_rng(3, 0), system)
    p_s = 1e-3
    sol = optimize_time_xor(ch, noise, p_s)
    assert sol.time.t1 < 0.15
    assert sol.time.t1 == pytest.approx(_exhaustive_best_t1(ch, noise, p_s, (1.0, 1.0), 2000), abs=0.011)


@given(st.integers(0, 10_000))
def test_optimized_time_never_loses_to_equal_split(idx):
    from satsec.channel_gen import SystemConfig
    system = SystemConfig(n_feeds=3 + idx % 4)
    lb = system.link_budget
    ch = draw_scenario(trial_rng(11, idx), system)
    noise = lb.noise_model()
    search = SearchConfig(time_bins=20)
    ota = optimize_time_xor(ch, noise, lb.fl_power_w, search)
    eta = design_beamformer_xor(ch, noise, 0.5, 0.5, lb.fl_power_w)
    assert ota.sum_secrecy >= eta.sum_secrecy
    assert np.vdot(ota.beamformer, ota.beamformer).real <= lb.fl_power_w * (1 + 1e-9)
