import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from satsec.solvers import (NotPositiveDefiniteError, cholesky, gen_eig_max, hermitian_eig_max, maxmin_beamformer,
                            maxmin_sdp, min_snr, purify_rank, rank_one_extract, rank_one_pencil_max, tiny_lp,
                            tiny_lp_batch)
from satsec.oracles import lp_grid, maxmin_grid, sampled_rayleigh_max

from .conftest import cn


def e(i, n=3):
    v = np.zeros(n, dtype=complex)
    v[i] = 1.0
    return v


# ---- Cholesky and eigenproblems -------------------------------------------

def test_cholesky_anchors(rng):
    np.testing.assert_allclose(cholesky(np.eye(3)), np.eye(3))
    np.testing.assert_allclose(cholesky(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    X = cn(rng, 5, 5)
    E = X @ X.conj().T + np.eye(5)
    L = cholesky(E)
    assert np.linalg.norm(L @ L.conj().T - E) / np.linalg.norm(E) < 1e-10
    assert np.allclose(L, np.tril(L))


def test_cholesky_rejects():
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(np.diag([1.0, 0.0]))
    with pytest.raises(NotPositiveDefiniteError):
        cholesky(np.diag([1.0, -1.0]))
    with pytest.raises(ValueError):
        cholesky(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_hermitian_eig_max_anchors():
    lam, v = hermitian_eig_max(np.diag([1.0, 5.0, 2.0]))
    assert lam == pytest.approx(5.0)
    assert abs(abs(v[1]) - 1) < 1e-12
    h = np.array([1.0, 2j, -1.0])
    lam, v = hermitian_eig_max(np.outer(h, h.conj()))
    assert lam == pytest.approx(np.linalg.norm(h) ** 2)
    assert abs(np.vdot(v, h)) == pytest.approx(np.linalg.norm(h))


def test_hermitian_eig_max_beats_samples(rng):
    X = cn(rng, 4, 4)
    M = X + X.conj().T
    lam, _ = hermitian_eig_max(M)
    assert lam >= sampled_rayleigh_max(M, rng=1)


def test_gen_eig_anchors():
    lam, v = gen_eig_max(np.eye(3) + np.outer(e(0), e(0)), np.eye(3))
    assert lam == pytest.approx(2.0)
    assert abs(v[0]) == pytest.approx(1.0)
    lam, _ = gen_eig_max(2 * np.eye(3), 2 * np.eye(3))
    assert lam == pytest.approx(1.0)


def test_gen_eig_residual_and_sampling(rng):
    X, Y = cn(rng, 4, 4), cn(rng, 4, 4)
    U, E = X @ X.conj().T, Y @ Y.conj().T + 0.1 * np.eye(4)
    lam, v = gen_eig_max(U, E)
    assert np.linalg.norm(U @ v - lam * E @ v) <= 1e-8 * np.linalg.norm(U @ v)
    assert lam >= sampled_rayleigh_max(U, E, rng=2)


def test_gen_eig_batched_matches_loop(rng):
    U = np.stack([np.eye(3) + np.outer(h, h.conj()) for h in cn(rng, 6, 3)])
    E = np.stack([2 * np.eye(3) + np.outer(h, h.conj()) for h in cn(rng, 6, 3)])
    lam, V = gen_eig_max(U, E)
    for k in range(6):
        lk, vk = gen_eig_max(U[k], E[k])
        assert lam[k] == pytest.approx(lk, rel=1e-12)
        assert abs(np.vdot(V[k], vk)) == pytest.approx(1.0, rel=1e-9)


@given(st.integers(2, 8), st.integers(0, 2**31))
def test_rank_one_pencil_matches_dense(n, seed):
    rng = np.random.default_rng(seed)
    u, ev = cn(rng, n), cn(rng, n)
    alpha, delta = rng.uniform(0.01, 5, 4), rng.uniform(0.01, 5, 4)
    lam, v = rank_one_pencil_max(alpha, u, delta, ev)
    U = alpha[:, None, None] * np.eye(n) + np.outer(u, u.conj())
    E = delta[:, None, None] * np.eye(n) + np.outer(ev, ev.conj())
    ref, _ = gen_eig_max(U, E)
    np.testing.assert_allclose(lam, ref, rtol=1e-9)
    res = np.einsum("kij,kj->ki", U, v) - lam[:, None] * np.einsum("kij,kj->ki", E, v)
    assert np.max(np.linalg.norm(res, axis=1) / lam) < 1e-8


def test_rank_one_pencil_parallel_vectors_fall_back():
    u = np.array([1.0, 1j, 0.0])
    lam, _ = rank_one_pencil_max([1.0], u, [1.0], 2 * u)
    ref, _ = gen_eig_max(np.eye(3) + np.outer(u, u.conj()), np.eye(3) + 4 * np.outer(u, u.conj()))
    assert lam[0] == pytest.approx(ref)


# ---- max-min beamforming --------------------------------------------------

def test_sdp_single_channel_takes_all_power():
    A = np.outer(e(0), e(0))
    r = maxmin_sdp(A, A, 1.0, 1.0, 4.0)
    assert r.gamma_star == pytest.approx(4.0)
    np.testing.assert_allclose(r.gram, 4 * A, atol=1e-12)


def test_sdp_orthogonal_channels():
    A, B = np.outer(e(0), e(0)), np.outer(e(1), e(1))
    r = maxmin_sdp(A, B, 1.0, 1.0, 4.0)
    assert r.gamma_star == pytest.approx(2.0)
    grid, _ = maxmin_grid(e(0), e(1), 1.0, 1.0, 4.0)
    assert grid == pytest.approx(2.0, rel=1e-3)  # pi/4 falls between grid points
    assert grid <= 2.0
    w = rank_one_extract(r, A, B, 4.0)
    assert abs(w[0]) ** 2 == pytest.approx(2.0)
    assert abs(w[1]) ** 2 == pytest.approx(2.0)


@given(st.integers(3, 6), st.integers(0, 2**31))
def test_sdp_matches_grid_oracle(n, seed):
    rng = np.random.default_rng(seed)
    h1, h2 = cn(rng, n), cn(rng, n)
    s1, s2 = rng.uniform(0.2, 2, 2)
    A, B = np.outer(h1.conj(), h1), np.outer(h2.conj(), h2)
    r = maxmin_sdp(A, B, s1, s2, 3.0)
    w = rank_one_extract(r, A, B, 3.0)
    ref, _ = maxmin_grid(h1, h2, s1, s2, 3.0, 400, 400)
    got = min_snr(w, A, B, s1, s2)
    assert got >= ref * (1 - 1e-9)
    assert got == pytest.approx(r.gamma_star, rel=1e-9)
    assert np.vdot(w, w).real == pytest.approx(3.0)


def test_maxmin_beamformer_degenerate_inputs():
    g = np.array([1.0, 0.0, 0.0], dtype=complex)
    w, gamma = maxmin_beamformer(g, np.zeros(3, dtype=complex), 1.0, 1.0, 2.0)
    assert gamma == 0.0
    w, gamma = maxmin_beamformer(g, 3 * g, 1.0, 1.0, 2.0)  # parallel channels
    assert gamma == pytest.approx(2.0)


def test_sdp_rejects_bad_input():
    with pytest.raises(ValueError):
        maxmin_sdp(np.eye(3), np.outer(e(0), e(0)), 1, 1, 1)
    with pytest.raises(ValueError):
        maxmin_sdp(np.outer(e(0), e(0)), np.outer(e(1), e(1)), 1, 1, 0.0)


def test_rank_one_extract_from_higher_rank_gram():
    A, B = np.outer(e(0), e(0)), np.outer(e(1), e(1))
    r = maxmin_sdp(A, B, 1.0, 1.0, 4.0)
    from dataclasses import replace
    full = replace(r, gram=np.diag([2.0, 2.0, 0.0]).astype(complex))
    w = rank_one_extract(full, A, B, 4.0)
    assert min_snr(w, A, B, 1.0, 1.0) == pytest.approx(2.0, rel=1e-9)
    assert np.vdot(w, w).real == pytest.approx(4.0)


def test_purify_rank_keeps_constraints(rng):
    G = cn(rng, 4, 3)
    W = G @ G.conj().T
    mats = [np.outer(h.conj(), h) for h in cn(rng, 2, 4)] + [np.eye(4)]
    Wp = purify_rank(W, mats)
    for M in mats:
        assert np.trace(Wp @ M).real == pytest.approx(np.trace(W @ M).real, rel=1e-8)
    vals = np.linalg.eigvalsh(Wp)
    assert vals.min() > -1e-9 * vals.max()
    assert np.sum(vals > 1e-8 * vals.max()) <= 1


# ---- time-allocation LP ---------------------------------------------------

def test_tiny_lp_symmetric_anchor():
    r = tiny_lp(2, 2, 4, 4)
    assert (r.t1, r.t2, r.t3, r.u1, r.u2, r.objective) == pytest.approx((0.5, 0.25, 0.25, 1, 1, 2))
    assert lp_grid(2, 2, 4, 4)[0] == pytest.approx(2.0, abs=1e-9)


def test_tiny_lp_dead_uplink():
    r = tiny_lp(0, 2, 4, 4)
    assert r.u1 == 0
    assert r.t2 == 0
    assert r.u2 == pytest.approx(4 / 3)
    assert r.t1 + r.t3 == pytest.approx(1.0)


def test_tiny_lp_nothing_deliverable():
    r = tiny_lp(0, 0, 1, 1)
    assert (r.t1, r.t2, r.t3, r.objective) == (0.5, 0.25, 0.25, 0.0)


def test_tiny_lp_rejects_non_finite():
    with pytest.raises(ValueError):
        tiny_lp(float("nan"), 1, 1, 1)


coef = st.floats(0.0, 20.0)


@given(coef, coef, coef, coef, st.floats(0.01, 100))
def test_tiny_lp_homogeneous(c, d, a, b, k):
    assert tiny_lp(k * c, k * d, k * a, k * b).objective == pytest.approx(
        k * tiny_lp(c, d, a, b).objective, rel=1e-9, abs=1e-12)


@given(coef, coef, coef, coef)
def test_tiny_lp_feasible_and_matches_oracle(c, d, a, b):
    r = tiny_lp(c, d, a, b)
    assert min(r.t1, r.t2, r.t3) >= 0
    assert r.t1 + r.t2 + r.t3 == pytest.approx(1.0)
    assert r.u1 <= r.t1 * c + 1e-12 and r.u1 <= r.t2 * a + 1e-12
    assert r.u2 <= r.t1 * d + 1e-12 and r.u2 <= r.t3 * b + 1e-12
    assert r.objective == pytest.approx(lp_grid(c, d, a, b)[0], abs=1e-6)


@given(st.lists(st.tuples(coef, coef, coef, coef), min_size=1, max_size=20))
def test_tiny_lp_batch_matches_scalar(rows):
    arr = np.array(rows)
    t1, t2, t3, obj = tiny_lp_batch(*arr.T)
    for k, row in enumerate(rows):
        r = tiny_lp(*row)
        assert (t1[k], t2[k], t3[k], obj[k]) == pytest.approx((r.t1, r.t2, r.t3, r.objective), abs=1e-12)
