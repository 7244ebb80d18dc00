"""Brute-force reference solutions used to validate the fast solvers.

These are deliberately naive: a dense (theta, phi) grid for the two-user
max-min beamformer, a dense and then zoomed grid for the slot-time LP, and
random sampling for Rayleigh quotients. They share no code with ``solvers``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def maxmin_grid(h1, h2, s1: float, s2: float, p_total: float, n_theta: int = 2000, n_phi: int = 2000):
    """Best min-SNR over full-power beams in span{conj(h1), conj(h2)}.

    Beams are ``sqrt(P) (cos t q1 + e^{i f} sin t q2)`` with an orthonormal
    basis (q1, q2) of the span, t in [0, pi/2] and f in [0, 2 pi). Received
    signals are ``h.T @ w``. Returns (best_min_snr, w_best).
    """
    h1 = np.asarray(h1, dtype=complex)
    h2 = np.asarray(h2, dtype=complex)
    basis, _ = np.linalg.qr(np.stack([np.conj(h1), np.conj(h2)], axis=1))
    q1, q2 = basis[:, 0], basis[:, 1]
    theta = np.linspace(0.0, np.pi / 2, n_theta)
    phi = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    c, s = np.cos(theta), np.sin(theta)
    terms = []
    for h, sig in ((h1, s1), (h2, s2)):
        a, b = h @ q1, h @ q2
        # |c a + e^{if} s b|^2 = c^2|a|^2 + s^2|b|^2 + 2cs|a b| cos(f + arg(b conj a))
        base = (c * c * abs(a) ** 2 + s * s * abs(b) ** 2) * (p_total / sig)
        amp = 2.0 * c * s * abs(a * b) * (p_total / sig)
        terms.append((base, amp, np.cos(phi + np.angle(b * np.conj(a)))))
    best_val, best_ij = -np.inf, (0, 0)
    rows = max(1, 65536 // n_phi)  # keep blocks cache-sized
    buf1 = np.empty((rows, n_phi))
    buf2 = np.empty((rows, n_phi))
    for r0 in range(0, n_theta, rows):
        r1 = min(r0 + rows, n_theta)
        m = r1 - r0
        (b1, a1, k1), (b2, a2, k2) = terms
        x = np.multiply.outer(a1[r0:r1], k1, out=buf1[:m])
        x += b1[r0:r1, None]
        y = np.multiply.outer(a2[r0:r1], k2, out=buf2[:m])
        y += b2[r0:r1, None]
        np.minimum(x, y, out=x)
        k = int(np.argmax(x))
        if x.flat[k] > best_val:
            best_val, best_ij = float(x.flat[k]), (r0 + k // n_phi, k % n_phi)
    i, j = best_ij
    w = np.sqrt(p_total) * (c[i] * q1 + np.exp(1j * phi[j]) * s[i] * q2)
    return best_val, w


_ROW_BLOCK = 64


def _lp_value(t1, t2, c, d, a, b):
    t3 = 1.0 - t1 - t2
    return np.minimum(t1 * c, t2 * a) + np.minimum(t1 * d, t3 * b)


def _zoom_window(grid, k):
    """Bracket [grid[k-1], grid[k+1]] (clamped) around the best point of a
    concave function sampled on ``grid`` along the last axis."""
    n = grid.shape[-1]
    lo = np.take_along_axis(grid, np.maximum(k - 1, 0)[..., None], -1)[..., 0]
    hi = np.take_along_axis(grid, np.minimum(k + 1, n - 1)[..., None], -1)[..., 0]
    return lo, hi


def _inner_max(t1, c, d, a, b, n: int, zoom_n: int, levels: int):
    """max over t2 in [0, 1 - t1] for each entry of ``t1``, by 1-D zooming.

    Works in sigma = t2 / (1 - t1). On the shared first grid both terms are
    outer products, which keeps the dense pass cheap.
    """
    t1_all = t1
    r = 1.0 - t1
    sig = np.linspace(0.0, 1.0, n)
    rest = 1.0 - sig
    m = len(t1)
    k, best = np.empty(m, dtype=int), np.empty(m)
    bs = min(m, _ROW_BLOCK)
    xbuf, ybuf = np.empty((bs, n)), np.empty((bs, n))
    for s in range(0, m, bs):  # cache-sized row blocks
        e = min(s + bs, m)
        x, y = xbuf[: e - s], ybuf[: e - s]
        np.multiply.outer(r[s:e] * a, sig, out=x)
        np.minimum(x, (t1[s:e] * c)[:, None], out=x)
        np.multiply.outer(r[s:e] * b, rest, out=y)
        np.minimum(y, (t1[s:e] * d)[:, None], out=y)
        x += y
        k[s:e] = np.argmax(x, axis=-1)
        best[s:e] = x[np.arange(e - s), k[s:e]]
    best_sig = sig[k]
    # a row's true maximum exceeds its grid maximum by at most slope * spacing;
    # rows that cannot reach the best grid value are left unrefined
    bound = r * max(a, b) / (n - 1)
    rows = np.flatnonzero(best + bound >= best.max())
    grid = np.broadcast_to(sig, (len(rows), n))
    k, t1, r = k[rows], t1[rows], r[rows]
    sub_best, sub_sig = best[rows], best_sig[rows]
    for _ in range(levels):
        lo, hi = _zoom_window(grid, k)
        grid = lo[:, None] + (hi - lo)[:, None] * np.linspace(0.0, 1.0, zoom_n)[None, :]
        val = _lp_value(t1[:, None], r[:, None] * grid, c, d, a, b)
        k = np.argmax(val, axis=-1)
        v = np.take_along_axis(val, k[:, None], -1)[:, 0]
        better = v >= sub_best
        sub_best = np.where(better, v, sub_best)
        sub_sig = np.where(better, np.take_along_axis(grid, k[:, None], -1)[:, 0], sub_sig)
    best[rows], best_sig[rows] = sub_best, sub_sig
    return best, (1.0 - t1_all) * best_sig


def lp_grid(c: float, d: float, a: float, b: float, n: int = 1000, zoom_n: int = 101, levels: int = 3):
    """Maximize min(t1 c, t2 a) + min(t1 d, t3 b) over the time simplex.

    Starts from an ``n x n`` grid over t1 and t2 / (1 - t1). For fixed t1
    the objective is concave in t2, and its row maximum is concave in t1,
    so each 1-D maximum lies within one grid step of the best grid point;
    ``levels`` rounds of ``zoom_n``-point grids on that bracket refine both
    coordinates. Returns (objective, t1, t2).
    """
    c, d, a, b = (max(0.0, float(x)) for x in (c, d, a, b))
    lo, hi = 0.0, 1.0
    best, bt1, bt2 = -np.inf, 0.0, 0.0
    for level in range(levels + 1):
        t1 = np.linspace(lo, hi, n if level == 0 else zoom_n)
        # zoomed rows start from a coarse inner grid; one extra level restores resolution
        if level == 0:
            vals, t2s = _inner_max(t1, c, d, a, b, n, zoom_n, levels)
        else:
            vals, t2s = _inner_max(t1, c, d, a, b, zoom_n, zoom_n, levels + 1)
        k = int(np.argmax(vals))
        if vals[k] >= best:
            best, bt1, bt2 = float(vals[k]), float(t1[k]), float(t2s[k])
        lo, hi = float(t1[max(k - 1, 0)]), float(t1[min(k + 1, len(t1) - 1)])
    return best, bt1, bt2


def _quad_forms(v, M):
    """Real parts of v_k^H M v_k for the rows v_k of ``v``."""
    mv = v @ M.T
    return np.sum(v.real * mv.real + v.imag * mv.imag, axis=1)


def random_directions(n_samples: int, dim: int, rng=None) -> np.ndarray:
    """Complex Gaussian sample vectors, one per row."""
    rng = np.random.default_rng(rng)
    return rng.standard_normal((n_samples, dim)) + 1j * rng.standard_normal((n_samples, dim))


def sampled_rayleigh_max(U, E=None, n_samples: int = 100_000, rng=None, samples=None) -> float:
    """Largest ``v^H U v / v^H E v`` over random complex vectors.

    ``samples`` may supply the vectors (rows) so several matrix pairs can be
    probed with the same draw; otherwise ``n_samples`` are drawn from ``rng``.
    """
    U = np.asarray(U, dtype=complex)
    if samples is None:
        samples = random_directions(n_samples, U.shape[0], rng)
    num = _quad_forms(samples, U)
    den = (_quad_forms(samples, np.asarray(E, dtype=complex)) if E is not None
           else np.sum(samples.real**2 + samples.imag**2, axis=1))
    return float(np.max(num / den))


@dataclass(frozen=True)
class OracleReport:
    """Worst discrepancies between the solvers and the brute-force oracles."""

    sdp_max_rel_gap: float  # (oracle - solver) / oracle; <= 0 means the solver is at least as good
    lp_max_abs_gap: float
    eig_max_excess: float  # (sampled - solver) / solver; <= 0 means no sample beat the solver
    eig_max_residual: float
    instances: dict

    SDP_TOL = 1e-2
    LP_TOL = 1e-6
    EIG_RESIDUAL_TOL = 1e-8

    @property
    def passed(self) -> bool:
        return (self.sdp_max_rel_gap <= self.SDP_TOL and self.lp_max_abs_gap <= self.LP_TOL
                and self.eig_max_excess <= 0.0 and self.eig_max_residual <= self.EIG_RESIDUAL_TOL)


# ---- random instances and the full suite ----------------------------------

def random_sdp_instance(rng: np.random.Generator, n: int):
    """Two complex Gaussian channels with random noise levels and power."""
    h1 = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(rng.uniform(0.2, 5.0))
    h2 = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * np.sqrt(rng.uniform(0.2, 5.0))
    s1, s2 = rng.uniform(0.1, 2.0, 2)
    return h1, h2, float(s1), float(s2), float(rng.uniform(0.5, 10.0))


def random_lp_coefficients(rng: np.random.Generator):
    """(c, d, a, b) spanning several scales, with occasional zeros."""
    coef = rng.exponential(size=4) * rng.choice([0.1, 1.0, 10.0])
    coef[rng.random(4) < 0.1] = 0.0
    return tuple(float(x) for x in coef)


def random_pencil(rng: np.random.Generator, n: int):
    """(U, E): U PSD, E positive definite; half the draws use the
    identity-plus-rank-one form of the beamforming pencils."""
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    y = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if rng.random() < 0.5:
        u, e = x[:, 0], y[:, 0]
        return (rng.uniform(0.01, 1.0) * np.eye(n) + np.outer(u, np.conj(u)),
                rng.uniform(0.01, 1.0) * np.eye(n) + np.outer(e, np.conj(e)))
    return x @ np.conj(x.T), y @ np.conj(y.T) + 0.1 * np.eye(n)


def relative_residual(U, E, lam: float, v) -> float:
    r = U @ v - lam * (E @ v)
    scale = max(np.linalg.norm(U @ v), abs(lam) * np.linalg.norm(E @ v), 1e-300)
    return float(np.linalg.norm(r) / scale)


def run_oracle_suite(seed: int = 0, sdp_per_n: int = 200, feeds=(3, 4, 5, 6), lp_sets: int = 500,
                     eig_pairs: int = 500, n_samples: int = 100_000, grid: int = 2000) -> OracleReport:
    """Compare every fast solver against its brute-force oracle."""
    from .solvers import gen_eig_max, maxmin_sdp, min_snr, rank_one_extract, tiny_lp

    rng = np.random.default_rng(seed)
    sdp_gap = -np.inf
    for n in feeds:
        for _ in range(sdp_per_n):
            h1, h2, s1, s2, p = random_sdp_instance(rng, n)
            A, B = np.outer(np.conj(h1), h1), np.outer(np.conj(h2), h2)
            res = maxmin_sdp(A, B, s1, s2, p)
            w = rank_one_extract(res, A, B, p)
            ref, _ = maxmin_grid(h1, h2, s1, s2, p, grid, grid)
            sdp_gap = max(sdp_gap, (ref - min_snr(w, A, B, s1, s2)) / ref)

    lp_gap = 0.0
    for _ in range(lp_sets):
        coef = random_lp_coefficients(rng)
        lp_gap = max(lp_gap, abs(lp_grid(*coef)[0] - tiny_lp(*coef).objective))

    samples = {}
    eig_excess, eig_res = -np.inf, 0.0
    for _ in range(eig_pairs):
        n = int(rng.integers(2, 7))
        if n not in samples:
            samples[n] = random_directions(n_samples, n, rng)
        U, E = random_pencil(rng, n)
        lam, v = gen_eig_max(U, E)
        eig_excess = max(eig_excess, (sampled_rayleigh_max(U, E, samples=samples[n]) - lam) / lam)
        eig_res = max(eig_res, relative_residual(U, E, lam, v))

    counts = {"sdp": sdp_per_n * len(feeds), "lp": lp_sets, "eig": eig_pairs}
    return OracleReport(float(sdp_gap), float(lp_gap), float(eig_excess), float(eig_res), counts)
