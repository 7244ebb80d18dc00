"""Dense numerical kernels: Cholesky, Hermitian and generalized eigenproblems,
the two-user max-min beamforming SDP with rank-one extraction, and the small
time-allocation LP.

Matrix kernels accept stacks of matrices along leading axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    pass


class RankReductionError(RuntimeError):
    pass


def _as_hermitian(M, name="matrix", rtol=1e-12) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    MH = np.conj(np.swapaxes(M, -1, -2))
    scale = np.max(np.abs(M), axis=(-2, -1), keepdims=True)
    if np.any(np.abs(M - MH) > rtol * np.maximum(scale, 1e-300)):
        raise ValueError(f"{name} is not Hermitian")
    return 0.5 * (M + MH)


def cholesky(E, rtol: float = 1e-12) -> np.ndarray:
    """Lower-triangular L with E = L L^H.

    Raises NotPositiveDefiniteError if a pivot falls below ``rtol`` times the
    largest diagonal entry; no regularization is applied.
    """
    E = _as_hermitian(E, "E")
    try:
        L = np.linalg.cholesky(E)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc
    piv2 = np.abs(np.diagonal(L, axis1=-2, axis2=-1)) ** 2
    dmax = np.max(np.abs(np.diagonal(E, axis1=-2, axis2=-1)), axis=-1, keepdims=True)
    if np.any(~np.isfinite(piv2)) or np.any(piv2 <= rtol * dmax):
        raise NotPositiveDefiniteError("matrix is numerically singular (tiny Cholesky pivot)")
    return L


def hermitian_eig_max(M):
    """Largest eigenvalue and a unit eigenvector of a Hermitian matrix."""
    M = _as_hermitian(M, "M")
    vals, vecs = np.linalg.eigh(M)
    lam = vals[..., -1]
    return (float(lam) if lam.ndim == 0 else lam), vecs[..., :, -1]


def gen_eig_max(U, E):
    """Largest eigenvalue of the pencil (U, E) with E positive definite.

    Whitens with the Cholesky factor of E, C = L^-1 U L^-H, takes the top
    eigenpair (lam, y) of C and maps back v = L^-H y, so U v = lam E v.
    The returned ``v`` has unit norm.
    """
    U = _as_hermitian(U, "U")
    L = cholesky(E)
    X = np.linalg.solve(L, U)
    C = np.conj(np.swapaxes(np.linalg.solve(L, np.conj(np.swapaxes(X, -1, -2))), -1, -2))
    lam, y = hermitian_eig_max(0.5 * (C + np.conj(np.swapaxes(C, -1, -2))))
    v = np.linalg.solve(np.conj(np.swapaxes(L, -1, -2)), y[..., None])[..., 0]
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return lam, v


# ---------------------------------------------------------------------------
# max-min SDP


@dataclass(frozen=True)
class MaxMinSdpResult:
    gamma_star: float
    gram: np.ndarray
    beamformer: np.ndarray
    power_used: float
    sigma2: tuple[float, float]


def _rank_one_factor(A, name):
    """Vector g with A = g g^H for a PSD rank-one A."""
    lam, v = hermitian_eig_max(A)
    lam = float(lam)
    if lam <= 0:
        return np.zeros(A.shape[0], dtype=complex)
    rest = np.linalg.eigvalsh(A)[:-1]
    if rest.size and np.max(np.abs(rest)) > 1e-8 * lam:
        raise ValueError(f"{name} must be rank one")
    return math.sqrt(lam) * v


def min_snr(w, A, B, sigma2_1, sigma2_2) -> float:
    w = np.asarray(w)
    s1 = np.real(np.conj(w) @ A @ w) / sigma2_1
    s2 = np.real(np.conj(w) @ B @ w) / sigma2_2
    return float(min(s1, s2))


def maxmin_beamformer(g1, g2, sigma2_1: float, sigma2_2: float, p_total: float):
    """Unit-power direction maximizing min(|g1^H w|^2/s1, |g2^H w|^2/s2).

    Any component of w outside span{g1, g2} wastes power, so the search is
    over the 2-D span. In an orthonormal basis (e1 along g1) the normalized
    gains read p = (n1, 0), q = (r, b2) and, after aligning the phase of the
    second coordinate, w = (cos t, sin t e^{j phi}) gives
        |p^H w| = n1 cos t,     |q^H w| = n2 cos(t - psi),
    with psi = atan2(b2, |r|). On [0, psi] the first is decreasing and the
    second increasing, so the optimum is an endpoint (matched beam to one
    user) or the crossing point.

    Returns (w, gamma) with ||w||^2 = p_total; ``gamma`` is the achieved min-SNR.
    """
    p = np.asarray(g1, dtype=complex) / math.sqrt(sigma2_1)
    q = np.asarray(g2, dtype=complex) / math.sqrt(sigma2_2)
    n1, n2 = np.linalg.norm(p), np.linalg.norm(q)
    if n1 == 0 and n2 == 0:
        return np.zeros_like(p), 0.0
    if n1 == 0 or n2 == 0:
        g = q if n1 == 0 else p
        w = math.sqrt(p_total) * g / np.linalg.norm(g)
        return w, 0.0
    e1 = p / n1
    r = np.vdot(e1, q)
    q_perp = q - r * e1
    b2 = np.linalg.norm(q_perp)
    if b2 <= 1e-12 * n2:
        # parallel channels: the span collapses to one dimension
        w = math.sqrt(p_total) * e1
    else:
        e2 = q_perp / b2
        rho = abs(r)
        align = np.conj(r) / rho if rho > 0 else 1.0
        psi = math.atan2(b2, rho)
        if rho >= n1:
            theta = 0.0
        elif n1 * math.cos(psi) >= n2:
            theta = psi
        else:
            theta = math.atan2(n1 - n2 * math.cos(psi), n2 * math.sin(psi))
        w = math.sqrt(p_total) * (math.cos(theta) * e1 + math.sin(theta) * align * e2)
    gamma = min(abs(np.vdot(p, w)) ** 2, abs(np.vdot(q, w)) ** 2)
    return w, float(gamma)


def maxmin_sdp(A, B, sigma2_1: float, sigma2_2: float, p_total: float) -> MaxMinSdpResult:
    """Solve max_{W >= 0, tr W <= P} min(tr(WA)/s1, tr(WB)/s2) for rank-one A, B.

    The problem is reduced to the span of the two channel factors, where the
    optimum is attained by a rank-one Gram matrix in closed form (see
    ``maxmin_beamformer``).
    """
    if not p_total > 0:
        raise ValueError("p_total must be positive")
    A = _as_hermitian(A, "A")
    B = _as_hermitian(B, "B")
    g1 = _rank_one_factor(A, "A")
    g2 = _rank_one_factor(B, "B")
    w, gamma = maxmin_beamformer(g1, g2, sigma2_1, sigma2_2, p_total)
    if gamma == 0.0 and not np.any(g1) and not np.any(g2):
        w = np.zeros_like(g1)
    gram = np.outer(w, np.conj(w))
    return MaxMinSdpResult(gamma, gram, w, float(np.real(np.trace(gram))), (sigma2_1, sigma2_2))


def _hermitian_basis(r: int) -> list[np.ndarray]:
    basis = []
    for i in range(r):
        E = np.zeros((r, r), dtype=complex)
        E[i, i] = 1.0
        basis.append(E)
    for i in range(r):
        for j in range(i + 1, r):
            E = np.zeros((r, r), dtype=complex)
            E[i, j] = E[j, i] = 1.0
            basis.append(E)
            E = np.zeros((r, r), dtype=complex)
            E[i, j], E[j, i] = 1j, -1j
            basis.append(E)
    return basis


def purify_rank(W, constraints, rank_tol: float = 1e-8, max_iter: int = 64) -> np.ndarray:
    """Reduce a PSD matrix to rank one keeping tr(W C_k) fixed for each C_k.

    With W = V V^H of rank r, any Hermitian r x r Delta orthogonal to all
    V^H C_k V leaves the constraint traces unchanged along
    W(t) = V (I - t Delta) V^H; stepping to t = 1/lambda_max(Delta) zeroes
    one eigenvalue. Needs r^2 > len(constraints) for a nonzero Delta.
    """
    W = _as_hermitian(W, "W", rtol=1e-9)
    for _ in range(max_iter):
        vals, vecs = np.linalg.eigh(W)
        tr = float(np.sum(np.clip(vals, 0, None)))
        keep = vals > rank_tol * max(tr, 1e-300)
        r = int(np.sum(keep))
        if r <= 1:
            return W
        if r * r <= len(constraints):
            raise RankReductionError(f"rank {r} cannot be reduced with {len(constraints)} constraints")
        V = vecs[:, keep] * np.sqrt(vals[keep])
        basis = _hermitian_basis(r)
        Ms = [np.conj(V.T) @ C @ V for C in constraints]
        lin = np.array([[np.real(np.trace(M @ E)) for E in basis] for M in Ms])
        _, s, vh = np.linalg.svd(lin)
        coeffs = vh[-1]
        Delta = sum(c * E for c, E in zip(coeffs, basis))
        ev = np.linalg.eigvalsh(Delta)
        lam = ev[-1] if abs(ev[-1]) >= abs(ev[0]) else ev[0]
        if lam == 0:
            raise RankReductionError("degenerate reduction direction")
        W = V @ (np.eye(r) - Delta / lam) @ np.conj(V.T)
        W = 0.5 * (W + np.conj(W.T))
    raise RankReductionError(f"rank reduction did not converge in {max_iter} iterations")


def rank_one_extract(result: MaxMinSdpResult, A, B, p_total: float) -> np.ndarray:
    """Beamformer w with w w^H achieving the SDP value; power equals tr(gram)."""
    W = np.asarray(result.gram, dtype=complex)
    tr = float(np.real(np.trace(W)))
    if tr <= 0:
        return np.zeros(W.shape[0], dtype=complex)
    vals = np.linalg.eigvalsh(_as_hermitian(W, "gram", rtol=1e-9))
    if vals[-2] >= 1e-8 * tr:
        W = purify_rank(W, [np.asarray(A), np.asarray(B), np.eye(W.shape[0])])
    lam, v = hermitian_eig_max(W)
    w = math.sqrt(max(float(lam), 0.0)) * v
    w = w * math.sqrt(tr) / np.linalg.norm(w)
    s1, s2 = result.sigma2
    got = min_snr(w, A, B, s1, s2)
    if np.real(np.vdot(w, w)) > p_total * (1 + 1e-9) or got < result.gamma_star * (1 - 1e-5):
        raise RankReductionError(
            f"extracted beamformer lost optimality: min-SNR {got:.6g} vs {result.gamma_star:.6g}, "
            f"power {np.real(np.vdot(w, w)):.6g} vs {p_total:.6g}")
    return w


# ---------------------------------------------------------------------------
# time-allocation LP


@dataclass(frozen=True)
class LpResult:
    t1: float
    t2: float
    t3: float
    u1: float
    u2: float
    objective: float


def _inner_value(t1, c, d, a, b):
    """Best split of the forward time 1 - t1 between the two slots for a given
    uplink time, filling the slot with the larger per-time rate first.

    Returns (t2, t3, u1, u2).
    """
    s = 1.0 - t1
    x1, x2 = t1 * c, t1 * d
    need1 = x1 / a if a > 0 else 0.0
    need2 = x2 / b if b > 0 else 0.0
    if a >= b:
        t2 = min(s, need1)
        t3 = min(s - t2, need2)
    else:
        t3 = min(s, need2)
        t2 = min(s - t3, need1)
    slack = s - t2 - t3
    # spare forward time carries no rate; park it in an open slot
    if slack > 0:
        if need1 > 0 and need2 == 0:
            t2 += slack
        else:
            t3 += slack
    u1 = min(x1, t2 * a)
    u2 = min(x2, t3 * b)
    return t2, t3, u1, u2


def tiny_lp(c: float, d: float, a: float, b: float) -> LpResult:
    """Maximize u1 + u2 subject to u1 <= t1 c, u1 <= t2 a, u2 <= t1 d,
    u2 <= t3 b, u >= 0 and t on the unit simplex.

    For fixed t1 the inner optimum is the greedy split above, so the value
    is concave piecewise linear in t1 with kinks only where a slot becomes
    exactly saturated: t1 = 1/(1 + c/a + d/b), a/(a + c), b/(b + d). The
    maximum is at one of those or at an endpoint. Negative coefficients are
    clamped to zero.
    """
    vals = [float(x) for x in (c, d, a, b)]
    if not all(math.isfinite(x) for x in vals):
        raise ValueError(f"LP coefficients must be finite, got {vals}")
    c, d, a, b = (max(0.0, x) for x in vals)
    if (c == 0 or a == 0) and (d == 0 or b == 0):
        return LpResult(0.5, 0.25, 0.25, 0.0, 0.0, 0.0)
    cands = [0.0, 1.0]
    if a > 0 and b > 0:
        cands.append(1.0 / (1.0 + c / a + d / b))
    if a > 0:
        cands.append(a / (a + c))
    if b > 0:
        cands.append(b / (b + d))
    best = None
    for t1 in cands:
        t2, t3, u1, u2 = _inner_value(t1, c, d, a, b)
        obj = u1 + u2
        if best is None or obj > best.objective:
            best = LpResult(t1, t2, t3, u1, u2, obj)
    return best


def tiny_lp_batch(c, d, a, b):
    """Vectorized ``tiny_lp`` over broadcast coefficient arrays.

    Evaluates the same candidates in the same order, so ties resolve as in
    the scalar routine. Returns (t1, t2, t3, objective) arrays.
    """
    c, d, a, b = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (c, d, a, b)))
    if not all(np.all(np.isfinite(x)) for x in (c, d, a, b)):
        raise ValueError("LP coefficients must be finite")
    c, d, a, b = (np.maximum(0.0, x)[..., None] for x in (c, d, a, b))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        k1 = np.where((a > 0) & (b > 0), 1.0 / (1.0 + c / a + d / b), np.nan)
        k2 = np.where(a > 0, a / (a + c), np.nan)
        k3 = np.where(b > 0, b / (b + d), np.nan)
        t1 = np.concatenate(np.broadcast_arrays(0.0 * a, 1.0 + 0.0 * a, k1, k2, k3), axis=-1)
        valid = ~np.isnan(t1)
        t1 = np.where(valid, t1, 0.0)
        s = 1.0 - t1
        x1, x2 = t1 * c, t1 * d
        need1 = np.where(a > 0, x1 / a, 0.0)
        need2 = np.where(b > 0, x2 / b, 0.0)
    first_a = a >= b
    t2a = np.minimum(s, need1)
    t3a = np.minimum(s - t2a, need2)
    t3b = np.minimum(s, need2)
    t2b = np.minimum(s - t3b, need1)
    t2 = np.where(first_a, t2a, t2b)
    t3 = np.where(first_a, t3a, t3b)
    slack = s - t2 - t3
    to_t2 = (slack > 0) & (need1 > 0) & (need2 == 0)
    to_t3 = (slack > 0) & ~to_t2
    t2 = np.where(to_t2, t2 + slack, t2)
    t3 = np.where(to_t3, t3 + slack, t3)
    obj = np.minimum(x1, t2 * a) + np.minimum(x2, t3 * b)
    obj = np.where(valid, obj, -np.inf)
    k = np.argmax(obj, axis=-1)[..., None]
    pick = [np.take_along_axis(x, k, axis=-1)[..., 0] for x in (t1, t2, t3, obj)]
    blocked = ((c == 0) | (a == 0)) & ((d == 0) | (b == 0))
    blocked = blocked[..., 0]
    eq = (0.5, 0.25, 0.25, 0.0)
    return tuple(np.where(blocked, e, x) for x, e in zip(pick, eq))


def rank_one_pencil_max(alpha, u, delta, e):
    """Top generalized eigenpair of (alpha I + u u^H, delta I + e e^H).

    Vectorized over arrays ``alpha`` and ``delta`` with fixed ``u``, ``e``.
    Off span{u, e} both matrices are scaled identities, whose quotient
    alpha/delta never beats the best vector inside the span, so the problem
    is a 2x2 pencil solved by its characteristic quadratic. Falls back to
    ``gen_eig_max`` when the span is one-dimensional.

    Returns (lam, v) with unit-norm ``v`` of shape (k, N).
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    delta = np.atleast_1d(np.asarray(delta, dtype=float))
    u = np.asarray(u, dtype=complex)
    e = np.asarray(e, dtype=complex)
    n = u.shape[0]
    nu, ne = np.linalg.norm(u), np.linalg.norm(e)
    q1 = u / nu if nu > 0 else e / ne
    e_perp = e - np.vdot(q1, e) * q1
    if nu == 0 or ne == 0 or np.linalg.norm(e_perp) <= 1e-10 * max(ne, 1e-300):
        eye = np.eye(n)
        U = alpha[:, None, None] * eye + np.outer(u, np.conj(u))
        E = delta[:, None, None] * eye + np.outer(e, np.conj(e))
        return gen_eig_max(U, E)
    q2 = e_perp / np.linalg.norm(e_perp)
    Q = np.stack([q1, q2], axis=1)
    uq = np.conj(Q.T) @ u
    eq = np.conj(Q.T) @ e
    Uu = np.outer(uq, np.conj(uq))
    Ee = np.outer(eq, np.conj(eq))
    # det(U - lam E) = A lam^2 - B lam + C for 2x2 Hermitian U, E
    u11 = alpha + Uu[0, 0].real
    u22 = alpha + Uu[1, 1].real
    u12 = Uu[0, 1]
    e11 = delta + Ee[0, 0].real
    e22 = delta + Ee[1, 1].real
    e12 = Ee[0, 1]
    qa = e11 * e22 - abs(e12) ** 2
    qb = u11 * e22 + u22 * e11 - 2.0 * np.real(u12 * np.conj(e12))
    qc = u11 * u22 - abs(u12) ** 2
    disc = np.sqrt(np.maximum(qb * qb - 4.0 * qa * qc, 0.0))
    lam = (qb + disc) / (2.0 * qa)
    m11 = u11 - lam * e11
    m12 = u12 - lam * e12
    m22 = u22 - lam * e22
    # null vector of [[m11, m12], [conj(m12), m22]]; use the better-conditioned row
    x_a = np.stack([-m12, m11.astype(complex)], axis=-1)
    x_b = np.stack([m22.astype(complex), -np.conj(m12)], axis=-1)
    pick_a = np.linalg.norm(x_a, axis=-1) >= np.linalg.norm(x_b, axis=-1)
    x = np.where(pick_a[:, None], x_a, x_b)
    v = x @ Q.T
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    return lam, v
