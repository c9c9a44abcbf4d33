"""Poisson Lie group structures on ``AN`` and ``K`` and their ``s``-family.

Bivectors are antisymmetric matrices ``P`` over a fixed frame obtained by
right translation: at ``b`` the frame of ``T_b(AN)`` is ``v_i b`` for the
basis ``v_i`` of ``a + n`` from :func:`thompson_lie.group_geometry.an_algebra_basis`,
and at ``k`` the frame of ``T_k K`` is ``x_i k`` for :func:`k_basis`.  A
bivector acts on covectors by ``pi^#(alpha) = P @ alpha``, so
``pi(u, w) = u^T P w`` for covector components ``u`` and ``w``.

``k`` and ``a + n`` are paired by the imaginary part of the Killing form
``2n tr(xy)``.  Derivatives of group maps are central finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularGaugeError, UsageError
from .group_geometry import (
    E_inverse,
    E_map,
    an_algebra_basis,
    an_coordinates,
    dagger,
    dressing,
    expm_skew,
    expm_upper,
    hermitian_part,
    killing,
)

FD_STEP = 1e-5


# ---------------------------------------------------------------------------
# frames and pairing
# ---------------------------------------------------------------------------
def pairing(x, y):
    """``<x, y> = Im(2n tr(xy))``."""
    return np.imag(killing(np.asarray(x), np.asarray(y)))


def k_basis(n):
    """Real basis of ``su(n)``: ``i h_j``, ``X_ij = E_ij - E_ji``, ``Y_ij = i(E_ij + E_ji)``."""
    out = [1j * h for h in an_algebra_basis(n)[: n - 1]]
    for i in range(n):
        for j in range(i + 1, n):
            x = np.zeros((n, n), dtype=np.complex128)
            x[i, j], x[j, i] = 1, -1
            y = np.zeros((n, n), dtype=np.complex128)
            y[i, j] = y[j, i] = 1j
            out += [x, y]
    return out


def p_basis(n):
    """Real basis of ``p`` (Hermitian traceless): ``i`` times :func:`k_basis`."""
    return [-1j * x for x in k_basis(n)]


def _coords(mats, basis):
    """Least-squares coordinates of matrices over a real basis."""
    B = np.array([np.concatenate([b.real.ravel(), b.imag.ravel()]) for b in basis]).T
    M = np.asarray(mats)
    flat = np.concatenate([M.real.reshape(M.shape[:-2] + (-1,)), M.imag.reshape(M.shape[:-2] + (-1,))], axis=-1)
    sol, *_ = np.linalg.lstsq(B, flat.reshape(-1, flat.shape[-1]).T, rcond=None)
    return sol.T.reshape(M.shape[:-2] + (len(basis),))


def k_coordinates(x):
    n = np.asarray(x).shape[-1]
    return _coords(x, k_basis(n))


def p_coordinates(x):
    n = np.asarray(x).shape[-1]
    return _coords(x, p_basis(n))


def pairing_matrix(n):
    """``C[i, k] = <v_i, x_k>`` for the ``a + n`` frame ``v_i`` and the ``k`` basis ``x_k``."""
    V, X = an_algebra_basis(n), k_basis(n)
    return np.array([[pairing(v, x) for x in X] for v in V])


def iwasawa_split(Y):
    """``Y = Y_k + Y_an`` with ``Y_k`` in ``su(n)`` and ``Y_an`` in ``a + n``."""
    Y = np.asarray(Y, dtype=np.complex128)
    L = np.tril(Y, -1)
    d = np.diagonal(Y)
    Yk = L - dagger(L) + np.diag(1j * d.imag)
    return Yk, Y - Yk


def _antisym(P):
    return 0.5 * (P - P.T)


@dataclass(frozen=True)
class BivectorAtPoint:
    """Antisymmetric matrix over the right-translated frame at ``point``."""

    point: np.ndarray
    matrix: np.ndarray
    frame: str = "right"

    def __post_init__(self):
        object.__setattr__(self, "matrix", _antisym(np.asarray(self.matrix, dtype=float)))

    def sharp(self, alpha):
        return self.matrix @ alpha

    def rank(self, tol=1e-8):
        s = np.linalg.svd(self.matrix, compute_uv=False)
        return int(np.sum(s > tol * max(1.0, s[0] if s.size else 1.0)))


# ---------------------------------------------------------------------------
# tangent vectors and pushforwards
# ---------------------------------------------------------------------------
def right_coords_an(V, b):
    """Frame coordinates of a tangent vector ``V`` (a matrix) at ``b``."""
    return an_coordinates(V @ np.linalg.inv(b))


def dressing_vector(x, b, h=FD_STEP):
    """``x_AN(b) = d/dt p(exp(tx) b)`` in frame coordinates."""
    plus = dressing(expm_skew(h * x), b)
    minus = dressing(expm_skew(-h * x), b)
    return right_coords_an((plus - minus) / (2 * h), b)


def dressing_vector_exact(x, b):
    """Closed form ``Ad_b (Ad_{b^{-1}} x)_{an}`` of :func:`dressing_vector`."""
    binv = np.linalg.inv(b)
    _, an = iwasawa_split(binv @ x @ b)
    return an_coordinates(b @ an @ binv)


def pushforward_an(F, b, h=FD_STEP):
    """Jacobian of ``F: AN -> AN`` at ``b`` between right frames."""
    n = b.shape[0]
    Fb = F(b)
    cols = []
    for v in an_algebra_basis(n):
        plus = F(expm_upper(h * v) @ b)
        minus = F(expm_upper(-h * v) @ b)
        cols.append(right_coords_an((plus - minus) / (2 * h), Fb))
    return np.array(cols).T


def ad_matrix_an(b):
    """``Ad_b`` on ``a + n`` in the frame basis."""
    n = b.shape[0]
    binv = np.linalg.inv(b)
    return np.array([an_coordinates(b @ v @ binv) for v in an_algebra_basis(n)]).T


# ---------------------------------------------------------------------------
# pi_AN and pi_K
# ---------------------------------------------------------------------------
def pi_AN_at(b, h=FD_STEP, exact=False):
    """``pi_AN`` at ``b``, solved from ``pi^#(x-bar) = x_AN`` for ``x`` in ``k``.

    The right-invariant form ``x-bar`` has constant frame components
    ``<v_i, x>``, so the relation is a linear system for the matrix.
    """
    b = np.asarray(b, dtype=np.complex128)
    n = b.shape[0]
    C = pairing_matrix(n)
    vec = dressing_vector_exact if exact else (lambda x, bb: dressing_vector(x, bb, h))
    W = np.array([vec(x, b) for x in k_basis(n)]).T
    return BivectorAtPoint(b, W @ np.linalg.inv(C))


def lambda0(n):
    """``Lambda_0 = 1/2 sum X_a ^ Y_a`` with Killing-normalized root vectors, in the ``k`` basis."""
    m = n * n - 1
    L = np.zeros((m, m))
    c = 1.0 / (4 * n)
    idx = n - 1
    for i in range(n):
        for j in range(i + 1, n):
            L[idx, idx + 1] = c
            L[idx + 1, idx] = -c
            idx += 2
    return L


def ad_matrix_k(k):
    """``Ad_k`` on ``su(n)`` in the :func:`k_basis` coordinates."""
    n = k.shape[0]
    return k_coordinates(np.array([k @ x @ dagger(k) for x in k_basis(n)])).T


def pi_K_at(k):
    """``pi_K = Lambda_0^r - Lambda_0^l`` in the right frame: ``Lambda_0 - Ad_k Lambda_0``."""
    k = np.asarray(k, dtype=np.complex128)
    L = lambda0(k.shape[0])
    A = ad_matrix_k(k)
    return BivectorAtPoint(k, L - A @ L @ A.T)


def pushforward_k(F, k, h=FD_STEP):
    """Jacobian of ``F: K -> K`` at ``k`` between right frames."""
    n = k.shape[0]
    Fk = F(k)
    cols = []
    for x in k_basis(n):
        d = (F(expm_skew(h * x) @ k) - F(expm_skew(-h * x) @ k)) / (2 * h)
        cols.append(k_coordinates(d @ dagger(Fk)))
    return np.array(cols).T


# ---------------------------------------------------------------------------
# gauge transformations
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class GaugeForm:
    """Closed 2-form at a point: ``gamma(u, w) = u^T G w`` over the frame."""

    point: np.ndarray
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _antisym(np.asarray(self.matrix, dtype=float)))


def gauge_transform(pi, gamma, tol=1e-10):
    """``(pi')^# = pi^# (1 + gamma^# pi^#)^{-1}``.

    Raises
    ------
    SingularGaugeError
        If ``1 + gamma^# pi^#`` is numerically singular.
    """
    P, G = pi.matrix, gamma.matrix
    if not np.any(G):
        return BivectorAtPoint(pi.point, P.copy(), pi.frame)
    M = np.eye(len(P)) + G @ P
    s = np.linalg.svd(M, compute_uv=False)
    if s[-1] <= tol * s[0]:
        raise SingularGaugeError("1 + gamma# pi# is not invertible", smallest_singular_value=float(s[-1]))
    return BivectorAtPoint(pi.point, P @ np.linalg.inv(M), pi.frame)


def image_residual(P1, P2, tol=1e-8):
    """Rank difference and containment residual between the images of two bivectors."""
    def basis(P):
        U, s, _ = np.linalg.svd(P)
        return U[:, s > tol * max(1.0, s[0])]

    B1, B2 = basis(P1), basis(P2)
    res = max(np.linalg.norm(B1 - B2 @ (B2.T @ B1)), np.linalg.norm(B2 - B1 @ (B1.T @ B2)))
    return B1.shape[1] - B2.shape[1], float(res)


# ---------------------------------------------------------------------------
# global chart on AN
# ---------------------------------------------------------------------------
def chart(b):
    """Global coordinates: ``log b_ii`` (``i < n``) and real/imaginary parts of ``b_ij`` (``i < j``)."""
    b = np.asarray(b)
    n = b.shape[0]
    iu = np.triu_indices(n, 1)
    up = b[iu]
    return np.concatenate([np.log(np.real(np.diagonal(b))[: n - 1]),
                           np.stack([up.real, up.imag], axis=-1).ravel()])


def from_chart(c, n):
    c = np.asarray(c, dtype=float)
    d = np.exp(c[: n - 1])
    b = np.zeros((n, n), dtype=np.complex128)
    b[np.arange(n - 1), np.arange(n - 1)] = d
    b[n - 1, n - 1] = 1.0 / np.prod(d)
    iu = np.triu_indices(n, 1)
    pairs = c[n - 1:].reshape(-1, 2)
    b[iu] = pairs[:, 0] + 1j * pairs[:, 1]
    return b


def frame_to_chart(b):
    """Matrix sending frame coordinates at ``b`` to chart coordinates."""
    n = b.shape[0]
    cols = []
    for v in an_algebra_basis(n):
        V = v @ b
        iu = np.triu_indices(n, 1)
        up = V[iu]
        d = np.real(np.diagonal(V)[: n - 1] / np.diagonal(b)[: n - 1])
        cols.append(np.concatenate([d, np.stack([up.real, up.imag], axis=-1).ravel()]))
    return np.array(cols).T


def chart_bivector(field, c, n):
    b = from_chart(c, n)
    M = frame_to_chart(b)
    return M @ field(b).matrix @ M.T


def schouten_residual(field, b, h=1e-4):
    """Max entry of ``[pi, pi]`` at ``b`` in the global chart (finite differences).

    ``field`` maps a point to a :class:`BivectorAtPoint`.
    """
    n = b.shape[0]
    c0 = chart(b)
    m = len(c0)
    P = chart_bivector(field, c0, n)
    dP = np.empty((m, m, m))
    for d in range(m):
        e = np.zeros(m)
        e[d] = h
        dP[d] = (chart_bivector(field, c0 + e, n) - chart_bivector(field, c0 - e, n)) / (2 * h)
    # J^{abc} = sum_d P^{ad} d_d P^{bc} + cyclic
    J = np.einsum("ad,dbc->abc", P, dP)
    J = J + np.einsum("bd,dca->abc", P, dP) + np.einsum("cd,dab->abc", P, dP)
    return float(np.max(np.abs(J)))


def exact_two_form(eps, b, h=1e-5):
    """``d eps`` at ``b`` for a 1-form ``eps`` given in chart components, in frame components."""
    n = b.shape[0]
    c0 = chart(b)
    m = len(c0)
    D = np.empty((m, m))
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        D[i] = (np.asarray(eps(c0 + e)) - np.asarray(eps(c0 - e))) / (2 * h)
    G = D - D.T             # (d eps)_{ij} = d_i eps_j - d_j eps_i
    M = frame_to_chart(b)
    return GaugeForm(b, M.T @ G @ M)


# ---------------------------------------------------------------------------
# the s-family
# ---------------------------------------------------------------------------
def F_s(xi, s):
    return s * np.asarray(xi)


def I_s(b, s):
    """``I_s = E o F_s o E^{-1}``; ``s`` must be nonzero."""
    if s == 0:
        raise UsageError("I_s is defined for s != 0")
    return E_map(F_s(E_inverse(b), s))


def bullet_s(b1, b2, s):
    """``b1 ._s b2 = I_s^{-1}(I_s(b1) I_s(b2))``; ``s = 0`` is ``E(E^{-1} b1 + E^{-1} b2)``."""
    if s == 0:
        return E_map(hermitian_part(E_inverse(b1) + E_inverse(b2)))
    if s == 1:
        return np.asarray(b1) @ np.asarray(b2)
    return I_s(I_s(b1, s) @ I_s(b2, s), 1.0 / s)


def inverse_s(b, s):
    if s == 0:
        return E_map(-E_inverse(b))
    if s == 1:
        return np.linalg.inv(b)
    return I_s(np.linalg.inv(I_s(b, s)), 1.0 / s)


def m_s(bs, s):
    out = bs[0]
    for b in bs[1:]:
        out = bullet_s(out, b, s)
    return out


def nu_s(bs, s):
    out, acc = [], None
    for b in bs:
        acc = b if acc is None else bullet_s(acc, b, s)
        out.append(acc)
    return out


def nu_s_inverse(cs, s):
    out, prev = [], None
    for c in cs:
        out.append(c if prev is None else bullet_s(inverse_s(prev, s), c, s))
        prev = c
    return out


def twisted_action_s(k, bs, s):
    """``T_{s,k} = nu_s^{-1} o delta_k o nu_s``."""
    return nu_s_inverse([dressing(k, c) for c in nu_s(bs, s)], s)


def lie_poisson_p(xi):
    """Linear Poisson structure on ``p = k^*`` at ``xi``, with ``pi^#(d l_x) = [x, xi]``.

    Returned over the :func:`p_basis` frame.
    """
    xi = np.asarray(xi, dtype=np.complex128)
    n = xi.shape[0]
    K, Pb = k_basis(n), p_basis(n)
    C = np.array([[pairing(x, p) for x in K] for p in Pb])
    W = p_coordinates(np.array([x @ xi - xi @ x for x in K])).T
    return _antisym(W @ np.linalg.inv(C))


def pushforward_E(xi, h=FD_STEP):
    """Jacobian of ``E`` at ``xi`` from the ``p`` basis to the right frame of ``AN``."""
    xi = np.asarray(xi, dtype=np.complex128)
    b = E_map(xi)
    cols = [right_coords_an((E_map(xi + h * p) - E_map(xi - h * p)) / (2 * h), b)
            for p in p_basis(xi.shape[0])]
    return np.array(cols).T


def pi_AN_s_at(b, s, h=FD_STEP):
    """``pi_{AN,s}(b) = s (I_s^{-1})_* pi_AN(I_s(b))``; ``s = 0`` is the ``E``-image of the linear structure."""
    b = np.asarray(b, dtype=np.complex128)
    if s == 0:
        xi = E_inverse(b)
        J = pushforward_E(xi, h)
        return BivectorAtPoint(b, J @ lie_poisson_p(xi) @ J.T)
    if s == 1:
        return pi_AN_at(b, h)
    c = I_s(b, s)
    J = pushforward_an(lambda x: I_s(x, 1.0 / s), c, h)
    return BivectorAtPoint(b, s * J @ pi_AN_at(c, h).matrix @ J.T)


# ---------------------------------------------------------------------------
# property residuals
# ---------------------------------------------------------------------------
def multiplicativity_residual(b1, b2):
    """``|pi(b1 b2) - Ad_{b1} pi(b2) Ad_{b1}^T - pi(b1)|``."""
    A = ad_matrix_an(b1)
    lhs = pi_AN_at(b1 @ b2).matrix
    rhs = A @ pi_AN_at(b2).matrix @ A.T + pi_AN_at(b1).matrix
    return float(np.max(np.abs(lhs - rhs)))


def anti_poisson_residual(tau_d, b):
    """``|(tau_d)_* pi_AN(b) + pi_AN(tau_d(b))|``."""
    J = pushforward_an(tau_d, b)
    return float(np.max(np.abs(J @ pi_AN_at(b).matrix @ J.T + pi_AN_at(tau_d(b)).matrix)))


def anti_poisson_residual_k(tau_d, k):
    J = pushforward_k(tau_d, k)
    return float(np.max(np.abs(J @ pi_K_at(k).matrix @ J.T + pi_K_at(tau_d(k)).matrix)))


def orbit_conormals(b, h=FD_STEP):
    """Differentials of the spectrum of ``E^{-1}`` at ``b`` (rows), in frame components.

    The dressing orbit through ``b`` is a level set of this spectrum, so
    these covectors annihilate its tangent space.
    """
    n = b.shape[0]
    cols = []
    for v in an_algebra_basis(n):
        plus = np.linalg.eigvalsh(E_inverse(expm_upper(h * v) @ b))
        minus = np.linalg.eigvalsh(E_inverse(expm_upper(-h * v) @ b))
        cols.append((plus - minus) / (2 * h))
    return np.array(cols).T


def leaf_tangency(b, tol=1e-6):
    """Rank of ``pi_AN(b)``, the orbit dimension for distinct spectrum, and the containment residual."""
    n = b.shape[0]
    P = pi_AN_at(b).matrix
    N = orbit_conormals(b)
    rank = BivectorAtPoint(b, P).rank()
    expected = n * n - 1 - np.linalg.matrix_rank(N, tol=tol)
    return rank, int(expected), float(np.max(np.abs(N @ P)))


def scaling_residual(b, s, h=FD_STEP):
    """``|(I_s)_* pi_{AN,s}(b) - s pi_AN(I_s(b))|``."""
    J = pushforward_an(lambda x: I_s(x, s), b, h)
    lhs = J @ pi_AN_s_at(b, s, h).matrix @ J.T
    return float(np.max(np.abs(lhs - s * pi_AN_at(I_s(b, s), h).matrix)))


__all__ = [
    "BivectorAtPoint", "GaugeForm", "pairing", "k_basis", "p_basis", "pairing_matrix",
    "iwasawa_split", "dressing_vector", "dressing_vector_exact", "pushforward_an",
    "pushforward_k", "ad_matrix_an", "ad_matrix_k", "pi_AN_at", "lambda0", "pi_K_at",
    "gauge_transform", "image_residual", "chart", "from_chart", "frame_to_chart",
    "schouten_residual", "exact_two_form", "F_s", "I_s", "bullet_s", "inverse_s", "m_s",
    "nu_s", "nu_s_inverse", "twisted_action_s", "lie_poisson_p", "pushforward_E",
    "pi_AN_s_at", "multiplicativity_residual", "anti_poisson_residual",
    "anti_poisson_residual_k", "orbit_conormals", "leaf_tangency", "scaling_residual",
    "poisson_suite",
]


# ---------------------------------------------------------------------------
# sampled property suite
# ---------------------------------------------------------------------------
def _random_exact_form(rng, m):
    """A 1-form with polynomial chart components; its differential is a closed 2-form."""
    A = rng.standard_normal((m, m)) * 0.3
    B = rng.standard_normal((m, m, m)) * 0.1
    return lambda c: A @ c + np.einsum("ijk,j,k->i", B, c, c)


def poisson_suite(n=2, samples=200, seed=0, jacobi_every=1, s_values=(0.25, 0.5, 2.0), tau_ds=()):
    """Max residual of each Poisson identity over seeded random points of ``AN``.

    ``tau_ds`` are the quasi-split involutions ``g -> tau_d(g)`` to test
    for the anti-Poisson property.
    """
    from .checks import Check, worst
    from .group_geometry import random_an, random_unitary, random_hermitian

    rng = np.random.default_rng(seed)
    out = []
    for i in range(samples):
        b1, b2 = random_an(rng, n), random_an(rng, n)
        out.append(Check("multiplicativity", multiplicativity_residual(b1, b2), 1e-6))
        for tau_d in tau_ds:
            out.append(Check("tau_d_anti_poisson", anti_poisson_residual(tau_d, b1), 1e-6))
        xi = E_inverse(b1)
        ev = np.linalg.eigvalsh(xi)
        if np.min(np.diff(ev)) > 1e-3:
            rank, expected, contain = leaf_tangency(b1)
            out.append(Check("leaf_rank_equality", abs(rank - expected), 0))
            out.append(Check("leaf_containment", contain, 1e-6))
        if i % jacobi_every == 0:
            out.append(Check("jacobi_schouten", schouten_residual(pi_AN_at, b1), 1e-4))
        pi = pi_AN_at(b1)
        same = gauge_transform(pi, GaugeForm(b1, np.zeros_like(pi.matrix)))
        out.append(Check("gauge_zero_identity", float(np.max(np.abs(same.matrix - pi.matrix))), 0.0))
        gamma = exact_two_form(_random_exact_form(rng, len(pi.matrix)), b1)
        try:
            moved = gauge_transform(pi, gamma)
            dr, res = image_residual(pi.matrix, moved.matrix)
            out.append(Check("gauge_leaf_preservation", max(abs(dr), res), 1e-6))
        except SingularGaugeError:
            pass
        for s in s_values:
            out.append(Check("scaling_consistency", scaling_residual(b1, s), 1e-6))
        k = random_unitary(rng, n)
        bs = [random_an(rng, n) for _ in range(3)]
        t0 = twisted_action_s(k, bs, 0.0)
        out.append(Check("twisted_s0_is_diagonal",
                         max(float(np.max(np.abs(x - dressing(k, y)))) for x, y in zip(t0, bs)), 1e-9))
        lhs = E_inverse(m_s(bs, 0.0))
        rhs = sum(E_inverse(b) for b in bs)
        out.append(Check("moment_composition_s0", float(np.max(np.abs(lhs - rhs))), 1e-9))
    return worst(out)
