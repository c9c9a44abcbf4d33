"""Matrix realizations: G = SL(n, C), K = SU(n), AN = upper triangular.

Conventions
-----------
* ``AN`` is the group of upper triangular matrices with positive diagonal and
  determinant one, and every ``g`` factors uniquely as ``g = b k`` with
  ``b`` in ``AN`` and ``k`` in ``K`` (the ``(AN)K`` ordering).
* ``p`` (Hermitian traceless matrices) is identified with ``AN`` through
  ``E(xi) = p(exp(xi))``, whose inverse is ``E^{-1}(b) = log(b b^*) / 2``.
* A real form is an anti-holomorphic involution ``tau = Ad(w0dot) tau_d``
  where ``tau_d`` preserves ``AN``.  The catalog stores ``tau_d`` as
  ``g -> A f(g) A^{-1}`` with ``f`` either entrywise conjugation or
  ``g -> (g^*)^{-1}``, and ``w0dot`` as a monomial unitary matrix.

All functions accept stacks of matrices with shape ``(..., n, n)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import ConfigurationError, NumericalError, UsageError

COND_LIMIT = 1e12
HERMITIAN_TOL = 1e-12
RENORMALIZE_AFTER = 8
_UNITS = (1.0 + 0j, -1.0 + 0j, 1j, -1j)


# ---------------------------------------------------------------------------
# small matrix helpers
# ---------------------------------------------------------------------------
def dagger(g):
    return np.conj(np.swapaxes(g, -1, -2))


def _flip(g):
    return g[..., ::-1, ::-1]


def hermitian_part(x):
    return 0.5 * (x + dagger(x))


def _check_hermitian(x, what):
    x = np.asarray(x, dtype=np.complex128)
    scale = max(1.0, float(np.max(np.abs(x), initial=0.0)))
    err = float(np.max(np.abs(x - dagger(x)), initial=0.0))
    if err > 1e-8 * scale:
        raise UsageError(f"{what} is not Hermitian (asymmetry {err:.3g})")
    return hermitian_part(x)


def expm_hermitian(x):
    """``exp`` of a Hermitian matrix (stack) via ``eigh``."""
    w, V = np.linalg.eigh(hermitian_part(np.asarray(x, dtype=np.complex128)))
    return (V * np.exp(w)[..., None, :]) @ dagger(V)


def logm_positive(m):
    """Principal ``log`` of a Hermitian positive definite matrix (stack)."""
    w, V = np.linalg.eigh(hermitian_part(np.asarray(m, dtype=np.complex128)))
    if np.any(w <= 0):
        raise UsageError("log of a matrix that is not positive definite",)
    return (V * np.log(w)[..., None, :]) @ dagger(V)


def expm_skew(x):
    """``exp`` of an anti-Hermitian matrix (stack); the result is unitary."""
    w, V = np.linalg.eigh(hermitian_part(-1j * np.asarray(x, dtype=np.complex128)))
    return (V * np.exp(1j * w)[..., None, :]) @ dagger(V)


def renormalize(g):
    """Scale ``g`` by ``det(g)^{-1/n}`` so that the determinant is one again."""
    g = np.asarray(g, dtype=np.complex128)
    n = g.shape[-1]
    d = np.linalg.det(g)
    return g * (d ** (-1.0 / n))[..., None, None]


def killing(x, y):
    """Killing form ``2n tr(xy)`` of ``sl(n, C)``."""
    n = x.shape[-1]
    return 2 * n * np.einsum("...ij,...ji->...", x, y)


# ---------------------------------------------------------------------------
# Iwasawa factorization G = (AN) K
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class IwasawaFactors:
    """``g = b @ k`` with ``b`` in ``AN`` and ``k`` in ``SU(n)``."""

    b: np.ndarray
    k: np.ndarray

    def residual(self, g):
        return float(np.max(np.abs(self.b @ self.k - g)))

    def unitarity_residual(self):
        n = self.k.shape[-1]
        return float(np.max(np.abs(dagger(self.k) @ self.k - np.eye(n))))


def _condition_guard(g):
    c = np.linalg.cond(g)
    worst = float(np.max(c))
    if not np.isfinite(worst) or worst > COND_LIMIT:
        raise NumericalError("matrix too ill-conditioned for the Iwasawa factorization",
                             condition=worst, limit=COND_LIMIT)


def iwasawa(g, check=True):
    """Factor ``g = b k``.

    A QR factorization of the flipped adjoint gives the same factors as the
    upper triangular square root of ``g g^*`` without squaring the condition
    number.

    Raises
    ------
    NumericalError
        If ``cond(g) > 1e12`` and ``check`` is set.
    """
    g = np.asarray(g, dtype=np.complex128)
    if check:
        _condition_guard(g)
    Q, R = np.linalg.qr(_flip(dagger(g)))
    d = np.diagonal(R, axis1=-2, axis2=-1)
    phase = d / np.abs(d)
    Q = Q * phase[..., None, :]
    R = R * np.conj(phase)[..., :, None]
    # flip(g^*) = Q R  =>  g = flip(R)^* flip(Q)^*
    return IwasawaFactors(b=dagger(_flip(R)), k=dagger(_flip(Q)))


def an_project(g, check=True):
    """The projection ``p: b k -> b``."""
    return iwasawa(g, check).b


def k_project(g, check=True):
    """The projection ``q: b k -> k``."""
    return iwasawa(g, check).k


def upper_cholesky(m):
    """Upper triangular ``u`` with positive diagonal and ``u u^* = m``."""
    L = np.linalg.cholesky(_flip(hermitian_part(np.asarray(m, dtype=np.complex128))))
    return _flip(L)


def dressing(k, b, check=True):
    """Dressing action ``k . b = p(k b)``."""
    return an_project(np.asarray(k) @ np.asarray(b), check)


def right_dressing(k, b, check=True):
    """``k^b = q(k b)``, the action of ``AN`` on ``K``."""
    return k_project(np.asarray(k) @ np.asarray(b), check)


def E_map(xi):
    """``E: p -> AN``, ``E(xi) = p(exp xi)``; computed as the upper square root of ``exp(2 xi)``."""
    xi = _check_hermitian(xi, "xi")
    return upper_cholesky(expm_hermitian(2.0 * xi))


def E_inverse(b):
    """``E^{-1}(b) = log(b b^*) / 2``."""
    b = np.asarray(b, dtype=np.complex128)
    return 0.5 * logm_positive(b @ dagger(b))


def is_in_an(b, tol=1e-10):
    b = np.asarray(b)
    lower = np.tril(b, -1)
    d = np.diagonal(b, axis1=-2, axis2=-1)
    return bool(np.max(np.abs(lower), initial=0.0) <= tol
                and np.all(np.abs(d.imag) <= tol) and np.all(d.real > 0))


# ---------------------------------------------------------------------------
# products on (AN)^l
# ---------------------------------------------------------------------------
def nu(bs):
    """Partial products ``(b1, b1 b2, ..., b1 ... bl)``."""
    out, acc = [], None
    for j, b in enumerate(bs):
        acc = np.array(b, dtype=np.complex128) if acc is None else acc @ b
        if j + 1 > RENORMALIZE_AFTER:
            acc = renormalize(acc)
        out.append(acc)
    return out


def nu_inverse(cs):
    """Inverse of :func:`nu`: ``b_j = c_{j-1}^{-1} c_j``."""
    out, prev = [], None
    for c in cs:
        c = np.asarray(c, dtype=np.complex128)
        out.append(c if prev is None else np.linalg.solve(prev, c))
        prev = c
    return out


def diagonal_dressing(k, bs):
    return [dressing(k, b) for b in bs]


def twisted_action(k, bs):
    """``T_k = nu^{-1} o delta_k o nu`` on ``(AN)^l``."""
    return nu_inverse(diagonal_dressing(k, nu(bs)))


def twisted_action_sequential(k, bs):
    """``T_k`` through ``k_j . b_j`` with ``k_1 = k`` and ``k_j = k^{b_1 ... b_{j-1}}``."""
    out, kj = [], np.asarray(k, dtype=np.complex128)
    for b in bs:
        fac = iwasawa(kj @ b)
        out.append(fac.b)
        kj = fac.k
    return out


# ---------------------------------------------------------------------------
# catalog of real forms
# ---------------------------------------------------------------------------
def alternating_antidiagonal(n):
    """Antidiagonal matrix with entries ``(-1)^i``, realizing the diagram flip."""
    A = np.zeros((n, n), dtype=np.complex128)
    for i in range(n):
        A[i, n - 1 - i] = (-1) ** i
    return A


def _real_basis_sl(n):
    """Orthonormal (Frobenius) real basis of ``su(n)``."""
    basis = []
    for i in range(n - 1):
        h = np.zeros((n, n), dtype=np.complex128)
        h[: i + 1, : i + 1] = np.eye(i + 1)
        h[i + 1, i + 1] = -(i + 1)
        basis.append(1j * h / np.linalg.norm(h))
    for i in range(n):
        for j in range(i + 1, n):
            x = np.zeros((n, n), dtype=np.complex128)
            x[i, j], x[j, i] = 1, -1
            basis.append(x / np.sqrt(2))
            y = np.zeros((n, n), dtype=np.complex128)
            y[i, j] = y[j, i] = 1j
            basis.append(y / np.sqrt(2))
    return basis


def _orthonormal_span(mats, tol=1e-9):
    if not mats:
        return []
    n = mats[0].shape[0]
    V = np.array([np.concatenate([m.real.ravel(), m.imag.ravel()]) for m in mats]).T
    U, s, _ = np.linalg.svd(V, full_matrices=False)
    U = U[:, s > tol]
    out = []
    for col in U.T:
        m = (col[: n * n] + 1j * col[n * n:]).reshape(n, n)
        out.append(m)
    return out


@dataclass(frozen=True)
class GroupCatalogEntry:
    """A real form ``tau = Ad(w0dot) tau_d`` of ``SL(n, C)``.

    Attributes
    ----------
    kind : {"conj", "unitary"}
        ``f`` in ``tau_d(g) = A f(g) A^{-1}``: entrywise conjugation or
        ``g -> (g^*)^{-1}``.
    twist : ndarray
        The matrix ``A``.
    wdot : ndarray
        Monomial element of ``SU(n)`` lifting the longest element of the
        Weyl group of the compact roots.
    """

    key: str
    n: int
    kind: str
    twist: np.ndarray = field(repr=False)
    wdot: np.ndarray = field(repr=False)
    signature: tuple
    satake: str
    label: str

    # -- group level ---------------------------------------------------------
    @property
    def J(self):
        return self.wdot @ self.twist

    def _f(self, g):
        g = np.asarray(g, dtype=np.complex128)
        return np.conj(g) if self.kind == "conj" else np.linalg.inv(dagger(g))

    def tau_d(self, g):
        return self.twist @ self._f(g) @ np.linalg.inv(self.twist)

    def tau(self, g):
        return self.J @ self._f(g) @ np.linalg.inv(self.J)

    @property
    def wdot_center(self):
        """The central element ``w0dot tau_d(w0dot)``, returned as a scalar."""
        return complex(np.round((self.wdot @ self.tau_d(self.wdot))[0, 0], 12))

    def real_form_residual(self, g):
        return float(np.max(np.abs(self.tau(g) - g)))

    # -- Lie algebra level ---------------------------------------------------
    def dtau(self, x):
        x = np.asarray(x, dtype=np.complex128)
        fx = np.conj(x) if self.kind == "conj" else -dagger(x)
        return self.J @ fx @ np.linalg.inv(self.J)

    def project_real(self, x):
        """Projection onto the fixed space of ``dtau``."""
        return 0.5 * (x + self.dtau(x))

    @property
    def k0_basis(self):
        return _k0_basis(self.key)

    @property
    def p0_basis(self):
        return _p0_basis(self.key)

    @property
    def dim_an(self):
        return self.n * self.n - 1

    @property
    def dim_a0n0(self):
        return len(self.p0_basis)

    # -- a0 coordinates ------------------------------------------------------
    @property
    def restricted_rank(self):
        return self.n - 1 if self.kind == "conj" else min(self.signature)

    @property
    def label_length(self):
        """Number of coordinates of a point of ``a0``."""
        return self.n if self.kind == "conj" else self.restricted_rank

    def a0_matrix(self, coords):
        """Diagonal matrix of ``a0`` with the given catalog coordinates.

        ``SL(n, R)``: the diagonal itself (trace zero).  ``SU(p, q)``:
        ``diag(r_1, ..., r_q, 0, ..., 0, -r_q, ..., -r_1)``.
        """
        c = np.asarray(coords, dtype=float)
        if c.shape != (self.label_length,):
            raise UsageError(f"{self.key}: expected {self.label_length} coordinates, got {c.shape}")
        if self.kind == "conj":
            if abs(c.sum()) > 1e-9 * max(1.0, np.abs(c).max()):
                raise UsageError(f"{self.key}: diagonal must be traceless")
            d = c
        else:
            d = np.zeros(self.n)
            q = len(c)
            d[:q] = c
            d[self.n - q:] = -c[::-1]
        return np.diag(d).astype(np.complex128)

    def a0_coords(self, lam):
        d = np.real(np.diagonal(lam))
        return d.copy() if self.kind == "conj" else d[: self.restricted_rank].copy()

    def in_chamber(self, coords, tol=1e-12):
        c = np.asarray(coords, dtype=float)
        ok = bool(np.all(np.diff(c) <= tol))
        if self.kind == "unitary":
            ok = ok and bool(c.size == 0 or c[-1] >= -tol)
        return ok

    def unit_a0(self):
        """Element ``H0`` of the closed chamber with Killing norm one (rank one only)."""
        if self.restricted_rank != 1:
            raise UsageError(f"{self.key} has restricted rank {self.restricted_rank}")
        c = np.array([1.0, -1.0]) if self.kind == "conj" else np.array([1.0])
        h = self.a0_matrix(c)
        return h / np.sqrt(killing(h, h).real)

    def to_dict(self):
        return {"key": self.key, "n": self.n, "kind": self.kind,
                "signature": list(self.signature), "satake": self.satake,
                "restricted_rank": self.restricted_rank,
                "dim_AN": self.dim_an,
                "wdot_tau_d_wdot": [self.wdot_center.real, self.wdot_center.imag], "dim_A0N0": self.dim_a0n0,
                "wdot": encode_matrix(self.wdot), "twist": encode_matrix(self.twist)}


def _signature(J):
    """Signature of the Hermitian form ``J / sqrt(z)`` where ``J^2 = z``."""
    Z = J @ J
    z = Z[0, 0]
    if np.max(np.abs(Z - z * np.eye(len(J)))) > 1e-12:
        return None
    H = J / np.sqrt(z)
    if not np.allclose(H, dagger(H), atol=1e-12):
        return None
    w = np.linalg.eigvalsh(hermitian_part(H))
    return int(np.sum(w > 0)), int(np.sum(w < 0))


def _wdot_search(p, q):
    """Monomial ``w0dot`` in ``SU(p+q)`` for ``su(p, q)``.

    ``w0dot tau_d(w0dot)`` is required to be central; it equals one in the
    adjoint group, and central elements act trivially by dressing.  Lifts
    with ``w0dot tau_d(w0dot) = 1`` exactly are preferred.
    """
    n = p + q
    lo, hi = min(p, q), max(p, q)
    perm = list(range(n))
    perm[lo:hi] = perm[lo:hi][::-1]
    P = np.zeros((n, n), dtype=np.complex128)
    for i, j in enumerate(perm):
        P[i, j] = 1
    A = alternating_antidiagonal(n)
    Ainv = np.linalg.inv(A)
    found = []
    for units in product(_UNITS, repeat=n):
        W = np.diag(units) @ P
        W = W * np.linalg.det(W) ** (-1.0 / n)
        Z = W @ A @ W @ Ainv
        z = Z[0, 0]
        if np.max(np.abs(Z - z * np.eye(n))) > 1e-12:
            continue
        sig = _signature(W @ A)
        if sig is not None and sorted(sig) == sorted((p, q)):
            found.append((abs(z - 1) > 1e-12, len(found), W))
    if not found:
        raise ConfigurationError(f"no admissible w0dot for su({p},{q})")
    return min(found, key=lambda t: t[:2])[2], A


def _build_catalog():
    out = {}
    for n in range(2, 6):
        key = f"sl{n}r"
        I = np.eye(n, dtype=np.complex128)
        out[key] = GroupCatalogEntry(key, n, "conj", I, I.copy(), (n, 0), key, f"SL({n},R)")
    for n in range(2, 6):
        for q in range(1, n // 2 + 1):
            p = n - q
            W, A = _wdot_search(p, q)
            key = f"su{p}{q}"
            out[key] = GroupCatalogEntry(key, n, "unitary", A, W, (p, q), key, f"SU({p},{q})")
    return out


_CATALOG = None


def group_catalog():
    """All catalog entries keyed by name (``sl2r``..``sl5r``, ``su11``..``su41``)."""
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _build_catalog()
    return dict(_CATALOG)


def catalog_entry(key):
    cat = group_catalog()
    if key not in cat:
        raise ConfigurationError(f"unknown group {key!r}; choose from {sorted(cat)}")
    return cat[key]


@lru_cache(maxsize=None)
def _k0_basis(key):
    e = catalog_entry(key)
    return tuple(_orthonormal_span([e.project_real(x) for x in _real_basis_sl(e.n)]))


@lru_cache(maxsize=None)
def _p0_basis(key):
    e = catalog_entry(key)
    return tuple(_orthonormal_span([e.project_real(1j * x) for x in _real_basis_sl(e.n)]))


# ---------------------------------------------------------------------------
# real-form maps on AN
# ---------------------------------------------------------------------------
def sigma(b, entry, check=True):
    """``sigma(b) = p(tau(b))``."""
    return an_project(entry.tau(b), check)


def sigma_l(bs, entry):
    """``sigma^(l) = T_{w0dot} o (tau_d)^l``."""
    return twisted_action(entry.wdot, [entry.tau_d(b) for b in bs])


def cartan_decompose(g, entry, tol=1e-9):
    """``g = exp(xi) k`` with ``xi`` in ``p0`` and ``k`` in ``K0``.

    Raises
    ------
    UsageError
        If ``g`` is not fixed by the real form within ``tol``.
    """
    g = np.asarray(g, dtype=np.complex128)
    res = entry.real_form_residual(g)
    if res > tol * max(1.0, float(np.max(np.abs(g)))):
        raise UsageError(f"matrix is not in {entry.label} (tau residual {res:.3g})")
    xi = 0.5 * logm_positive(g @ dagger(g))
    k = expm_hermitian(-xi) @ g
    return xi, k


def fixed_set_codimension(entry, h=1e-5, tol=1e-6):
    """Rank of ``d sigma - id`` at ``e``, by central differences on a basis of ``a + n``."""
    n = entry.n
    cols = []
    for X in an_algebra_basis(n):
        plus = sigma(expm_upper(h * X), entry)
        minus = sigma(expm_upper(-h * X), entry)
        D = (plus - minus) / (2 * h) - X
        cols.append(an_coordinates(D))
    s = np.linalg.svd(np.array(cols).T, compute_uv=False)
    return int(np.sum(s > tol))


def an_algebra_basis(n):
    """Real basis of ``a + n``: diagonal ``E_ii - E_{i+1,i+1}``, then ``E_ij`` and ``i E_ij``."""
    basis = []
    for i in range(n - 1):
        h = np.zeros((n, n), dtype=np.complex128)
        h[i, i], h[i + 1, i + 1] = 1, -1
        basis.append(h)
    for i in range(n):
        for j in range(i + 1, n):
            x = np.zeros((n, n), dtype=np.complex128)
            x[i, j] = 1
            basis.append(x)
            basis.append(1j * x)
    return basis


def an_coordinates(Y):
    """Coordinates of ``Y`` in ``a + n`` relative to :func:`an_algebra_basis`."""
    n = Y.shape[-1]
    d = np.real(np.diagonal(Y, axis1=-2, axis2=-1))
    coords = [np.cumsum(d, axis=-1)[..., : n - 1]]
    iu = np.triu_indices(n, 1)
    up = Y[..., iu[0], iu[1]]
    pair = np.stack([up.real, up.imag], axis=-1).reshape(up.shape[:-1] + (-1,))
    coords.append(pair)
    return np.concatenate(coords, axis=-1)


def from_an_coordinates(c, n):
    c = np.asarray(c, dtype=float)
    basis = np.array(an_algebra_basis(n))
    return np.tensordot(c, basis, axes=(-1, 0))


def expm_upper(X):
    """``exp`` of an element of ``a + n`` (upper triangular, real diagonal)."""
    from scipy.linalg import expm
    return expm(np.asarray(X, dtype=np.complex128))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------
def random_hermitian(rng, n, scale=1.0):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    h = hermitian_part(z) * scale / np.sqrt(2 * n)
    return h - np.trace(h) / n * np.eye(n)


def random_unitary(rng, n):
    """Haar-distributed element of ``SU(n)``."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(z)
    d = np.diagonal(R)
    Q = Q * (d / np.abs(d))
    return Q / np.linalg.det(Q) ** (1.0 / n)


def random_an(rng, n, scale=0.5):
    return E_map(random_hermitian(rng, n, scale))


def random_group(rng, n, scale=0.5):
    return random_an(rng, n, scale) @ random_unitary(rng, n)


def random_p0(rng, entry, scale=1.0):
    return entry.project_real(random_hermitian(rng, entry.n, scale))


def random_k0(rng, entry, scale=np.pi):
    coeffs = rng.standard_normal(len(entry.k0_basis)) * scale
    eta = np.tensordot(coeffs, np.array(entry.k0_basis), axes=(0, 0))
    return expm_skew(eta)


def random_a0n0(rng, entry, scale=0.5):
    return E_map(random_p0(rng, entry, scale))


# ---------------------------------------------------------------------------
# orbits
# ---------------------------------------------------------------------------
def orbit_invariants(xi):
    """Sorted (descending) spectrum of a Hermitian matrix."""
    return np.sort(np.linalg.eigvalsh(hermitian_part(np.asarray(xi))))[..., ::-1]


def dressing_orbit_invariants(b):
    return orbit_invariants(E_inverse(b))


# ---------------------------------------------------------------------------
# JSON matrix encoding
# ---------------------------------------------------------------------------
def encode_matrix(m):
    m = np.asarray(m, dtype=np.complex128)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data, name="matrix"):
    """Inverse of :func:`encode_matrix`; raises ``UsageError`` naming ``name``."""
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{name}: entries must be [re, im] pairs") from exc
    if arr.ndim != 3 or arr.shape[0] != arr.shape[1] or arr.shape[2] != 2:
        raise UsageError(f"{name}: expected an n x n array of [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


# ---------------------------------------------------------------------------
# sampled property suite
# ---------------------------------------------------------------------------
def geometry_suite(entry, samples=200, seed=0, l=3):
    """Max residual of each group-geometry identity over seeded random samples.

    Returns
    -------
    list of Check
    """
    from .checks import Check, worst

    rng = np.random.default_rng(seed)
    n = entry.n
    out = []
    for _ in range(samples):
        g = random_group(rng, n, 1.0)
        f = iwasawa(g)
        out.append(Check("iwasawa_reconstruction", max(f.residual(g), f.unitarity_residual()), 1e-10))
        xi = random_hermitian(rng, n)
        out.append(Check("E_round_trip", float(np.max(np.abs(E_inverse(E_map(xi)) - xi))), 1e-9))
        k = random_unitary(rng, n)
        out.append(Check("E_equivariance",
                         float(np.max(np.abs(E_map(k @ xi @ dagger(k)) - dressing(k, E_map(xi))))), 1e-9))
        out.append(Check("E_intertwines_tau_sigma",
                         float(np.max(np.abs(E_map(entry.dtau(xi)) - sigma(E_map(xi), entry)))), 1e-9))
        b = random_an(rng, n)
        out.append(Check("sigma_involution", float(np.max(np.abs(sigma(sigma(b, entry), entry) - b))), 1e-9))
        b0 = random_a0n0(rng, entry)
        out.append(Check("A0N0_fixed_by_sigma", float(np.max(np.abs(sigma(b0, entry) - b0))), 1e-10))
        bs = [random_an(rng, n) for _ in range(l)]
        twice = sigma_l(sigma_l(bs, entry), entry)
        out.append(Check("sigma_l_involution", max(float(np.max(np.abs(x - y))) for x, y in zip(twice, bs)), 1e-9))
        fixed = [random_a0n0(rng, entry) for _ in range(l)]
        img = sigma_l(fixed, entry)
        out.append(Check("sigma_l_fixes_A0N0", max(float(np.max(np.abs(x - y))) for x, y in zip(img, fixed)), 1e-10))
        ta, tb = twisted_action(k, bs), twisted_action_sequential(k, bs)
        out.append(Check("twisted_action_formulas", max(float(np.max(np.abs(x - y))) for x, y in zip(ta, tb)), 1e-9))
    out.append(Check("fixed_set_codimension",
                     abs(fixed_set_codimension(entry) - (entry.dim_an - entry.dim_a0n0)), 0))
    return worst(out)
