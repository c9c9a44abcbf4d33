"""Real-form involutions on a Chevalley basis and Satake-diagram data.

Every map here is stored as a matrix over the Chevalley basis of
:mod:`thompson_lie.root_structure` together with a linearity flag.  The
matrices have Gaussian-integer entries (``complex128`` holding small exact
integers), so products and comparisons are exact.  A conjugate-linear map
acts as ``x -> M @ conj(x)``.

The compact form ``theta``, the split form ``eta0``, the diagram lifts
``gamma_d`` and the relation ``tau = Ad(w0dot) tau_d`` only involve signs on
root vectors, so they agree with the Killing-normalized root vectors used in
the literature.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from math import factorial, lcm

import numpy as np
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import DiagnosticError, UsageError
from .root_structure import AlgebraElement, RootSystem, neg, subset_longest_element

SATAKE_KEYS = ("series", "rank", "black", "arrows")


# ---------------------------------------------------------------------------
# diagram automorphisms
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class DiagramAutomorphism:
    """Permutation ``perm`` of simple root indices (0-based) preserving the Cartan matrix."""

    rs: RootSystem = field(repr=False, compare=False)
    perm: tuple

    def __post_init__(self):
        perm = tuple(int(p) for p in self.perm)
        object.__setattr__(self, "perm", perm)
        n = self.rs.rank
        if sorted(perm) != list(range(n)):
            raise UsageError(f"{perm} is not a permutation of the simple roots")
        C = self.rs.cartan
        if any(C[perm[i]][perm[j]] != C[i][j] for i in range(n) for j in range(n)):
            raise UsageError(f"{perm} does not preserve the Cartan matrix")

    @classmethod
    def identity(cls, rs):
        return cls(rs, tuple(range(rs.rank)))

    @classmethod
    def minus_w0(cls, rs):
        return cls(rs, rs.minus_w0())

    def __call__(self, i):
        return self.perm[i]

    def __mul__(self, other):
        return DiagramAutomorphism(self.rs, tuple(self.perm[other.perm[i]] for i in range(self.rs.rank)))

    def act(self, a):
        out = [0] * self.rs.rank
        for i, c in enumerate(a):
            out[self.perm[i]] = c
        return tuple(out)

    @property
    def is_involutive(self):
        return all(self.perm[self.perm[i]] == i for i in range(self.rs.rank))

    @property
    def is_identity(self):
        return self.perm == tuple(range(self.rs.rank))

    def describe(self):
        return "identity" if self.is_identity else "[" + ",".join(str(p + 1) for p in self.perm) + "]"


def diagram_automorphisms(rs):
    """All automorphisms of the Dynkin diagram of ``rs``."""
    from itertools import permutations

    out = []
    for p in permutations(range(rs.rank)):
        try:
            out.append(DiagramAutomorphism(rs, p))
        except UsageError:
            pass
    return out


# ---------------------------------------------------------------------------
# involutions
# ---------------------------------------------------------------------------
@dataclass(frozen=True, eq=False)
class Involution:
    """Linear or conjugate-linear map on the algebra, with exact matrix."""

    wb: object = field(repr=False)
    linear: bool
    matrix: np.ndarray = field(repr=False)
    label: str = ""

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=np.complex128)
        if not (np.all(M.real == np.round(M.real)) and np.all(M.imag == np.round(M.imag))):
            raise UsageError("involution matrices must have Gaussian-integer entries")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    def __matmul__(self, other):
        """Composition ``self o other``."""
        B = other.matrix if self.linear else np.conj(other.matrix)
        return Involution(self.wb, self.linear == other.linear, self.matrix @ B,
                          f"{self.label}*{other.label}")

    def __eq__(self, other):
        if not isinstance(other, Involution):
            return NotImplemented
        return self.linear == other.linear and np.array_equal(self.matrix, other.matrix)

    __hash__ = None

    def squared_is_identity(self):
        return (self @ self) == identity_map(self.wb)

    def is_automorphism(self):
        return automorphism_residual(self.wb, self.matrix) == 0

    def apply(self, x):
        """Exact image of an :class:`AlgebraElement`."""
        if x.algebra != self.wb.key:
            raise UsageError("element from a different algebra")
        re, im = list(x.re), list(x.im)
        if not self.linear:
            im = [-v for v in im]
        A = self.matrix.real.astype(np.int64)
        B = self.matrix.imag.astype(np.int64)
        n = self.wb.dim
        out_re, out_im = [], []
        for r in range(n):
            sr = si = Fraction(0)
            for c in np.flatnonzero(A[r]):
                sr += int(A[r, c]) * re[c]
                si += int(A[r, c]) * im[c]
            for c in np.flatnonzero(B[r]):
                sr -= int(B[r, c]) * im[c]
                si += int(B[r, c]) * re[c]
            out_re.append(sr)
            out_im.append(si)
        return AlgebraElement(x.algebra, tuple(out_re), tuple(out_im))

    def root_permutation(self):
        """Map ``alpha -> beta`` when the map sends ``g_alpha`` onto ``g_beta``.

        Returns ``None`` if some root vector is not sent to a single root space
        or the Cartan subalgebra is not preserved.
        """
        wb = self.wb
        M = self.matrix
        r = wb.rank
        if np.any(M[r:, :r]):
            return None
        out = {}
        for a in wb.rs.roots:
            col = M[:, wb.e_index(a)]
            nz = np.flatnonzero(col)
            if len(nz) != 1 or nz[0] < r:
                return None
            out[a] = wb.root_of(int(nz[0]))
        return out

    def preserves_cartan(self):
        r = self.wb.rank
        return not np.any(self.matrix[r:, :r])


def identity_map(wb, linear=True):
    return Involution(wb, linear, np.eye(wb.dim), "id")


def automorphism_residual(wb, M):
    """Max entry of ``M[x, y] - [Mx, My]`` over basis pairs (0 for automorphisms)."""
    C = wb.structure.astype(np.complex128)
    lhs = np.einsum("ijk,lk->ijl", C, M)
    rhs = np.einsum("ai,bj,abl->ijl", M, M, C)
    return float(np.abs(lhs - rhs).max())


def compact_form_theta(wb):
    """Conjugation ``theta`` fixing ``span_R{iH_a, e_a - e_-a, i(e_a + e_-a)}``."""
    M = np.zeros((wb.dim, wb.dim))
    for i in range(wb.rank):
        M[i, i] = -1
    for a in wb.rs.roots:
        M[wb.e_index(neg(a)), wb.e_index(a)] = -1
    return Involution(wb, False, M, "theta")


def split_form_eta0(wb):
    """Split real form: identity on the real span of the Chevalley basis."""
    return Involution(wb, False, np.eye(wb.dim), "eta0")


def _bracket_vec(wb, u, v):
    return np.einsum("i,j,ijk->k", u, v, wb.structure)


def extend_from_generators(wb, pos, negs, cartan):
    """Linear map determined by its values on ``e_{+-alpha_i}`` and ``h_i``.

    ``pos[i]``/``negs[i]``/``cartan[i]`` are image vectors (length ``dim``).
    Non-simple root vectors are reached through ``e_b = [e_ai, e_(b-ai)]/N``.
    """
    rs = wb.rs
    M = np.zeros((wb.dim, wb.dim), dtype=np.complex128)
    for i in range(wb.rank):
        M[:, i] = cartan[i]
        M[:, wb.e_index(rs.simple[i])] = pos[i]
        M[:, wb.e_index(neg(rs.simple[i]))] = negs[i]
    for b in rs.positive:
        if sum(b) == 1:
            continue
        for i in range(wb.rank):
            rest = tuple(x - (j == i) for j, x in enumerate(b))
            if rs.is_root(rest) and rs.is_positive(rest):
                break
        ai = rs.simple[i]
        for sgn in (1, -1):
            x, y = tuple(sgn * c for c in ai), tuple(sgn * c for c in rest)
            n = wb.m(x, y)
            img = _bracket_vec(wb, M[:, wb.e_index(x)], M[:, wb.e_index(y)]) / n
            M[:, wb.e_index(tuple(sgn * c for c in b))] = img
    return M


def gamma_d(wb, d):
    """Complex-linear lift of a diagram automorphism fixing the simple root vectors' labels."""
    if not isinstance(d, DiagramAutomorphism):
        d = DiagramAutomorphism(wb.rs, d)
    rs = wb.rs
    eye = np.eye(wb.dim)
    pos = [eye[:, wb.e_index(rs.simple[d(i)])] for i in range(wb.rank)]
    negs = [eye[:, wb.e_index(neg(rs.simple[d(i)]))] for i in range(wb.rank)]
    cart = [eye[:, d(i)] for i in range(wb.rank)]
    M = extend_from_generators(wb, pos, negs, cart)
    return Involution(wb, True, M, f"gamma{d.describe()}")


def tau_d(wb, d):
    """Quasi-split real form ``eta0 gamma_{-w0 d}`` of inner class ``d``."""
    if not isinstance(d, DiagramAutomorphism):
        d = DiagramAutomorphism(wb.rs, d)
    if not d.is_involutive:
        raise UsageError(f"diagram automorphism {d.describe()} is not involutive")
    c = DiagramAutomorphism.minus_w0(wb.rs) * d
    t = split_form_eta0(wb) @ gamma_d(wb, c)
    return Involution(wb, False, t.matrix, f"tau_d[{d.describe()}]")


def inner_class(tau, theta):
    """Diagram automorphism ``rho(tau theta)`` labelling the inner class of ``tau``.

    ``tau theta`` must preserve the Cartan subalgebra; its root permutation is
    moved into the stabilizer of the positive system by an exact Weyl-word
    search, and the remaining diagram symmetry is returned.
    """
    wb = tau.wb
    rs = wb.rs
    phi = tau @ theta
    if not phi.linear:
        raise UsageError("tau and theta must both be conjugate-linear")
    perm = phi.root_permutation()
    if perm is None:
        raise DiagnosticError("tau*theta does not normalize the Cartan subalgebra")
    images = [perm[a] for a in rs.simple]
    for b in rs.positive:
        lin = tuple(sum(b[i] * images[i][k] for i in range(rs.rank)) for k in range(rs.rank))
        if lin != perm[b]:
            raise DiagnosticError("root permutation of tau*theta is not linear")
    P = [perm[b] for b in rs.positive]
    word = []
    for _ in range(len(rs.positive) + 1):
        bad = [j for j in range(rs.rank) if neg(rs.simple[j]) in P]
        if not bad:
            break
        j = bad[0]
        word.append(j)
        P = [rs.reflect(j, b) for b in P]
        images = [rs.reflect(j, b) for b in images]
    else:  # pragma: no cover - the loop length bound is the number of positive roots
        raise DiagnosticError("Weyl-word search did not terminate")
    d = tuple(im.index(1) for im in images)
    return DiagramAutomorphism(rs, d)


# ---------------------------------------------------------------------------
# Satake diagrams
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SatakeDiagram:
    """Black nodes and arrow pairing on white nodes, 0-based indices."""

    series: str
    rank: int
    black: frozenset
    arrows: tuple = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "series", str(self.series).upper())
        object.__setattr__(self, "black", frozenset(int(b) for b in self.black))
        arrows = tuple(sorted(tuple(sorted((int(a), int(b)))) for a, b in self.arrows))
        object.__setattr__(self, "arrows", arrows)
        nodes = [x for pair in arrows for x in pair]
        if any(not 0 <= x < self.rank for x in list(self.black) + nodes):
            raise UsageError("Satake diagram node out of range")
        if len(set(nodes)) != len(nodes) or any(a == b for a, b in arrows):
            raise UsageError("arrow pairing is not an involution on white nodes")
        if self.black & set(nodes):
            raise UsageError("arrows may only join white nodes")

    def partner(self, i):
        for a, b in self.arrows:
            if i == a:
                return b
            if i == b:
                return a
        return i

    @classmethod
    def from_dict(cls, data, name=""):
        missing = [k for k in SATAKE_KEYS if k not in data]
        if missing:
            raise UsageError(f"Satake diagram missing field(s): {', '.join(missing)}")
        try:
            rank = int(data["rank"])
            black = [int(b) - 1 for b in data["black"]]
            arrows = [(int(a) - 1, int(b) - 1) for a, b in data["arrows"]]
        except (TypeError, ValueError) as exc:
            raise UsageError(f"malformed Satake diagram field: {exc}") from None
        return cls(data["series"], rank, frozenset(black), tuple(arrows), name or data.get("name", ""))

    @classmethod
    def from_json(cls, text, name=""):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"Satake file is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("Satake file must hold a JSON object")
        return cls.from_dict(data, name)

    def to_dict(self):
        return {
            "series": self.series,
            "rank": self.rank,
            "black": sorted(b + 1 for b in self.black),
            "arrows": [[a + 1, b + 1] for a, b in self.arrows],
        }

    def to_json(self):
        return json.dumps(self.to_dict()) + "\n"


def satake_inner_class(sd, rs=None):
    """Inner class ``-w0 c`` of the real form with Satake diagram ``sd``."""
    from .root_structure import build_root_system

    rs = rs or build_root_system(sd.series, sd.rank)
    w0 = subset_longest_element(rs, sorted(sd.black))
    c = []
    for i in range(rs.rank):
        if i in sd.black:
            img = neg(w0.act(rs.simple[i]))
            if img not in rs.simple or img.index(1) not in sd.black:
                raise UsageError("black nodes are not stable under -w0")
            c.append(img.index(1))
        else:
            c.append(sd.partner(i))
    c = DiagramAutomorphism(rs, tuple(c))
    if not c.is_involutive:
        raise UsageError("diagram map c is not involutive")
    d = DiagramAutomorphism.minus_w0(rs) * c
    if not d.is_involutive:
        raise UsageError("inner class -w0 c is not involutive")
    return d


def _exp_ad_nilpotent(A):
    out = np.eye(A.shape[0], dtype=np.int64)
    term = np.eye(A.shape[0], dtype=np.int64)
    k = 0
    while True:
        k += 1
        term = term @ A
        if not term.any():
            return out
        f = factorial(k)
        assert not np.any(term % f)
        out = out + term // f


def simple_reflection_lift(wb, i):
    """``Ad`` of ``exp(e_i) exp(-f_i) exp(e_i) = exp(pi/2 (e_i - f_i))`` (integer matrix)."""
    e = wb.ad[wb.e_index(wb.rs.simple[i])]
    f = wb.ad[wb.e_index(neg(wb.rs.simple[i]))]
    return _exp_ad_nilpotent(e) @ _exp_ad_nilpotent(-f) @ _exp_ad_nilpotent(e)


def weyl_lift(wb, word):
    """``Ad`` of the Tits representative of ``s_word[0] ... s_word[-1]``."""
    M = np.eye(wb.dim, dtype=np.int64)
    for i in word:
        M = M @ simple_reflection_lift(wb, i)
    return M


def torus_character(wb, values):
    """``Ad(t)`` for the torus element with ``alpha_i(t) = values[i]``."""
    diag = np.ones(wb.dim, dtype=np.complex128)
    for a in wb.rs.roots:
        v = 1 + 0j
        for j, c in enumerate(a):
            v *= values[j] ** c
        diag[wb.e_index(a)] = v
    return np.diag(np.round(diag.real) + 1j * np.round(diag.imag))


def _torus_candidates(rank):
    for units in ((1, -1), (1, 1j, -1, -1j)):
        for vals in product(units, repeat=rank):
            if len(units) == 4 and all(v in (1, -1) for v in vals):
                continue
            yield vals


def _fmt_units(vals):
    names = {1: "+1", -1: "-1", 1j: "+i", -1j: "-i"}
    return "(" + ",".join(names[complex(v)] for v in vals) + ")"


def tau_from_satake(wb, sd):
    """Iwasawa real form ``Ad(w0dot) tau_d`` with Satake diagram ``sd``.

    The representative ``w0dot`` is the Tits lift of the longest element of
    the black parabolic subgroup times a torus element with
    ``alpha_i(t)`` in ``{+-1, +-i}``; the first candidate giving an
    involutive Iwasawa form with diagram ``sd`` is returned.
    """
    rs = wb.rs
    if (sd.series, sd.rank) != (rs.series, rs.rank):
        raise UsageError("Satake diagram does not match the algebra")
    d = satake_inner_class(sd, rs)
    td = tau_d(wb, d)
    theta = compact_form_theta(wb)
    word = subset_longest_element(rs, sorted(sd.black)).word
    W = weyl_lift(wb, word).astype(np.complex128)
    for vals in _torus_candidates(rs.rank):
        M = W @ torus_character(wb, vals) @ td.matrix
        label = "Ad(w0dot)tau_d[w0=s" + "".join(str(i + 1) for i in word) + ",t=" + _fmt_units(vals) + "]"
        tau = Involution(wb, False, M, label)
        if not tau.squared_is_identity():
            continue
        if not check_iwasawa_form(tau, theta, wb).all_pass:
            continue
        if extract_satake(tau) != sd:
            continue
        return tau
    raise DiagnosticError(f"no torus-adjusted representative w0dot gives an Iwasawa form for {sd}")


def extract_satake(tau):
    """Read off black nodes and arrows from an Iwasawa real form."""
    wb = tau.wb
    rs = wb.rs
    perm = tau.root_permutation()
    if perm is None:
        raise DiagnosticError("tau does not preserve the root decomposition")
    black = {i for i in range(rs.rank) if perm[rs.simple[i]] == neg(rs.simple[i])}
    arrows = set()
    for i in range(rs.rank):
        if i in black:
            continue
        img = list(perm[rs.simple[i]])
        for b in black:
            img[b] = 0
        if sorted(img) != [0] * (rs.rank - 1) + [1]:
            raise DiagnosticError(f"white root {i + 1} has no partner")
        j = img.index(1)
        if j != i:
            arrows.add(tuple(sorted((i, j))))
    return SatakeDiagram(rs.series, rs.rank, frozenset(black), tuple(sorted(arrows)))


def compact_roots(tau):
    """``Delta_0 = {alpha : tau(alpha) = -alpha}``."""
    perm = tau.root_permutation()
    if perm is None:
        raise DiagnosticError("tau does not preserve the root decomposition")
    return frozenset(a for a, b in perm.items() if b == neg(a))


# ---------------------------------------------------------------------------
# Iwasawa conditions
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class IwasawaReport:
    commutes_with_theta: bool
    preserves_cartan: bool
    maximal_abelian: bool
    compatible_positive: bool
    a_tau_dim: int
    p_tau_dim: int
    centralizer_dim: int

    @property
    def condition1(self):
        return self.commutes_with_theta and self.preserves_cartan

    @property
    def condition2(self):
        return self.maximal_abelian

    @property
    def condition3(self):
        return self.compatible_positive

    @property
    def all_pass(self):
        return self.condition1 and self.condition2 and self.condition3

    @property
    def rank_zero(self):
        return self.a_tau_dim == 0


def _realify(inv):
    A = inv.matrix.real.astype(np.int64)
    B = inv.matrix.imag.astype(np.int64)
    if inv.linear:
        return np.block([[A, -B], [B, A]])
    return np.block([[A, B], [B, -A]])


def _nullspace(rows):
    """Exact rational nullspace basis (columns) of an integer matrix."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.size == 0:
        return np.eye(rows.shape[1], dtype=object)
    dm = DomainMatrix([[QQ(int(x)) for x in r] for r in rows], rows.shape, QQ)
    ns = dm.nullspace().to_Matrix()
    if ns.rows == 0:
        return np.zeros((rows.shape[1], 0), dtype=object)
    return np.array([[Fraction(int(x.p), int(x.q)) for x in ns.row(i)] for i in range(ns.rows)],
                    dtype=object).T


def _to_int_columns(N):
    out = []
    for j in range(N.shape[1]):
        col = N[:, j]
        den = lcm(*(x.denominator for x in col)) if len(col) else 1
        out.append([int(x * den) for x in col])
    return np.array(out, dtype=np.int64).T.reshape(N.shape[0], N.shape[1])


def fixed_cartan_part(tau):
    """Integer basis (columns over ``h_1..h_r``) of ``a^tau``."""
    wb = tau.wb
    r = wb.rank
    T = _realify(tau)
    n = wb.dim
    sub = (T - np.eye(2 * n, dtype=np.int64))[:, :r]
    return _to_int_columns(_nullspace(sub))


def check_iwasawa_form(tau, theta, wb=None):
    """Evaluate the three Iwasawa-compatibility conditions exactly."""
    wb = wb or tau.wb
    n, r = wb.dim, wb.rank
    commutes = (tau @ theta) == (theta @ tau)
    pres = tau.preserves_cartan()
    T = _realify(tau)
    Th = _realify(theta)
    I2 = np.eye(2 * n, dtype=np.int64)
    p_tau = _to_int_columns(_nullspace(np.vstack([Th + I2, T - I2])))
    a_tau = fixed_cartan_part(tau) if pres else np.zeros((r, 0), dtype=np.int64)
    # centralizer of a^tau inside p^tau
    conds = []
    for k in range(a_tau.shape[1]):
        adH = np.einsum("i,ijk->kj", a_tau[:, k], wb.structure[:r])
        conds.append(np.block([[adH, np.zeros_like(adH)], [np.zeros_like(adH), adH]]) @ p_tau)
    if conds and p_tau.shape[1]:
        cent = _nullspace(np.vstack(conds)).shape[1]
    else:
        cent = p_tau.shape[1]
    maximal = cent == a_tau.shape[1]
    compatible = True
    perm = tau.root_permutation()
    if perm is None:
        compatible = False
    else:
        for a in wb.rs.positive:
            vals = [sum(a_tau[i, k] * wb.rs.pairing(a, i) for i in range(r)) for k in range(a_tau.shape[1])]
            if any(vals) and not wb.rs.is_positive(perm[a]):
                compatible = False
                break
    return IwasawaReport(bool(commutes), bool(pres), bool(maximal), compatible,
                         int(a_tau.shape[1]), int(p_tau.shape[1]), int(cent))


def restricted_rank(tau):
    return fixed_cartan_part(tau).shape[1]


def satake_catalog():
    """Shipped Satake diagrams of sl(n,R) (n <= 5) and su(p,q) (p + q <= 5), by name."""
    from importlib import resources

    root = resources.files("thompson_lie") / "data" / "satake"
    out = {}
    for entry in sorted(root.iterdir(), key=lambda p: p.name):
        if entry.name.endswith(".json"):
            name = entry.name[:-5]
            out[name] = SatakeDiagram.from_json(entry.read_text(), name=name)
    return out


def catalog_file_text(name):
    from importlib import resources

    return (resources.files("thompson_lie") / "data" / "satake" / f"{name}.json").read_text()
