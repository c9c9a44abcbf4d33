"""Classical root systems and Chevalley bases with exact integer data.

Roots are integer coordinate tuples over the simple roots.  The Lie algebra
is realized on the basis ``h_1..h_r`` (simple coroots) followed by ``e_alpha``
for every root, positive roots first in height order, then their negatives in
the same order.  Structure constants are integers:

* ``[h_i, e_b] = <b, a_i^v> e_b``
* ``[e_a, e_-a] = h_a`` (the coroot of ``a``)
* ``[e_a, e_b] = N(a, b) e_(a+b)`` when ``a + b`` is a root

Sign convention: for every non-simple positive root ``xi`` the extraspecial
pair ``(a, b)`` (``a`` the first positive root in height order with
``xi - a`` a root) gets ``N(a, b) = p + 1 > 0``; all other constants follow
from the Chevalley relations.  ``N(-a, -b) = -N(a, b)`` holds throughout.

The Killing-normalized basis used in the literature (``[E_a, E_-a] = H_a`` with
``<<H, H_a>> = a(H)``) differs from this one by ``E_a = c_a e_a`` with
``c_a**2 = <<a, a>>/2`` rational; see :meth:`WeylBasis.paper_scale_sq`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from math import factorial

import numpy as np
import sympy

from .errors import ConfigurationError, UsageError

SUPPORTED_RANKS = {
    "A": range(1, 7),
    "B": range(2, 7),
    "C": range(2, 7),
    "D": range(4, 7),
}

Root = tuple


def _simple_gram(series, rank):
    """Gram matrix of the simple roots, long roots of squared length 2."""
    g = [[Fraction(0)] * rank for _ in range(rank)]
    if series == "A":
        for i in range(rank):
            g[i][i] = Fraction(2)
            if i + 1 < rank:
                g[i][i + 1] = g[i + 1][i] = Fraction(-1)
    elif series == "B":
        for i in range(rank):
            g[i][i] = Fraction(2) if i < rank - 1 else Fraction(1)
            if i + 1 < rank:
                g[i][i + 1] = g[i + 1][i] = Fraction(-1)
    elif series == "C":
        for i in range(rank):
            g[i][i] = Fraction(1) if i < rank - 1 else Fraction(2)
            if i + 1 < rank - 1:
                g[i][i + 1] = g[i + 1][i] = Fraction(-1, 2)
        g[rank - 2][rank - 1] = g[rank - 1][rank - 2] = Fraction(-1)
    elif series == "D":
        for i in range(rank):
            g[i][i] = Fraction(2)
        for i in range(rank - 2):
            g[i][i + 1] = g[i + 1][i] = Fraction(-1)
        g[rank - 3][rank - 1] = g[rank - 1][rank - 3] = Fraction(-1)
    return g


@dataclass(frozen=True)
class RootSystem:
    """Root system of type ``series``\\ ``rank`` with its Weyl group data.

    Build with :func:`build_root_system`.
    """

    series: str
    rank: int
    gram: tuple
    cartan: tuple
    positive: tuple
    reflections: tuple = field(repr=False)
    longest_word: tuple = field(repr=False)

    @cached_property
    def roots(self):
        return self.positive + tuple(neg(a) for a in self.positive)

    @cached_property
    def index(self):
        return {a: i for i, a in enumerate(self.roots)}

    @cached_property
    def simple(self):
        return tuple(_unit(self.rank, i) for i in range(self.rank))

    @property
    def name(self):
        return f"{self.series}{self.rank}"

    def is_root(self, a):
        return tuple(a) in self.index

    def is_positive(self, a):
        return any(c > 0 for c in a)

    def height(self, a):
        return sum(a)

    def inner(self, a, b):
        return sum(
            (a[i] * b[j] * self.gram[i][j] for i in range(self.rank) for j in range(self.rank)
             if a[i] and b[j]),
            Fraction(0),
        )

    def pairing(self, b, i):
        """``<b, alpha_i^vee>`` as an integer."""
        return sum(b[j] * self.cartan[j][i] for j in range(self.rank))

    def reflect(self, i, a):
        c = self.pairing(a, i)
        return tuple(a[j] - c * (j == i) for j in range(self.rank))

    def coroot(self, a):
        """Coordinates of ``a^vee`` over the simple coroots (integers)."""
        aa = self.inner(a, a)
        coords = []
        for j in range(self.rank):
            c = a[j] * self.gram[j][j] / aa
            assert c.denominator == 1
            coords.append(int(c))
        return tuple(coords)

    def string_length_down(self, a, b):
        """Largest ``p`` with ``b - p a`` a root."""
        p = 0
        while self.is_root(tuple(bb - (p + 1) * aa for aa, bb in zip(a, b))):
            p += 1
        return p

    def act(self, word, a):
        """Apply ``s_{word[0]} s_{word[1]} ... s_{word[-1]}`` to ``a``."""
        for i in reversed(word):
            a = self.reflect(i, a)
        return a

    def minus_w0(self):
        """``-w^0`` as a permutation of the simple root indices."""
        perm = []
        for i in range(self.rank):
            img = neg(self.act(self.longest_word, self.simple[i]))
            perm.append(img.index(1))
        return tuple(perm)

    def span_closure(self, simple_indices):
        """All roots lying in the span of the given simple roots."""
        s = set(simple_indices)
        return frozenset(a for a in self.roots if all(a[j] == 0 for j in range(self.rank) if j not in s))

    def to_dict(self):
        return {
            "series": self.series,
            "rank": self.rank,
            "cartan": [list(r) for r in self.cartan],
            "gram": [[str(x) for x in r] for r in self.gram],
            "positive_roots": [list(a) for a in self.positive],
            "longest_word": [i + 1 for i in self.longest_word],
        }


def neg(a):
    return tuple(-x for x in a)


def _unit(n, i):
    return tuple(int(j == i) for j in range(n))


def _add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def build_root_system(series, rank):
    """Construct the root system of a classical type.

    Parameters
    ----------
    series : {"A", "B", "C", "D"}
    rank : int
        ``1..6`` for A, ``2..6`` for B and C, ``4..6`` for D.
    """
    series = str(series).upper()
    if series not in SUPPORTED_RANKS or rank not in SUPPORTED_RANKS[series]:
        raise ConfigurationError(f"unsupported root system {series}{rank}")
    gram = _simple_gram(series, rank)
    cartan = tuple(
        tuple(int(2 * gram[i][j] / gram[j][j]) for j in range(rank)) for i in range(rank)
    )

    def pairing(b, i):
        return sum(b[j] * cartan[j][i] for j in range(rank))

    simple = [_unit(rank, i) for i in range(rank)]
    found = set(simple)
    level = list(simple)
    while level:
        nxt = []
        for b in level:
            for i in range(rank):
                if b == simple[i]:
                    continue
                p = 0
                while tuple(b[j] - (p + 1) * (j == i) for j in range(rank)) in found:
                    p += 1
                if p - pairing(b, i) > 0:
                    c = tuple(b[j] + (j == i) for j in range(rank))
                    if c not in found:
                        found.add(c)
                        nxt.append(c)
        level = nxt
    positive = tuple(sorted(found, key=lambda a: (sum(a), tuple(-x for x in a))))

    roots = positive + tuple(neg(a) for a in positive)
    index = {a: k for k, a in enumerate(roots)}
    reflections = []
    for i in range(rank):
        perm = []
        for a in roots:
            c = pairing(a, i)
            perm.append(index[tuple(a[j] - c * (j == i) for j in range(rank))])
        reflections.append(tuple(perm))

    rs = RootSystem(series, rank, tuple(map(tuple, gram)), cartan, positive,
                    tuple(reflections), ())
    object.__setattr__(rs, "longest_word", _longest_word(rs, range(rank)))
    expected = {"A": rank * (rank + 1), "B": 2 * rank * rank, "C": 2 * rank * rank,
                "D": 2 * rank * (rank - 1)}[series]
    assert len(roots) == expected
    return rs


def _longest_word(rs, simple_indices):
    # grow w while some w(alpha_i) stays positive; ends at the longest element
    word = ()
    idx = list(simple_indices)
    while True:
        for i in idx:
            if rs.is_positive(rs.act(word, rs.simple[i])):
                word = word + (i,)
                break
        else:
            return word


@dataclass(frozen=True)
class WeylElement:
    """Element of the Weyl group stored as a reduced word of simple indices."""

    rs: RootSystem = field(repr=False)
    word: tuple

    def act(self, a):
        return self.rs.act(self.word, a)

    def __len__(self):
        return len(self.word)

    def __mul__(self, other):
        return WeylElement(self.rs, self.word + other.word)

    def inverse(self):
        return WeylElement(self.rs, tuple(reversed(self.word)))

    def root_permutation(self):
        return tuple(self.rs.index[self.act(a)] for a in self.rs.roots)

    def is_identity(self):
        return all(self.act(a) == a for a in self.rs.simple)

    def __eq__(self, other):
        if not isinstance(other, WeylElement):
            return NotImplemented
        return self.rs is other.rs and all(self.act(a) == other.act(a) for a in self.rs.simple)

    def __hash__(self):
        return hash(tuple(self.act(a) for a in self.rs.simple))


def longest_element(rs):
    return WeylElement(rs, rs.longest_word)


def subset_longest_element(rs, subset):
    """Longest element of the parabolic subgroup generated by ``subset``.

    ``subset`` is either a collection of simple root indices (0-based) or a
    collection of roots ``Delta_0``; a root collection must be the
    span-closure of its simple members.
    """
    subset = list(subset)
    if subset and isinstance(subset[0], tuple):
        roots = {tuple(a) for a in subset}
        if not all(rs.is_root(a) for a in roots):
            raise UsageError("subset contains non-roots")
        sigma0 = [i for i in range(rs.rank) if rs.simple[i] in roots]
        if roots != set(rs.span_closure(sigma0)):
            raise UsageError("root subset is not the span-closure of its simple roots")
    else:
        sigma0 = sorted(set(int(i) for i in subset))
        if any(i < 0 or i >= rs.rank for i in sigma0):
            raise UsageError(f"simple indices out of range: {sigma0}")
    return WeylElement(rs, _longest_word(rs, sigma0))


class WeylBasis:
    """Chevalley basis of the complex simple Lie algebra of a root system.

    Attributes
    ----------
    rs : RootSystem
    dim : int
    structure : ndarray of int64, shape (dim, dim, dim)
        ``[b_i, b_j] = sum_k structure[i, j, k] b_k``.
    constants : dict
        ``(a, b) -> N(a, b)`` for every pair with ``a + b`` a root.
    """

    def __init__(self, rs):
        self.rs = rs
        self.rank = rs.rank
        self.dim = rs.rank + len(rs.roots)
        self._n = {}
        self.constants = {}
        for a in rs.roots:
            for b in rs.roots:
                if rs.is_root(_add(a, b)):
                    self.constants[(a, b)] = self._N(a, b)
        self.structure = self._build_structure()

    @property
    def key(self):
        return (self.rs.series, self.rs.rank)

    def e_index(self, a):
        return self.rank + self.rs.index[tuple(a)]

    def root_of(self, k):
        """Root labelling basis index ``k`` (``None`` for Cartan elements)."""
        return None if k < self.rank else self.rs.roots[k - self.rank]

    def labels(self):
        out = [f"h{i + 1}" for i in range(self.rank)]
        out += ["e(" + ",".join(map(str, a)) + ")" for a in self.rs.roots]
        return out

    # structure constants -------------------------------------------------
    def _order(self, a):
        return self.rs.index[a]

    def _extraspecial(self, xi):
        for a in self.rs.positive:
            b = tuple(x - y for x, y in zip(xi, a))
            if self.rs.is_root(b) and self.rs.is_positive(b):
                return a, b
        raise AssertionError(xi)

    def _special(self, g, d):
        """``N(g, d)`` for positive ``g`` before ``d`` in the root order."""
        key = (g, d)
        if key in self._n:
            return self._n[key]
        rs = self.rs
        xi = _add(g, d)
        a, b = self._extraspecial(xi)
        if (g, d) == (a, b):
            val = rs.string_length_down(a, b) + 1
        else:
            # Chevalley relation for a + b - g - d = 0, no opposite pairs
            total = Fraction(0)
            bg = tuple(x - y for x, y in zip(b, g))
            if rs.is_root(bg):
                total += Fraction(self._N(b, neg(g)) * self._N(a, neg(d)), rs.inner(bg, bg))
            ag = tuple(x - y for x, y in zip(a, g))
            if rs.is_root(ag):
                total += Fraction(self._N(neg(g), a) * self._N(b, neg(d)), rs.inner(ag, ag))
            v = rs.inner(xi, xi) / self._N(a, b) * total
            assert v.denominator == 1, (g, d, v)
            val = int(v)
        self._n[key] = val
        return val

    def _N(self, a, b):
        rs = self.rs
        s = _add(a, b)
        if not rs.is_root(s):
            return 0
        pa, pb = rs.is_positive(a), rs.is_positive(b)
        if pa and pb:
            if self._order(a) < self._order(b):
                return self._special(a, b)
            return -self._special(b, a)
        if not pa and not pb:
            return -self._N(neg(a), neg(b))
        c = neg(s)
        # triple (a, b, c) sums to zero; reduce to the pair of positive members
        if rs.is_positive(b) and rs.is_positive(c):
            v = Fraction(rs.inner(c, c), rs.inner(a, a)) * self._N(b, c)
        elif rs.is_positive(c) and rs.is_positive(a):
            v = Fraction(rs.inner(c, c), rs.inner(b, b)) * self._N(c, a)
        else:
            return -self._N(neg(a), neg(b))
        assert v.denominator == 1
        return int(v)

    def _build_structure(self):
        rs, r = self.rs, self.rank
        C = np.zeros((self.dim, self.dim, self.dim), dtype=np.int64)
        for i in range(r):
            for b in rs.roots:
                kb = self.e_index(b)
                v = rs.pairing(b, i)
                C[i, kb, kb] = v
                C[kb, i, kb] = -v
        for a in rs.roots:
            ka = self.e_index(a)
            cor = rs.coroot(a)
            kn = self.e_index(neg(a))
            for j in range(r):
                C[ka, kn, j] = cor[j]
            for b in rs.roots:
                n = self.constants.get((a, b), 0)
                if n:
                    C[ka, self.e_index(b), self.e_index(_add(a, b))] = n
        return C

    def m(self, a, b):
        """Integer structure constant ``N(a, b)`` (0 when ``a+b`` is not a root)."""
        return self.constants.get((tuple(a), tuple(b)), 0)

    # derived exact data ---------------------------------------------------
    @cached_property
    def ad(self):
        """Adjoint matrices: ``ad[i][:, j]`` is ``[b_i, b_j]``."""
        return np.transpose(self.structure, (0, 2, 1)).copy()

    @cached_property
    def killing_gram(self):
        """``K[i, j] = tr(ad b_i ad b_j)``, exact integers."""
        C = self.structure
        return np.einsum("ikl,jlk->ij", C, C)

    def jacobi_residual(self):
        """Largest absolute coefficient of the Jacobiator over basis triples."""
        C = self.structure
        t = np.einsum("ijl,lkm->ijkm", C, C)
        jac = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
        return int(np.abs(jac).max())

    def killing_invariance_residual(self):
        C, K = self.structure, self.killing_gram
        lhs = np.einsum("ijl,lk->ijk", C, K)
        rhs = np.einsum("il,jkl->ijk", K, C)
        return int(np.abs(lhs - rhs).max())

    def antisymmetry_residual(self):
        """Max violation of ``N(-a,-b) = -N(a,b)`` and ``N(b,a) = -N(a,b)``."""
        worst = 0
        for (a, b), n in self.constants.items():
            worst = max(worst, abs(self.m(neg(a), neg(b)) + n), abs(self.m(b, a) + n))
        return worst

    @cached_property
    def _killing_h_inverse(self):
        Kh = sympy.Matrix(self.killing_gram[: self.rank, : self.rank].tolist())
        return Kh.inv()

    def killing_dual(self, a):
        """Coordinates over ``h_i`` of ``H_a`` with ``<<H, H_a>> = a(H)``."""
        vals = sympy.Matrix([self.rs.pairing(a, i) for i in range(self.rank)])
        c = self._killing_h_inverse * vals
        return tuple(Fraction(int(x.p), int(x.q)) for x in c)

    def killing_root_length_sq(self, a):
        """``<<a, a>>`` for the Killing form transported to ``h*``."""
        c = self.killing_dual(a)
        return sum((c[i] * self.rs.pairing(a, i) for i in range(self.rank)), Fraction(0))

    def paper_scale_sq(self, a):
        """``c_a**2`` with ``E_a = c_a e_a`` in the Killing-normalized basis."""
        return self.killing_root_length_sq(a) / 2

    def paper_structure_constant(self, a, b):
        """``m_{a,b}`` for Killing-normalized root vectors, as an exact sympy number."""
        n = self.m(a, b)
        if n == 0:
            return sympy.Integer(0)
        q = self.paper_scale_sq(a) * self.paper_scale_sq(b) / self.paper_scale_sq(_add(a, b))
        return n * sympy.sqrt(sympy.Rational(q.numerator, q.denominator))

    # elements ------------------------------------------------------------
    def zero(self):
        return AlgebraElement(self.key, (Fraction(0),) * self.dim, (Fraction(0),) * self.dim)

    def basis(self, k):
        re = [Fraction(0)] * self.dim
        re[k] = Fraction(1)
        return AlgebraElement(self.key, tuple(re), (Fraction(0),) * self.dim)

    def h(self, i):
        return self.basis(i)

    def e(self, a):
        return self.basis(self.e_index(a))

    def H(self, a):
        """Chevalley coroot element ``h_a = [e_a, e_-a]``."""
        return self.element([Fraction(c) for c in self.rs.coroot(tuple(a))] + [0] * len(self.rs.roots))

    def paper_H(self, a):
        """Killing-normalized ``H_a``."""
        return self.element(list(self.killing_dual(tuple(a))) + [0] * len(self.rs.roots))

    def element(self, re, im=None):
        re = tuple(Fraction(x) for x in re)
        im = tuple(Fraction(x) for x in im) if im is not None else (Fraction(0),) * self.dim
        if len(re) != self.dim or len(im) != self.dim:
            raise UsageError(f"expected {self.dim} coordinates")
        return AlgebraElement(self.key, re, im)

    def root_value(self, a, x):
        """``a(x)`` for ``x`` in the Cartan subalgebra (exact, complex as sympy)."""
        if any(x.re[self.rank:]) or any(x.im[self.rank:]):
            raise UsageError("element is not in the Cartan subalgebra")
        re = sum((x.re[i] * self.rs.pairing(a, i) for i in range(self.rank)), Fraction(0))
        im = sum((x.im[i] * self.rs.pairing(a, i) for i in range(self.rank)), Fraction(0))
        return _exact(re, im)

    def to_dict(self):
        d = self.rs.to_dict()
        d["structure_constants"] = {
            _root_key(a) + "|" + _root_key(b): n for (a, b), n in sorted(self.constants.items())
        }
        d["coroots"] = {_root_key(a): list(self.rs.coroot(a)) for a in self.rs.positive}
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"


def _root_key(a):
    return ",".join(str(x) for x in a)


def _exact(re, im):
    return sympy.Rational(re.numerator, re.denominator) + sympy.I * sympy.Rational(
        im.numerator, im.denominator)


_CACHE = {}


def chevalley_constants(rs):
    """Return the (cached) :class:`WeylBasis` of ``rs``."""
    key = (rs.series, rs.rank)
    wb = _CACHE.get(key)
    if wb is None or wb.rs != rs:
        wb = _CACHE[key] = WeylBasis(rs)
    return wb


def weyl_basis(series, rank):
    return chevalley_constants(build_root_system(series, rank))


@dataclass(frozen=True)
class AlgebraElement:
    """Exact complex-rational coordinates over a Chevalley basis."""

    algebra: tuple
    re: tuple
    im: tuple

    def _check(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        if other.algebra != self.algebra:
            raise UsageError(f"elements of different algebras {self.algebra} and {other.algebra}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return AlgebraElement(self.algebra, tuple(a + b for a, b in zip(self.re, other.re)),
                              tuple(a + b for a, b in zip(self.im, other.im)))

    def __neg__(self):
        return AlgebraElement(self.algebra, tuple(-a for a in self.re), tuple(-a for a in self.im))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        c = Fraction(c)
        return AlgebraElement(self.algebra, tuple(c * a for a in self.re), tuple(c * a for a in self.im))

    __rmul__ = __mul__

    def times_i(self):
        return AlgebraElement(self.algebra, tuple(-a for a in self.im), self.re)

    def conj(self):
        return AlgebraElement(self.algebra, self.re, tuple(-a for a in self.im))

    def is_zero(self):
        return not any(self.re) and not any(self.im)

    def as_complex(self):
        return np.array([complex(a, b) for a, b in zip(self.re, self.im)])


def _bilinear(C, x, y):
    out = [Fraction(0)] * C.shape[2]
    nx = [(i, v) for i, v in enumerate(x) if v]
    ny = [(j, v) for j, v in enumerate(y) if v]
    for i, xv in nx:
        Ci = C[i]
        for j, yv in ny:
            row = Ci[j]
            for k in np.flatnonzero(row):
                out[k] += xv * yv * int(row[k])
    return out


def _wb_for(x):
    return weyl_basis(*x.algebra)


def bracket(x, y):
    """Exact Lie bracket of two elements of the same algebra."""
    if x.algebra != y.algebra:
        raise UsageError("bracket of elements from different algebras")
    C = _wb_for(x).structure
    rr = _bilinear(C, x.re, y.re)
    ii = _bilinear(C, x.im, y.im)
    ri = _bilinear(C, x.re, y.im)
    ir = _bilinear(C, x.im, y.re)
    return AlgebraElement(x.algebra, tuple(a - b for a, b in zip(rr, ii)),
                          tuple(a + b for a, b in zip(ri, ir)))


def killing_form(x, y):
    """Exact Killing form ``tr(ad x ad y)``; returns a sympy number."""
    if x.algebra != y.algebra:
        raise UsageError("Killing form of elements from different algebras")
    K = _wb_for(x).killing_gram

    def q(u, v):
        return sum((u[i] * v[j] * int(K[i, j]) for i in range(len(u)) if u[i]
                    for j in range(len(v)) if v[j]), Fraction(0))

    return _exact(q(x.re, y.re) - q(x.im, y.im), q(x.re, y.im) + q(x.im, y.re))
