"""Feasibility of the additive and multiplicative polygon problems.

For an orbit label ``Lambda = (lambda_1, ..., lambda_l)`` in the closed
positive chamber of ``a0`` the additive problem asks for ``k_j`` in ``K0``
with ``sum_j k_j lambda_j k_j^{-1} = 0``, and the multiplicative problem asks
for ``b_j`` in the dressing orbits through ``exp(lambda_j)`` with
``b_1 ... b_l = e``.  Both are decided by seeded multistart gradient descent
on ``K0^l`` (L-BFGS with finite-difference gradients in exponential
coordinates); the answer is three valued.

The optimizer never builds the dressing factors.  With
``g = u_1 a_1 u_2 a_2 ... u_l a_l`` the sequential Iwasawa factorization gives
``g = b_1 ... b_l q`` with ``b_j`` in the dressing orbit of ``a_j``, so
``g g^* = (b_1 ... b_l)(b_1 ... b_l)^*`` and the residual only needs ``g``.
Every such tuple arises from some ``u``.
"""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigurationError, UsageError
from .group_geometry import (
    E_inverse,
    GroupCatalogEntry,
    dagger,
    dressing,
    encode_matrix,
    expm_skew,
    iwasawa,
    is_in_an,
    killing,
    orbit_invariants,
    sigma,
)

DECISIONS = ("feasible", "infeasible", "undecided")
VERDICTS = ("agree-feasible", "agree-infeasible", "disagree", "undecided")
PICTURES = ("additive", "multiplicative")


# ---------------------------------------------------------------------------
# orbit labels
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class OrbitLabel:
    """``Lambda = (lambda_1, ..., lambda_l)`` in catalog coordinates of ``a0``."""

    entry: GroupCatalogEntry = field(repr=False)
    coords: tuple

    def __post_init__(self):
        cs = tuple(tuple(float(x) for x in c) for c in self.coords)
        if not cs:
            raise UsageError("an orbit label needs at least one point")
        for c in cs:
            self.entry.a0_matrix(c)
            if not self.entry.in_chamber(c, tol=1e-12):
                raise UsageError(f"{c} is not in the closed positive chamber of {self.entry.key}")
        object.__setattr__(self, "coords", cs)

    @classmethod
    def rank1(cls, entry, r):
        """``lambda_j = r_j H0`` with ``H0`` of unit Killing norm."""
        r = [float(x) for x in r]
        if any(x < 0 for x in r):
            raise UsageError("side lengths must be nonnegative")
        h0 = entry.a0_coords(entry.unit_a0())
        return cls(entry, tuple(tuple(x * h0) for x in r))

    @property
    def length(self):
        return len(self.coords)

    @property
    def matrices(self):
        return np.array([self.entry.a0_matrix(c) for c in self.coords])

    @property
    def exponentials(self):
        return np.array([np.diag(np.exp(np.real(np.diagonal(m)))).astype(np.complex128)
                         for m in self.matrices])

    def side_lengths(self):
        m = self.matrices
        return np.sqrt(np.maximum(killing(m, m).real, 0.0))

    def to_list(self):
        return [list(c) for c in self.coords]


# ---------------------------------------------------------------------------
# orbits and membership
# ---------------------------------------------------------------------------
def orbit_point(lam, k):
    """``k lambda k^{-1}``, a point of the orbit through ``lambda``."""
    return k @ lam @ dagger(k)


def dressing_orbit_point(a, k):
    """``k . a``, a point of the dressing orbit through ``a``."""
    return dressing(k, a)


def membership(x, lam, entry, tol=1e-8, in_group=False):
    """Whether ``x`` lies on the orbit through ``lam``.

    Parameters
    ----------
    x : ndarray
        A point of ``p0`` or, with ``in_group``, of ``A0N0`` (tested through
        ``E^{-1}``).

    Returns
    -------
    (bool, float)
        Membership flag and the max distance between sorted spectra.

    Raises
    ------
    UsageError
        If ``x`` is not in ``p0`` (respectively ``A0N0``).
    """
    x = np.asarray(x, dtype=np.complex128)
    if in_group:
        if not is_in_an(x, tol=1e-8) or np.max(np.abs(sigma(x, entry) - x)) > 1e-8:
            raise UsageError("point is not in A0N0")
        xi = E_inverse(x)
    else:
        xi = x
        if np.max(np.abs(xi - dagger(xi))) > 1e-8 or np.max(np.abs(entry.dtau(xi) - xi)) > 1e-8:
            raise UsageError("point is not in p0")
    dist = float(np.max(np.abs(orbit_invariants(xi) - orbit_invariants(lam))))
    return dist <= tol, dist


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------
def _additive_sq(ks, lams):
    S = np.einsum("...jab,jbc,...jdc->...ad", ks, lams, np.conj(ks))
    return np.sum(np.abs(S) ** 2, axis=(-2, -1))


def _chain_sq(us, exps):
    g = us[..., 0, :, :] @ exps[0]
    for j in range(1, exps.shape[0]):
        g = g @ us[..., j, :, :] @ exps[j]
    w = np.linalg.eigvalsh(g @ dagger(g))
    return 0.25 * np.sum(np.log(np.maximum(w, 1e-300)) ** 2, axis=-1)


def additive_residual(ks, label):
    """``|| sum_j k_j lambda_j k_j^{-1} ||_F``."""
    return float(np.sqrt(_additive_sq(np.asarray(ks, dtype=np.complex128), label.matrices)))


def dressing_factors(ks, label):
    return [dressing(k, a) for k, a in zip(ks, label.exponentials)]


def multiplicative_residual(ks, label):
    """``|| E^{-1}(b_1 ... b_l) ||_F`` with ``b_j = k_j . exp(lambda_j)``."""
    bs = dressing_factors(ks, label)
    P = bs[0]
    for b in bs[1:]:
        P = P @ b
    return float(np.linalg.norm(E_inverse(P)))


def chain_to_dressing(us, label):
    """Convert chain parameters ``u`` into ``k`` with the same dressing factors."""
    ks, q = [], np.eye(label.entry.n, dtype=np.complex128)
    for u, a in zip(us, label.exponentials):
        k = q @ u
        ks.append(k)
        q = iwasawa(k @ a).k
    return np.array(ks)


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class OptimizerConfig:
    """Settings of the multistart search.

    ``eps_feas`` and ``eps_infeas`` bound the decision band; restart ``i``
    is seeded with ``seed + i``.
    """

    restarts: int = 32
    max_iter: int = 2000
    eps_feas: float = 1e-6
    eps_infeas: float = 1e-2
    fd_step: float = 1e-5
    grad_tol: float = 1e-6
    rounds: int = 4
    batch: int = 8
    seed: int = 0

    def __post_init__(self):
        if min(self.restarts, self.max_iter, self.batch, self.rounds) < 1:
            raise ConfigurationError("restarts, max_iter, batch and rounds must be positive")
        if not (0 < self.eps_feas < self.eps_infeas):
            raise ConfigurationError("need 0 < eps_feas < eps_infeas")
        if self.fd_step <= 0 or self.grad_tol <= 0:
            raise ConfigurationError("fd_step and grad_tol must be positive")

    @classmethod
    def from_mapping(cls, data, **overrides):
        known = {f.name: f.type for f in fields(cls)}
        merged = dict(data or {})
        merged.update({k: v for k, v in overrides.items() if v is not None})
        unknown = sorted(set(merged) - set(known))
        if unknown:
            raise ConfigurationError(f"unknown optimizer setting(s): {', '.join(unknown)}")
        kwargs = {}
        for k, v in merged.items():
            try:
                kwargs[k] = int(v) if known[k] == "int" else float(v)
            except (TypeError, ValueError) as exc:
                raise ConfigurationError(f"optimizer setting {k!r} has invalid value {v!r}") from exc
        return cls(**kwargs)

    def to_dict(self):
        return asdict(self)


@dataclass
class RestartTrace:
    index: int
    seed: int
    residual: float
    iterations: int
    converged: bool
    diverged: bool

    def to_dict(self):
        return asdict(self)


@dataclass
class FeasibilityReport:
    """Outcome of :func:`feasibility_search`."""

    group: str
    picture: str
    label: list
    decision: str
    best_residual: float
    best_restart: int
    witness: list | None
    restarts: list
    seed: int
    diagnostics: list
    wall_time: float = 0.0

    def decision_fields(self):
        return {"group": self.group, "picture": self.picture, "decision": self.decision,
                "best_residual": self.best_residual, "best_restart": self.best_restart,
                "seed": self.seed}

    def to_dict(self):
        out = self.decision_fields()
        out.update(label=self.label, diagnostics=list(self.diagnostics),
                   restarts=[t.to_dict() for t in self.restarts],
                   witness=None if self.witness is None else [encode_matrix(k) for k in self.witness],
                   wall_time=self.wall_time)
        return out


class _Objective:
    """Squared residual on ``K0^l`` with ``k_1`` pinned to the identity."""

    def __init__(self, label, picture):
        if picture not in PICTURES:
            raise UsageError(f"picture must be one of {PICTURES}")
        self.label, self.picture = label, picture
        self.lams = label.matrices
        self.exps = label.exponentials
        self.basis = np.array(label.entry.k0_basis)
        self.l, self.m = label.length, len(self.basis)

    @property
    def dim(self):
        return (self.l - 1) * self.m

    def value(self, ks):
        if self.picture == "additive":
            return _additive_sq(ks, self.lams)
        return _chain_sq(ks, self.exps)

    def chart(self, base):
        """Exponential chart ``c -> (k_1, k_j exp(eta_j(c)))`` centred at ``base``."""
        def ks_of(C):
            B = C.shape[0]
            eta = np.tensordot(C.reshape(B, self.l - 1, self.m), self.basis, axes=(2, 0))
            out = np.repeat(base[None], B, axis=0)
            out[:, 1:] = base[None, 1:] @ expm_skew(eta)
            return out
        return ks_of

    def value_and_gradient(self, c, ks_of, h):
        """Value and central-difference gradient, evaluated in one batch."""
        E = h * np.eye(self.dim)
        f = self.value(ks_of(np.vstack([c[None], c + E, c - E])))
        return f[0], (f[1:self.dim + 1] - f[self.dim + 1:]) / (2 * h)


def _initial_points(obj, seeds):
    entry = obj.label.entry
    ks = np.empty((len(seeds), obj.l, entry.n, entry.n), dtype=np.complex128)
    for r, s in enumerate(seeds):
        rng = np.random.default_rng(s)
        ks[r, 0] = np.eye(entry.n)
        for j in range(1, obj.l):
            eta = np.tensordot(rng.standard_normal(obj.m) * np.pi, obj.basis, axes=(0, 0))
            ks[r, j] = expm_skew(eta)
    return ks


def _descend(obj, seeds, cfg):
    """L-BFGS on each restart, re-centring the exponential chart between rounds."""
    ks = _initial_points(obj, seeds)
    R = len(seeds)
    res = np.sqrt(np.abs(obj.value(ks)))
    iters = np.zeros(R, dtype=int)
    converged = np.ones(R, dtype=bool)
    diverged = ~np.isfinite(res)
    if obj.dim == 0:
        return ks, res, iters, converged, diverged
    target = (0.1 * cfg.eps_feas) ** 2

    def stop_early(intermediate_result):
        if intermediate_result.fun <= target:
            raise StopIteration

    for r in range(R):
        base = ks[r]
        f = np.inf
        ok = False
        for _round in range(cfg.rounds):
            ks_of = obj.chart(base)
            out = minimize(obj.value_and_gradient, np.zeros(obj.dim), args=(ks_of, cfg.fd_step),
                           jac=True, method="L-BFGS-B", callback=stop_early,
                           options={"maxiter": cfg.max_iter, "gtol": 1e-14, "ftol": 1e-15})
            iters[r] += int(out.nit)
            base = ks_of(np.asarray(out.x)[None])[0]
            f, grad = obj.value_and_gradient(np.zeros(obj.dim), obj.chart(base), cfg.fd_step)
            if not (np.isfinite(f) and np.all(np.isfinite(grad))):
                diverged[r] = True
                break
            # gradient of the residual itself, not of its square
            ok = f <= target or np.linalg.norm(grad) / (2 * np.sqrt(f)) <= cfg.grad_tol
            if ok or iters[r] >= cfg.max_iter:
                break
        ks[r] = base
        res[r] = np.sqrt(abs(f))
        converged[r] = bool(ok) and not diverged[r]
    return ks, res, iters, converged, diverged


def _threads():
    try:
        return max(1, int(os.environ.get("THOMPSON_LIE_THREADS", "1")))
    except ValueError:
        return 1


def feasibility_search(label, picture, config=None):
    """Decide one polygon problem.

    Returns
    -------
    FeasibilityReport
        ``feasible`` if some restart reaches ``eps_feas``; ``infeasible`` if
        every restart converged with residual at least ``eps_infeas``;
        otherwise ``undecided``.  Restarts are processed in batches and the
        search stops after the batch containing the first feasible restart;
        the trace is cut after that restart, so the report does not depend
        on batching or threading.
    """
    cfg = config or OptimizerConfig()
    obj = _Objective(label, picture)
    t0 = time.perf_counter()
    chunks = [list(range(s, min(s + cfg.batch, cfg.restarts)))
              for s in range(0, cfg.restarts, cfg.batch)]

    def run(chunk):
        return chunk, _descend(obj, [cfg.seed + i for i in chunk], cfg)

    traces, best = [], None
    workers = _threads()
    results = []
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run, c) for c in chunks]
            for fut in futures:
                results.append(fut.result())
                if np.any(results[-1][1][1] <= cfg.eps_feas):
                    for later in futures:
                        later.cancel()
                    break
    else:
        for c in chunks:
            results.append(run(c))
            if np.any(results[-1][1][1] <= cfg.eps_feas):
                break
    stop = False
    for chunk, (ks, res, iters, conv, div) in results:
        for r, i in enumerate(chunk):
            traces.append(RestartTrace(i, cfg.seed + i, float(res[r]), int(iters[r]),
                                       bool(conv[r]), bool(div[r])))
            if best is None or (res[r], i) < (best[0], best[1]):
                best = (float(res[r]), i, ks[r])
            if res[r] <= cfg.eps_feas:
                stop = True
                break
        if stop:
            break

    witness = best[2] if picture == "additive" else chain_to_dressing(best[2], label)
    resid_fn = additive_residual if picture == "additive" else multiplicative_residual
    best_res = resid_fn(witness, label)
    diagnostics = []
    if any(t.diverged for t in traces):
        diagnostics.append("diverged")
    if not all(t.converged for t in traces):
        diagnostics.append("not-converged")
    if best_res <= cfg.eps_feas:
        decision = "feasible"
    elif (not diagnostics and min(t.residual for t in traces) >= cfg.eps_infeas
          and best_res >= cfg.eps_infeas):
        decision = "infeasible"
    else:
        decision = "undecided"
    return FeasibilityReport(
        group=label.entry.key, picture=picture, label=label.to_list(), decision=decision,
        best_residual=float(best_res), best_restart=int(best[1]),
        witness=list(witness) if decision == "feasible" else None,
        restarts=traces, seed=cfg.seed, diagnostics=diagnostics,
        wall_time=time.perf_counter() - t0)


@dataclass
class Comparison:
    verdict: str
    additive: FeasibilityReport
    multiplicative: FeasibilityReport

    def decision_fields(self):
        return {"verdict": self.verdict, "additive": self.additive.decision_fields(),
                "multiplicative": self.multiplicative.decision_fields()}

    def to_dict(self):
        return {"verdict": self.verdict, "additive": self.additive.to_dict(),
                "multiplicative": self.multiplicative.to_dict()}


def combine(dec_add, dec_mult):
    if "undecided" in (dec_add, dec_mult):
        return "undecided"
    if dec_add != dec_mult:
        return "disagree"
    return f"agree-{dec_add}"


def thompson_compare(label, config=None):
    """Run both pictures and compare their decisions."""
    add = feasibility_search(label, "additive", config)
    mult = feasibility_search(label, "multiplicative", config)
    return Comparison(combine(add.decision, mult.decision), add, mult)


def rank1_oracle(label):
    """Closed polygon inequalities ``r_j <= sum_{i != j} r_i`` in a rank-one space.

    Raises
    ------
    UsageError
        If the group does not have restricted rank one.
    """
    if label.entry.restricted_rank != 1:
        raise UsageError(f"{label.entry.key} has restricted rank {label.entry.restricted_rank}")
    r = label.side_lengths()
    total = float(np.sum(r))
    return "feasible" if all(x <= total - x + 1e-12 for x in r) else "infeasible"


def polygon_margin(r):
    """Signed distance ``sum r - 2 max r`` to the boundary of the polygon cone."""
    r = np.asarray(r, dtype=float)
    return float(np.sum(r) - 2 * np.max(r))


def sample_rank1_sides(rng, l, margin=0.05, high=1.0):
    """Uniform side lengths in ``[0, high]^l`` at distance at least ``margin`` from the boundary."""
    while True:
        r = rng.uniform(0.0, high, size=l)
        if abs(polygon_margin(r)) >= margin:
            return r


def sample_label(rng, entry, l, scale=1.0):
    """Random label with each ``lambda_j`` drawn uniformly and sorted into the chamber."""
    out = []
    for _ in range(l):
        if entry.kind == "conj":
            v = rng.uniform(-scale, scale, size=entry.n)
            v = np.sort(v - v.mean())[::-1]
        else:
            v = np.sort(rng.uniform(0.0, scale, size=entry.restricted_rank))[::-1]
        out.append(tuple(v))
    return OrbitLabel(entry, tuple(out))


def stabilizer_sample(rng, entry, lam, scale=1.0):
    """Random element of ``K0`` commuting with ``lam``."""
    basis = [x for x in entry.k0_basis]
    M = np.array([np.concatenate([(x @ lam - lam @ x).real.ravel(), (x @ lam - lam @ x).imag.ravel()])
                  for x in basis]).T
    _, s, Vt = np.linalg.svd(M)
    null = Vt[np.sum(s > 1e-10):]
    coeffs = rng.standard_normal(len(null)) @ null if len(null) else np.zeros(len(basis))
    eta = np.tensordot(coeffs * scale, np.array(basis), axes=(0, 0))
    return expm_skew(eta)


__all__ = [
    "OrbitLabel", "OptimizerConfig", "FeasibilityReport", "Comparison", "RestartTrace",
    "orbit_point", "dressing_orbit_point", "membership", "additive_residual",
    "multiplicative_residual", "dressing_factors", "chain_to_dressing", "feasibility_search",
    "thompson_compare", "rank1_oracle", "polygon_margin", "sample_rank1_sides",
    "sample_label", "stabilizer_sample"
]
