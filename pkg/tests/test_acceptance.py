"""Acceptance criteria 1-9 at their stated tolerances and time budgets.

Each test appends one ``PASS``/``FAIL`` line to the terminal summary.
"""
import json
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from thompson_lie.group_geometry import catalog_entry, geometry_suite
from thompson_lie.poisson_family import poisson_suite
from thompson_lie.real_forms import (
    DiagramAutomorphism,
    check_iwasawa_form,
    compact_form_theta,
    diagram_automorphisms,
    extract_satake,
    inner_class,
    satake_catalog,
    satake_inner_class,
    tau_d,
    tau_from_satake,
)
from thompson_lie.root_structure import WeylBasis, build_root_system, weyl_basis
from thompson_lie.thompson import (
    OptimizerConfig,
    OrbitLabel,
    rank1_oracle,
    sample_label,
    sample_rank1_sides,
    thompson_compare,
)

pytestmark = pytest.mark.acceptance

SEEDS = {5: 20260105, 6: 20260106, 7: 20260107}
RESIDUAL_GAP = 0.05


def record(number, ok, detail):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


# ---------------------------------------------------------------------------
# 1-3: exact algebra
# ---------------------------------------------------------------------------
def test_criterion_1_exact_algebra():
    t0 = time.perf_counter()
    worst = {}
    for series, rank in [("A", 1), ("A", 2), ("A", 3), ("A", 4), ("B", 2), ("C", 3), ("D", 4)]:
        wb = WeylBasis(build_root_system(series, rank))
        worst[f"{series}{rank}"] = (wb.jacobi_residual(), wb.antisymmetry_residual(),
                                    wb.killing_invariance_residual())
    dt = time.perf_counter() - t0
    ok = all(v == (0, 0, 0) for v in worst.values()) and dt < 10
    record(1, ok, f"jacobi/antisymmetry/killing residuals all 0 on 7 systems; {dt:.2f} s")
    assert all(v == (0, 0, 0) for v in worst.values()), worst
    assert dt < 10


def test_criterion_2_involutions():
    t0 = time.perf_counter()
    failures = []
    count = 0
    for rank in (1, 2, 3, 4):
        wb = weyl_basis("A", rank)
        theta = compact_form_theta(wb)
        for d in diagram_automorphisms(wb.rs):
            if not d.is_involutive:
                continue
            count += 1
            t = tau_d(wb, d)
            perm = t.root_permutation()
            if not t.squared_is_identity():
                failures.append((rank, d.describe(), "square"))
            if perm is None or not all(wb.rs.is_positive(perm[a]) for a in wb.rs.positive):
                failures.append((rank, d.describe(), "positivity"))
            if inner_class(t, theta).perm != d.perm:
                failures.append((rank, d.describe(), "inner class"))
    dt = time.perf_counter() - t0
    record(2, not failures and dt < 10, f"{count} involutions, {len(failures)} failures; {dt:.2f} s")
    assert not failures
    assert dt < 10


def test_criterion_3_satake_round_trip():
    t0 = time.perf_counter()
    failures = []
    catalog = satake_catalog()
    for name, sd in catalog.items():
        wb = weyl_basis(sd.series, sd.rank)
        tau = tau_from_satake(wb, sd)
        if extract_satake(tau) != sd:
            failures.append((name, "round trip"))
        expected = (DiagramAutomorphism.identity(wb.rs) if name.startswith("su")
                    else DiagramAutomorphism.minus_w0(wb.rs))
        if satake_inner_class(sd, wb.rs).perm != expected.perm:
            failures.append((name, "inner class"))
        if not check_iwasawa_form(tau, compact_form_theta(wb), wb).all_pass:
            failures.append((name, "iwasawa conditions"))
    dt = time.perf_counter() - t0
    record(3, not failures and dt < 30, f"{len(catalog)} diagrams, {len(failures)} failures; {dt:.2f} s")
    assert not failures
    assert dt < 30


# ---------------------------------------------------------------------------
# 4: group geometry
# ---------------------------------------------------------------------------
def test_criterion_4_group_geometry():
    t0 = time.perf_counter()
    failed = []
    for key in ("sl3r", "su21", "su31"):
        for c in geometry_suite(catalog_entry(key), samples=200, seed=4, l=3):
            if not c.passed:
                failed.append((key, c.name, c.residual))
    dt = time.perf_counter() - t0
    record(4, not failed and dt < 60, f"sl3r/su21 (SL(3,C)) and su31 (SL(4,C)), 200 samples, "
                                      f"{len(failed)} failed checks; {dt:.2f} s")
    assert not failed
    assert dt < 60


# ---------------------------------------------------------------------------
# 5-7: Thompson agreement
# ---------------------------------------------------------------------------
def _rank1_run(key, samples, seed):
    entry = catalog_entry(key)
    rng = np.random.default_rng(seed)
    cfg = OptimizerConfig(seed=seed)
    rows = []
    for _ in range(samples):
        label = OrbitLabel.rank1(entry, sample_rank1_sides(rng, 3, 0.05))
        cmp = thompson_compare(label, cfg)
        rows.append((rank1_oracle(label), cmp))
    return rows


def _rank1_stats(rows):
    n = len(rows)
    stats = {}
    for pic in ("additive", "multiplicative"):
        decisions = [getattr(c, pic).decision for _, c in rows]
        stats[pic] = {
            "match": sum(d == o for d, (o, _) in zip(decisions, rows)) / n,
            "wrong": sum(d not in ("undecided", o) for d, (o, _) in zip(decisions, rows)),
        }
    verdicts = [c.verdict for _, c in rows]
    stats["agree"] = sum(v.startswith("agree") for v in verdicts) / n
    stats["disagree"] = verdicts.count("disagree")
    return stats


def _rank1_ok(s):
    return (all(s[p]["match"] >= 0.99 and s[p]["wrong"] == 0 for p in ("additive", "multiplicative"))
            and s["agree"] >= 0.99 and s["disagree"] == 0)


def _fields(rows):
    return json.dumps([c.decision_fields() for _, c in rows], sort_keys=True)


def _criterion_rank1(number, key, samples, budget):
    t0 = time.perf_counter()
    rows = _rank1_run(key, samples, SEEDS[number])
    dt = time.perf_counter() - t0
    s = _rank1_stats(rows)
    ok = _rank1_ok(s) and dt < budget
    record(number, ok, f"{key} l=3 n={samples}: oracle match add {s['additive']['match']:.1%} "
                       f"mult {s['multiplicative']['match']:.1%}, agree {s['agree']:.1%}, "
                       f"disagree {s['disagree']}; {dt:.1f} s")
    assert _rank1_ok(s), s
    assert dt < budget


def test_criterion_5_rank_one_split():
    _criterion_rank1(5, "sl2r", 200, 120)


def test_criterion_6_rank_one_non_quasi_split():
    _criterion_rank1(6, "su31", 100, 300)


def _higher_rank_run(samples, seed):
    """Keep a sample when the additive picture is feasible or clearly infeasible."""
    entry = catalog_entry("sl3r")
    rng = np.random.default_rng(seed)
    cfg = OptimizerConfig(seed=seed)
    kept, dropped = [], 0
    while len(kept) < samples:
        label = sample_label(rng, entry, 3)
        cmp = thompson_compare(label, cfg)
        add = cmp.additive
        if add.decision == "feasible" or (add.decision == "infeasible" and add.best_residual >= RESIDUAL_GAP):
            kept.append((None, cmp))
        else:
            dropped += 1
    return kept, dropped


def test_criterion_7_higher_rank():
    t0 = time.perf_counter()
    rows, dropped = _higher_rank_run(100, SEEDS[7])
    dt = time.perf_counter() - t0
    verdicts = [c.verdict for _, c in rows]
    dis, und = verdicts.count("disagree"), verdicts.count("undecided")
    ok = dis == 0 and und <= 10 and dt < 600
    record(7, ok, f"sl3r l=3 n=100 ({dropped} filtered): disagree {dis}, undecided {und}, "
                  f"agree-feasible {verdicts.count('agree-feasible')}; {dt:.1f} s")
    assert dis == 0 and und <= 10
    assert dt < 600


# ---------------------------------------------------------------------------
# 8: Poisson suite
# ---------------------------------------------------------------------------
def test_criterion_8_poisson():
    t0 = time.perf_counter()
    taus = [catalog_entry(k).tau_d for k in ("sl2r", "su11")]
    checks = poisson_suite(n=2, samples=200, seed=8, tau_ds=taus)
    dt = time.perf_counter() - t0
    names = {c.name for c in checks}
    required = {"multiplicativity", "tau_d_anti_poisson", "leaf_rank_equality", "leaf_containment",
                "jacobi_schouten", "gauge_zero_identity", "scaling_consistency",
                "twisted_s0_is_diagonal", "moment_composition_s0"}
    failed = [(c.name, c.residual) for c in checks if not c.passed]
    ok = not failed and required <= names and dt < 120
    record(8, ok, f"SL(2,C) n=200, {len(checks)} invariants, {len(failed)} failed; {dt:.1f} s")
    assert required <= names
    assert not failed
    assert dt < 120


# ---------------------------------------------------------------------------
# 9: determinism
# ---------------------------------------------------------------------------
def test_criterion_9_determinism():
    t0 = time.perf_counter()
    same = {}
    for number, key, n in ((5, "sl2r", 200), (6, "su31", 100)):
        a = _fields(_rank1_run(key, n, SEEDS[number]))
        b = _fields(_rank1_run(key, n, SEEDS[number]))
        same[number] = a == b
    a = _fields(_higher_rank_run(100, SEEDS[7])[0])
    b = _fields(_higher_rank_run(100, SEEDS[7])[0])
    same[7] = a == b
    dt = time.perf_counter() - t0
    record(9, all(same.values()), f"decision fields byte-identical on repeat: {same}; {dt:.1f} s")
    assert all(same.values())
