import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thompson_lie.errors import ConfigurationError, UsageError
from thompson_lie.group_geometry import (
    catalog_entry,
    dagger,
    random_k0,
    random_unitary,
    twisted_action,
)
from thompson_lie.thompson import (
    OptimizerConfig,
    OrbitLabel,
    additive_residual,
    combine,
    dressing_factors,
    dressing_orbit_point,
    feasibility_search,
    membership,
    multiplicative_residual,
    orbit_point,
    polygon_margin,
    rank1_oracle,
    sample_label,
    sample_rank1_sides,
    stabilizer_sample,
    thompson_compare,
)

SL2R = catalog_entry("sl2r")
SL3R = catalog_entry("sl3r")
SU21 = catalog_entry("su21")
ROT = np.array([[0, -1], [1, 0]], dtype=complex)
FAST = OptimizerConfig(restarts=8)


def rank1(r, entry=SL2R):
    return OrbitLabel.rank1(entry, r)


# ---------------------------------------------------------------------------
# labels and orbits
# ---------------------------------------------------------------------------
def test_rank1_label_has_requested_side_lengths():
    for entry in (SL2R, SU21, catalog_entry("su31")):
        lab = rank1([0.3, 0.5, 0.0], entry)
        assert np.allclose(lab.side_lengths(), [0.3, 0.5, 0.0])


def test_label_validation():
    with pytest.raises(UsageError):
        OrbitLabel(SL3R, ((-1.0, 0.0, 1.0),))
    with pytest.raises(UsageError):
        OrbitLabel(SL3R, ((1.0, 0.0),))
    with pytest.raises(UsageError):
        OrbitLabel(SL3R, ())
    with pytest.raises(UsageError):
        rank1([-0.1, 1.0])


def test_orbit_point_examples():
    lam = rank1([0.4]).matrices[0]
    assert np.allclose(orbit_point(lam, np.eye(2)), lam)
    assert np.allclose(dressing_orbit_point(np.diag(np.exp(np.diag(lam))), np.eye(2)), np.diag(np.exp(np.diag(lam))))
    turned = orbit_point(lam, ROT)
    assert np.allclose(turned, -lam)
    assert np.allclose(np.linalg.eigvalsh(turned), np.linalg.eigvalsh(lam))


def test_membership_examples():
    rng = np.random.default_rng(0)
    lam = OrbitLabel(SL3R, ((1.0, 0.2, -1.2),)).matrices[0]
    ok, d = membership(lam, lam, SL3R)
    assert ok and d == 0
    ok, _ = membership(2 * lam, lam, SL3R)
    assert not ok
    k = random_k0(rng, SL3R)
    ok, d = membership(orbit_point(lam, k), lam, SL3R)
    assert ok and d < 1e-9
    b = dressing_orbit_point(np.diag(np.exp(np.diag(lam).real)).astype(complex), k)
    ok, d = membership(b, lam, SL3R, in_group=True)
    assert ok and d < 1e-9
    with pytest.raises(UsageError):
        membership(1j * lam, lam, SL3R)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------
def test_zero_label_has_zero_residuals():
    rng = np.random.default_rng(1)
    lab = rank1([0.0, 0.0, 0.0])
    ks = [random_k0(rng, SL2R) for _ in range(3)]
    assert additive_residual(ks, lab) == 0
    assert multiplicative_residual(ks, lab) < 1e-14


def test_two_gon_closes_with_quarter_turn():
    lab = rank1([0.7, 0.7])
    ks = [np.eye(2), ROT]
    assert additive_residual(ks, lab) < 1e-14
    assert multiplicative_residual(ks, lab) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_residual_invariances(seed):
    rng = np.random.default_rng(seed)
    lab = sample_label(rng, SL3R, 3)
    ks = [random_k0(rng, SL3R) for _ in range(3)]
    base = additive_residual(ks, lab)
    k = random_k0(rng, SL3R)
    assert additive_residual([k @ x for x in ks], lab) == pytest.approx(base, abs=1e-12)
    ms = [stabilizer_sample(rng, SL3R, lam) for lam in lab.matrices]
    for m, lam in zip(ms, lab.matrices):
        assert np.allclose(m @ lam, lam @ m, atol=1e-12)
    assert additive_residual([x @ m for x, m in zip(ks, ms)], lab) == pytest.approx(base, abs=1e-12)
    mult = multiplicative_residual(ks, lab)
    assert multiplicative_residual([x @ m for x, m in zip(ks, ms)], lab) == pytest.approx(mult, abs=1e-10)


def test_zero_set_is_twisted_invariant():
    lab = rank1([0.5, 0.5, 0.5])
    rep = feasibility_search(lab, "multiplicative", FAST)
    assert rep.decision == "feasible"
    bs = dressing_factors(rep.witness, lab)
    rng = np.random.default_rng(2)
    for _ in range(5):
        moved = twisted_action(random_k0(rng, SL2R), bs)
        prod = moved[0] @ moved[1] @ moved[2]
        assert np.max(np.abs(prod - np.eye(2))) < 1e-5


# ---------------------------------------------------------------------------
# decisions
# ---------------------------------------------------------------------------
@pytest.mark.parametrize("picture", ["additive", "multiplicative"])
def test_feasibility_examples(picture):
    feas = feasibility_search(rank1([0.5, 0.5, 0.5]), picture, FAST)
    assert feas.decision == "feasible"
    assert feas.best_residual <= FAST.eps_feas
    resid = additive_residual if picture == "additive" else multiplicative_residual
    assert resid(feas.witness, rank1([0.5, 0.5, 0.5])) <= FAST.eps_feas
    infeas = feasibility_search(rank1([1.0, 0.2, 0.2]), picture, FAST)
    assert infeas.decision == "infeasible" and infeas.witness is None


def test_reversed_pair_is_feasible_in_higher_rank():
    lam = (2.0, -1.0, -1.0)
    rev = (1.0, 1.0, -2.0)
    assert feasibility_search(OrbitLabel(SL3R, (lam, rev)), "additive", FAST).decision == "feasible"
    assert feasibility_search(OrbitLabel(SL3R, (lam, lam)), "additive", FAST).decision == "infeasible"


@pytest.mark.parametrize("r,verdict", [([0.5, 0.5, 0.5], "agree-feasible"),
                                       ([1.0, 0.2, 0.2], "agree-infeasible"),
                                       ([0.0, 0.0, 0.0], "agree-feasible")])
def test_compare_examples(r, verdict):
    assert thompson_compare(rank1(r), FAST).verdict == verdict


def test_quadrilateral_with_long_side():
    lab = rank1([2.0, 1.0, 1.0, 1.0])
    assert rank1_oracle(lab) == "feasible"
    assert thompson_compare(lab, FAST).verdict == "agree-feasible"


def test_rank1_oracle_examples():
    assert rank1_oracle(rank1([1, 1, 1])) == "feasible"
    assert rank1_oracle(rank1([3, 1, 1])) == "infeasible"
    assert rank1_oracle(rank1([2, 1, 1, 1])) == "feasible"
    with pytest.raises(UsageError):
        rank1_oracle(OrbitLabel(SL3R, ((1.0, 0.0, -1.0),)))


def test_combine_table():
    assert combine("feasible", "feasible") == "agree-feasible"
    assert combine("infeasible", "infeasible") == "agree-infeasible"
    assert combine("feasible", "infeasible") == "disagree"
    assert combine("undecided", "feasible") == "undecided"


def test_budget_exhaustion_is_undecided_not_error():
    cfg = OptimizerConfig(restarts=2, max_iter=1, rounds=1)
    rep = feasibility_search(rank1([0.9, 0.5, 0.5]), "additive", cfg)
    assert rep.decision in ("undecided", "feasible")
    if rep.decision == "undecided":
        assert "not-converged" in rep.diagnostics


def test_sampling_respects_margin():
    rng = np.random.default_rng(3)
    for _ in range(50):
        r = sample_rank1_sides(rng, 3, 0.05)
        assert abs(polygon_margin(r)) >= 0.05 and np.all((0 <= r) & (r <= 1))


def test_sampled_labels_in_chamber():
    rng = np.random.default_rng(4)
    for key in ("sl3r", "su22", "su21"):
        e = catalog_entry(key)
        lab = sample_label(rng, e, 3)
        assert all(e.in_chamber(c) for c in lab.coords)


# ---------------------------------------------------------------------------
# configuration and determinism
# ---------------------------------------------------------------------------
def test_config_validation():
    with pytest.raises(ConfigurationError):
        OptimizerConfig(eps_feas=1e-2, eps_infeas=1e-3)
    with pytest.raises(ConfigurationError):
        OptimizerConfig.from_mapping({"restart": 3})
    with pytest.raises(ConfigurationError):
        OptimizerConfig.from_mapping({"restarts": "many"})
    cfg = OptimizerConfig.from_mapping({"restarts": 4}, seed=9, eps_feas=None)
    assert cfg.restarts == 4 and cfg.seed == 9 and cfg.eps_feas == 1e-6


def test_threads_do_not_change_decision_fields(monkeypatch):
    lab = rank1([0.6, 0.3, 0.4])
    cfg = OptimizerConfig(restarts=16, batch=4, seed=5)
    serial = thompson_compare(lab, cfg).decision_fields()
    monkeypatch.setenv("THOMPSON_LIE_THREADS", "3")
    threaded = thompson_compare(lab, cfg).decision_fields()
    assert serial == threaded


def test_report_serializes():
    rep = feasibility_search(rank1([0.5, 0.5, 0.5]), "additive", FAST)
    d = rep.to_dict()
    assert d["decision"] == "feasible" and len(d["witness"]) == 3
    assert d["seed"] == FAST.seed and d["restarts"][0]["seed"] == FAST.seed
