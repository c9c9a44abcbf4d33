import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thompson_lie.errors import SingularGaugeError, UsageError
from thompson_lie.group_geometry import (
    E_inverse,
    an_algebra_basis,
    catalog_entry,
    dressing,
    expm_skew,
    expm_upper,
    nu,
    random_an,
    random_unitary,
    twisted_action,
)
from thompson_lie.poisson_family import (
    BivectorAtPoint,
    GaugeForm,
    anti_poisson_residual,
    anti_poisson_residual_k,
    bullet_s,
    chart,
    dressing_vector,
    dressing_vector_exact,
    exact_two_form,
    frame_to_chart,
    from_chart,
    gauge_transform,
    image_residual,
    inverse_s,
    k_basis,
    leaf_tangency,
    m_s,
    multiplicativity_residual,
    nu_s,
    pairing,
    pairing_matrix,
    pi_AN_at,
    pi_AN_s_at,
    pi_K_at,
    poisson_suite,
    scaling_residual,
    schouten_residual,
    twisted_action_s,
    I_s,
)

SEEDS = st.integers(0, 2**32 - 1)


def bracket(a, b):
    return a @ b - b @ a


# ---------------------------------------------------------------------------
# values at special points
# ---------------------------------------------------------------------------
@pytest.mark.parametrize("n", [2, 3])
def test_vanishing_at_identity(n):
    e = np.eye(n, dtype=complex)
    assert np.max(np.abs(pi_AN_at(e).matrix)) < 1e-9
    assert np.max(np.abs(pi_K_at(e).matrix)) < 1e-12
    for s in (0.0, 0.5, 2.0):
        assert np.max(np.abs(pi_AN_s_at(e, s).matrix)) < 1e-9


def test_pi_K_vanishes_at_center():
    k = np.exp(2j * np.pi / 3) * np.eye(3)
    assert np.max(np.abs(pi_K_at(k).matrix)) < 1e-12


def test_diagonal_point_has_no_a_component():
    b = np.diag([np.e, 1 / np.e]).astype(complex)
    P = pi_AN_at(b).matrix
    assert np.max(np.abs(P[0])) < 1e-8 and np.max(np.abs(P[:, 0])) < 1e-8


def test_bivector_is_antisymmetric():
    P = BivectorAtPoint(np.eye(2), np.array([[0.0, 1.0], [3.0, 0.0]]))
    assert np.array_equal(P.matrix, -P.matrix.T)


@settings(max_examples=20, deadline=None)
@given(SEEDS)
def test_dressing_vector_matches_closed_form(seed):
    rng = np.random.default_rng(seed)
    b = random_an(rng, 3)
    for x in k_basis(3):
        assert np.allclose(dressing_vector(x, b), dressing_vector_exact(x, b), atol=1e-7)


# ---------------------------------------------------------------------------
# duality of the linearizations
# ---------------------------------------------------------------------------
@pytest.mark.parametrize("n", [2, 3])
def test_linearizations_are_dual_brackets(n):
    h = 1e-4
    V, K, C = an_algebra_basis(n), k_basis(n), pairing_matrix(n)
    for v in V:
        D = (pi_AN_at(expm_upper(h * v)).matrix - pi_AN_at(expm_upper(-h * v)).matrix) / (2 * h)
        lhs = C.T @ D @ C
        rhs = np.array([[pairing(v, bracket(x, y)) for y in K] for x in K])
        assert np.allclose(lhs, rhs, atol=1e-6)
    for x in K:
        D = (pi_K_at(expm_skew(h * x)).matrix - pi_K_at(expm_skew(-h * x)).matrix) / (2 * h)
        lhs = C @ D @ C.T
        rhs = np.array([[pairing(bracket(v, w), x) for w in V] for v in V])
        assert np.allclose(lhs, rhs, atol=1e-6)


# ---------------------------------------------------------------------------
# Poisson Lie properties
# ---------------------------------------------------------------------------
@settings(max_examples=15, deadline=None)
@given(SEEDS, st.sampled_from([2, 3]))
def test_multiplicativity(seed, n):
    rng = np.random.default_rng(seed)
    assert multiplicativity_residual(random_an(rng, n), random_an(rng, n)) < 1e-6


@pytest.mark.parametrize("key", ["sl2r", "su11", "sl3r", "su21"])
def test_tau_d_anti_poisson_on_AN(key):
    e = catalog_entry(key)
    rng = np.random.default_rng(1)
    for _ in range(5):
        assert anti_poisson_residual(e.tau_d, random_an(rng, e.n)) < 1e-6


@pytest.mark.parametrize("key", ["sl2r", "su11", "sl3r", "su21"])
def test_tau_d_anti_poisson_on_K(key):
    e = catalog_entry(key)
    rng = np.random.default_rng(2)
    for _ in range(5):
        assert anti_poisson_residual_k(e.tau_d, random_unitary(rng, e.n)) < 1e-6


@pytest.mark.parametrize("n", [2, 3])
def test_jacobi(n):
    rng = np.random.default_rng(3)
    for _ in range(3):
        b = random_an(rng, n)
        assert schouten_residual(pi_AN_at, b) < 1e-4
        assert schouten_residual(lambda x: pi_AN_s_at(x, 0.0), b) < 1e-4
        assert schouten_residual(lambda x: pi_AN_s_at(x, 0.5), b) < 1e-4


def test_jacobi_check_detects_non_poisson_field():
    # in three chart coordinates pi^{ij} = eps^{ijk} w_k is Poisson iff w . curl w = 0;
    # w = (y, 0, 1) has w . curl w = -1
    b = random_an(np.random.default_rng(4), 2)

    def field(x):
        y = chart(x)[1]
        w = np.array([y, 0.0, 1.0])
        Pc = np.array([[0, w[2], -w[1]], [-w[2], 0, w[0]], [w[1], -w[0], 0]])
        Minv = np.linalg.inv(frame_to_chart(x))
        return BivectorAtPoint(x, Minv @ Pc @ Minv.T)

    assert schouten_residual(field, b) > 0.5


def test_chart_round_trip():
    b = random_an(np.random.default_rng(5), 3)
    assert np.allclose(from_chart(chart(b), 3), b)


@settings(max_examples=15, deadline=None)
@given(SEEDS, st.sampled_from([2, 3]))
def test_leaves_are_dressing_orbits(seed, n):
    rng = np.random.default_rng(seed)
    b = random_an(rng, n)
    if np.min(np.diff(np.linalg.eigvalsh(E_inverse(b)))) < 1e-3:
        return
    rank, expected, contain = leaf_tangency(b)
    assert rank == expected == n * n - n
    assert contain < 1e-6


# ---------------------------------------------------------------------------
# gauge transformations
# ---------------------------------------------------------------------------
def test_gauge_trivial_cases():
    rng = np.random.default_rng(6)
    b = random_an(rng, 2)
    pi = pi_AN_at(b)
    assert np.array_equal(gauge_transform(pi, GaugeForm(b, np.zeros((3, 3)))).matrix, pi.matrix)
    zero = BivectorAtPoint(b, np.zeros((3, 3)))
    G = rng.standard_normal((3, 3))
    assert np.array_equal(gauge_transform(zero, GaugeForm(b, G)).matrix, np.zeros((3, 3)))


def test_gauge_preserves_image():
    rng = np.random.default_rng(7)
    b = random_an(rng, 3)
    pi = pi_AN_at(b)
    A = rng.standard_normal((8, 8)) * 0.2
    gamma = exact_two_form(lambda c: A @ c + 0.1 * c ** 2, b)
    moved = gauge_transform(pi, gamma)
    dr, res = image_residual(pi.matrix, moved.matrix)
    assert dr == 0 and res < 1e-6


def test_singular_gauge_raises():
    # pi and gamma both x^y on one plane: gamma# pi# is -1 there
    P = np.zeros((3, 3))
    P[1, 2], P[2, 1] = 1.0, -1.0
    G = np.zeros((3, 3))
    G[1, 2], G[2, 1] = 1.0, -1.0
    with pytest.raises(SingularGaugeError):
        gauge_transform(BivectorAtPoint(np.eye(2), P), GaugeForm(np.eye(2), G))


# ---------------------------------------------------------------------------
# the s-family
# ---------------------------------------------------------------------------
def test_s_equal_one_is_ordinary_structure():
    rng = np.random.default_rng(8)
    b1, b2 = random_an(rng, 3), random_an(rng, 3)
    assert np.allclose(bullet_s(b1, b2, 1.0), b1 @ b2)
    assert np.allclose(pi_AN_s_at(b1, 1.0).matrix, pi_AN_at(b1).matrix)
    k = random_unitary(rng, 3)
    bs = [random_an(rng, 3) for _ in range(3)]
    a = twisted_action_s(k, bs, 1.0)
    assert max(np.max(np.abs(x - y)) for x, y in zip(a, twisted_action(k, bs))) < 1e-10
    assert max(np.max(np.abs(x - y)) for x, y in zip(nu_s(bs, 1.0), nu(bs))) < 1e-10


@pytest.mark.parametrize("s", [0.0, 0.3, 2.0])
def test_s_group_laws(s):
    rng = np.random.default_rng(9)
    b1, b2, b3 = (random_an(rng, 2) for _ in range(3))
    lhs = bullet_s(bullet_s(b1, b2, s), b3, s)
    rhs = bullet_s(b1, bullet_s(b2, b3, s), s)
    assert np.allclose(lhs, rhs, atol=1e-9)
    assert np.allclose(bullet_s(b1, inverse_s(b1, s), s), np.eye(2), atol=1e-9)


def test_I_s_requires_nonzero_s():
    with pytest.raises(UsageError):
        I_s(np.eye(2), 0.0)


@pytest.mark.parametrize("s", [0.25, 0.5, 2.0])
def test_scaling(s):
    rng = np.random.default_rng(10)
    for _ in range(3):
        assert scaling_residual(random_an(rng, 2), s) < 1e-6


def test_s_to_zero_limit_is_continuous():
    b = random_an(np.random.default_rng(11), 2)
    P0 = pi_AN_s_at(b, 0.0).matrix
    diffs = [np.max(np.abs(pi_AN_s_at(b, s).matrix - P0)) for s in (1e-2, 1e-3)]
    assert diffs[1] < diffs[0] and diffs[1] < 1e-2


def test_s_zero_twisted_action_and_moment_map():
    rng = np.random.default_rng(12)
    k = random_unitary(rng, 3)
    bs = [random_an(rng, 3) for _ in range(4)]
    for x, y in zip(twisted_action_s(k, bs, 0.0), bs):
        assert np.max(np.abs(x - dressing(k, y))) < 1e-9
    lhs = E_inverse(m_s(bs, 0.0))
    assert np.max(np.abs(lhs - sum(E_inverse(b) for b in bs))) < 1e-9


def test_poisson_suite_small():
    taus = [catalog_entry(k).tau_d for k in ("sl2r", "su11")]
    checks = poisson_suite(n=2, samples=5, seed=0, tau_ds=taus)
    names = {c.name for c in checks}
    assert {"multiplicativity", "tau_d_anti_poisson", "jacobi_schouten", "gauge_zero_identity",
            "scaling_consistency", "moment_composition_s0"} <= names
    assert all(c.passed for c in checks)
