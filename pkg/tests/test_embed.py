import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz_torus.embed import (
    VectorFamily,
    best_pi1_lower,
    cb_amplification_norm,
    factorize,
    inclusion_constant,
    optimality_scan,
    pi_summing_lower,
    weak_l1_bounds,
    weak_lp_norm,
)
from orlicz_torus.errors import CapExceeded, FamilyTooLarge, InvalidParameter, MembershipFailed
from orlicz_torus.qtorus import LatticeGrid, ThetaMatrix, TorusElement, matrix_rep
from orlicz_torus.spectral import ls_operator, ls_values, orlicz_schatten_norm, schatten_norm
from orlicz_torus.verdict import FAILS, HOLDS
from orlicz_torus.young import Power, PowerLog, TailEnvelope, luxemburg_norm, series_membership

CATALOG = [Power(1.0), Power(2.0), Power(3.5), PowerLog(2.0, 1.0), PowerLog(2.5, 0.0), PowerLog(1.0, 1.0)]


def sign_oracle(Y):
    """max over all sign patterns of ||sum eps_i y_i|| for a real family."""
    return max(np.linalg.norm(np.array(eps) @ Y) for eps in itertools.product([1, -1], repeat=Y.shape[0]))


# -- weak norms ---------------------------------------------------------------


def test_orthonormal_family_weak2():
    assert weak_lp_norm(VectorFamily(np.eye(5)[:3]), 2) == pytest.approx(1.0)


@pytest.mark.parametrize("p", [1, 2])
def test_single_vector(p):
    x = np.array([[3.0, 4.0, 0.0]])
    assert weak_lp_norm(VectorFamily(x), p) == pytest.approx(5.0)


def test_two_real_vectors_sign_search():
    x = np.array([[1.0, 2.0, 0.0], [0.5, -1.0, 3.0]])
    expected = max(np.linalg.norm(x[0] + x[1]), np.linalg.norm(x[0] - x[1]))
    assert weak_lp_norm(VectorFamily(x), 1) == pytest.approx(expected, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 7))
def test_weak_l1_bracket_real(seed, k):
    Y = np.random.default_rng(seed).standard_normal((k, 6))
    b = weak_l1_bounds(VectorFamily(Y))
    exact = sign_oracle(Y)
    assert b["exhaustive"]
    assert b["lower"] >= exact * (1 - 1e-12)
    assert b["lower"] <= b["upper"] * (1 + 1e-12)


def test_weak_l1_budget():
    Y = np.random.default_rng(0).standard_normal((12, 4))
    with pytest.raises(FamilyTooLarge):
        weak_l1_bounds(VectorFamily(Y), max_patterns=16, allow_sampling=False)
    sampled = weak_l1_bounds(VectorFamily(Y), max_patterns=16)
    assert not sampled["exhaustive"]


def test_empty_and_zero_families_rejected():
    with pytest.raises(InvalidParameter):
        VectorFamily(np.zeros((0, 3)))
    with pytest.raises(InvalidParameter):
        VectorFamily(np.array([[1.0, 0.0], [0.0, 0.0]]))


# -- summing norms ------------------------------------------------------------


def test_pi2_of_diagonal_attained_by_basis():
    assert pi_summing_lower([1.0, 0.5], VectorFamily(np.eye(2)), 2) == pytest.approx(math.sqrt(1.25), abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.01, 10.0), min_size=1, max_size=10))
def test_pi2_basis_equals_hilbert_schmidt(symbol):
    symbol = np.asarray(symbol)
    val = pi_summing_lower(symbol, VectorFamily(np.eye(symbol.size)), 2)
    assert val == pytest.approx(schatten_norm(np.sort(symbol)[::-1], 2), abs=1e-10)


def test_pi1_of_identity_one_dim():
    assert pi_summing_lower([1.0], VectorFamily(np.eye(1)), 1) == pytest.approx(1.0)


def test_certified_pi1_never_exceeds_uncertified():
    rng = np.random.default_rng(3)
    fam = VectorFamily(rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6)))
    symbol = rng.random(6)
    assert pi_summing_lower(symbol, fam, 1) <= pi_summing_lower(symbol, fam, 1, certified=False) + 1e-12


def test_best_pi1_independent_of_jobs():
    symbol = ls_values(LatticeGrid(2, 2), 1.0)
    a = best_pi1_lower(symbol, n_families=20, seed=4, n_jobs=1)
    b = best_pi1_lower(symbol, n_families=20, seed=4, n_jobs=3)
    assert a["values"] == b["values"]


# -- inclusion constant --------------------------------------------------------


def test_inclusion_constant_powers():
    # k * (1/k)^(1/p) = k^(1 - 1/p), maximal at k = n
    assert inclusion_constant(Power(1), 50) == pytest.approx(1.0)
    assert inclusion_constant(Power(2), 49) == pytest.approx(7.0)


@pytest.mark.parametrize("phi", CATALOG, ids=lambda p: p.descriptor)
def test_inclusion_constant_bounds_trace_norm(phi):
    rng = np.random.default_rng(2)
    n = 12
    c = inclusion_constant(phi, n)
    for _ in range(40):
        mu = np.sort(rng.random(n) ** rng.integers(1, 6))[::-1]
        assert schatten_norm(mu, 1) <= c * luxemburg_norm(mu, phi) * (1 + 1e-9)


# -- factorization -----------------------------------------------------------


@pytest.fixture(scope="module")
def report():
    return factorize(LatticeGrid(2, 4), 1.0, PowerLog(2.5, 0), seed=0, n_families=200)


def test_factorization_reconstruction(report):
    assert report.reconstruction_error <= 1e-12
    assert report.literal_composition_error > 0.1


def test_factorization_bounds(report):
    assert report.pi1_lower <= report.upper_bound + 1e-8
    symbol = ls_values(LatticeGrid(2, 4), 1.0)
    assert report.pi2_exact == pytest.approx(np.linalg.norm(symbol), abs=1e-10)
    assert report.upper_bound == pytest.approx(report.inclusion_constant * report.ls_orlicz_norm)
    assert report.ls_orlicz_norm <= report.ls_orlicz_norm_tail_bound


def test_factorization_reconstruction_larger_grid():
    rep = factorize(LatticeGrid(2, 5), 1.0, PowerLog(2.5, 0), seed=1, n_vectors=100, n_families=5)
    assert rep.reconstruction_error <= 1e-12


def test_factorization_norm_stable_between_radii():
    a = factorize(LatticeGrid(2, 6), 1.0, PowerLog(2.5, 0), n_families=1)
    b = factorize(LatticeGrid(2, 8), 1.0, PowerLog(2.5, 0), n_families=1)
    assert abs(b.ls_orlicz_norm / a.ls_orlicz_norm - 1) <= 0.02
    assert b.ls_orlicz_norm <= a.ls_orlicz_norm_tail_bound * (1 + 1e-9)


def test_factorization_fails_for_divergent_series():
    with pytest.raises(MembershipFailed) as info:
        factorize(LatticeGrid(2, 4), 1.0, Power(2), n_families=1)
    assert info.value.verdict.status == FAILS


def test_report_json(report):
    out = report.to_json()
    assert out["phi"] == "powerlog:p=2.5,alpha=0"
    assert out["membership"]["status"] == HOLDS


# -- cb amplification --------------------------------------------------------


def test_cb_level_one_is_operator_norm():
    A = np.random.default_rng(0).standard_normal((7, 7))
    assert cb_amplification_norm(A, 1) == pytest.approx(np.linalg.norm(A, 2), rel=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cb_constant_in_level(seed):
    g = LatticeGrid(2, 2)
    a = TorusElement.random(g, ThetaMatrix(2, (0.3,)), np.random.default_rng(seed))
    M = matrix_rep(a)
    base = cb_amplification_norm(M, 1)
    for k in (2, 3, 4):
        assert abs(cb_amplification_norm(M, k) - base) <= 1e-10 * max(1.0, base)


def test_cb_limits():
    with pytest.raises(CapExceeded):
        cb_amplification_norm(np.eye(10), 4, cap=30)
    with pytest.raises(InvalidParameter):
        cb_amplification_norm(np.eye(2), 5)


@pytest.mark.parametrize("phi", CATALOG, ids=lambda p: p.descriptor)
def test_multiplier_norm_controlled_by_orlicz_norm(phi):
    A = ls_operator(LatticeGrid(2, 4), 1.0)
    for k in range(1, 5):
        assert cb_amplification_norm(A, k) <= orlicz_schatten_norm(A, phi) * phi.inverse(1.0) * (1 + 1e-12)


# -- optimality scan -----------------------------------------------------------


def test_scan_critical_case_diverges():
    scan = optimality_scan(1.0, Power(2), [4, 8, 16, 32], d=2)
    norms = [n for _, n in scan.rows]
    steps = np.diff(norms) / norms[:-1]
    assert np.all(steps > 0.02)
    assert scan.verdict == "Diverges"
    # harmonic minorant: ||L_1||^2 on the resolved disk is at least sum over ranks of 1/(1 + 4 pi^2 |n|^2)
    assert norms[-1] ** 2 >= 1 + sum(1 / (1 + 4 * math.pi**2 * k) for k in range(1, 4))


def test_scan_subcritical_plateaus():
    scan = optimality_scan(1.0, PowerLog(2.5, 0), [4, 8, 16], d=2)
    norms = [n for _, n in scan.rows]
    assert abs(norms[2] / norms[1] - 1) <= 0.02
    assert scan.verdict == "Converges"


def test_scan_one_dimension_p_series():
    assert optimality_scan(2.0, Power(1), [20, 40, 80], d=1).verdict == "Converges"


def test_scan_requires_increasing_radii():
    with pytest.raises(InvalidParameter):
        optimality_scan(1.0, Power(2), [8, 4])


@pytest.mark.parametrize("d, s, radii", [(1, 1.0, [20, 40, 80, 160]), (1, 2.0, [20, 40, 80, 160]),
                                         (2, 1.0, [4, 8, 16, 32]), (2, 2.0, [4, 8, 16, 32])])
@pytest.mark.parametrize("phi", CATALOG, ids=lambda p: p.descriptor)
def test_scan_agrees_with_series_membership(d, s, radii, phi):
    scan = optimality_scan(s, phi, radii, d=d)
    expected = series_membership(TailEnvelope(1.0, s / d, 1), phi, []).status
    assert scan.verdict == {HOLDS: "Converges", FAILS: "Diverges"}[expected]


def test_scan_exports():
    scan = optimality_scan(1.0, Power(2), [4, 8], d=2)
    assert scan.to_csv().splitlines()[0] == "R,norm,verdict"
    assert scan.to_json()["rows"][0][0] == 4
