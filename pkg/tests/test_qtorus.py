import cmath
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orlicz_torus.errors import GridMismatch, InvalidParameter
from orlicz_torus.qtorus import (
    LatticeGrid,
    MatrixRep,
    ThetaMatrix,
    TorusElement,
    adjoint,
    laplace_eigenvalue,
    matrix_rep,
    multiply,
    sobolev_weight,
    trace,
    twisted_phase,
)

G22 = LatticeGrid(2, 2)
TH = ThetaMatrix(2, (0.3,))


def interior(grid, radius):
    return np.max(np.abs(grid.points), axis=1) <= radius


def convolution_oracle(a, b):
    """Commutative convolution by a double loop over modes."""
    out = {}
    for n, x in zip(a.grid.points, a.coeffs):
        for m, y in zip(b.grid.points, b.coeffs):
            k = tuple(int(v) for v in n + m)
            out[k] = out.get(k, 0) + x * y
    grid = a.grid
    return np.array([out.get(tuple(int(v) for v in p), 0) for p in grid.points])


# -- grid and basic formulas -------------------------------------------------


def test_grid_order_one_dimension():
    assert LatticeGrid(1, 2).points[:, 0].tolist() == [0, -1, 1, -2, 2]


def test_grid_order_graded_then_lexicographic():
    pts = LatticeGrid(2, 1).points
    assert pts[0].tolist() == [0, 0]
    assert [p.tolist() for p in pts[1:5]] == [[-1, 0], [0, -1], [0, 1], [1, 0]]
    norms = np.sum(pts**2, axis=1)
    assert np.all(np.diff(norms) >= 0)


def test_grid_index_and_lookup():
    g = LatticeGrid(3, 2)
    for i, p in enumerate(g.points):
        assert g.index(p) == i
    assert g.index((3, 0, 0)) == -1
    assert g.lookup(np.array([[0, 0, 0], [5, 0, 0]])).tolist() == [0, -1]


def test_dimension_guard():
    with pytest.raises(InvalidParameter):
        LatticeGrid(5, 1)
    assert LatticeGrid(5, 1, max_dimension=5).size == 3**5


def test_theta_entries_skew():
    th = ThetaMatrix(3, (0.1, 0.2, 0.3))
    assert np.allclose(th.entries, -th.entries.T)
    assert th.entries[0, 2] == 0.2
    with pytest.raises(InvalidParameter):
        ThetaMatrix(3, (0.1,))


@pytest.mark.parametrize(
    "n, value", [((0, 0), 0.0), ((1, 0), 39.4784176), ((1, 1), 78.9568352)]
)
def test_laplace_eigenvalue(n, value):
    assert laplace_eigenvalue(n) == pytest.approx(value, abs=1e-6)


def test_sobolev_weight():
    assert sobolev_weight((0, 0), 3.7) == 1.0
    assert sobolev_weight((2, 1), 0.0) == 1.0
    assert sobolev_weight((1, 0), 1.0) == pytest.approx(6.3623, abs=1e-4)


# -- multiplication -----------------------------------------------------------


def test_generator_relation_example():
    a = TorusElement.monomial(G22, TH, (1, 0))
    b = TorusElement.monomial(G22, TH, (0, 1))
    ab, ba = multiply(a, b), multiply(b, a)
    assert ab.coefficient((1, 1)) == pytest.approx(1.0, abs=1e-15)
    assert ba.coefficient((1, 1)) == pytest.approx(cmath.exp(-2j * math.pi * 0.3), abs=1e-15)
    assert np.count_nonzero(ab.coeffs) == 1


@pytest.mark.parametrize("seed", range(3))
def test_commutative_case_matches_convolution(seed):
    rng = np.random.default_rng(seed)
    th = ThetaMatrix.zero(2)
    big = LatticeGrid(2, 4)
    a = TorusElement.random(G22, th, rng).extend(big)
    b = TorusElement.random(G22, th, rng).extend(big)
    assert np.max(np.abs(multiply(a, b).coeffs - convolution_oracle(a, b))) <= 1e-13
    assert np.max(np.abs(multiply(a, b).coeffs - multiply(b, a).coeffs)) <= 1e-13


def test_unit_is_neutral():
    b = TorusElement.random(G22, TH, np.random.default_rng(1))
    one = TorusElement.unit(G22, TH)
    assert multiply(one, b) == b
    assert multiply(b, one) == b


def test_dropped_mass_reported():
    a = TorusElement.monomial(G22, TH, (2, 0), 0.5)
    b = TorusElement.monomial(G22, TH, (1, 0), 3.0)
    p = multiply(a, b)
    assert p.dropped_mass == pytest.approx(1.5)
    assert np.all(p.coeffs == 0)


def test_grid_mismatch():
    a = TorusElement.unit(G22, TH)
    b = TorusElement.unit(LatticeGrid(2, 3), TH)
    with pytest.raises(GridMismatch):
        multiply(a, b)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_defining_relation_all_pairs(d):
    rng = np.random.default_rng(d)
    th = ThetaMatrix(d, tuple(rng.random(d * (d - 1) // 2)))
    g = LatticeGrid(d, 1)
    for j in range(d):
        for k in range(d):
            uj = TorusElement.monomial(g, th, tuple(np.eye(d, dtype=int)[j]))
            uk = TorusElement.monomial(g, th, tuple(np.eye(d, dtype=int)[k]))
            lhs = multiply(uj, uk).coeffs
            rhs = cmath.exp(2j * math.pi * th.entries[j, k]) * multiply(uk, uj).coeffs
            assert np.max(np.abs(lhs - rhs)) <= 1e-14


def test_twisted_phase_is_lower_triangle_form():
    th = ThetaMatrix(3, (0.1, 0.2, 0.3))
    m, n = np.array([1, 2, -1]), np.array([0, 1, 3])
    expected = sum(m[j] * n[k] * th.entries[j, k] for j in range(3) for k in range(j))
    assert twisted_phase(m, n, th) == pytest.approx(expected)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1, 1))
def test_associativity_on_interior(seed, theta):
    rng = np.random.default_rng(seed)
    th = ThetaMatrix(2, (theta,))
    big = LatticeGrid(2, 4)
    small = LatticeGrid(2, 1)
    a, b, c = (TorusElement.random(small, th, rng).extend(big) for _ in range(3))
    lhs = multiply(multiply(a, b), c)
    rhs = multiply(a, multiply(b, c))
    assert lhs.dropped_mass == 0 and rhs.dropped_mass == 0
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) <= 1e-12


# -- adjoint and trace ---------------------------------------------------------


def test_adjoint_examples():
    one = TorusElement.unit(G22, TH)
    assert adjoint(one) == one
    th0 = ThetaMatrix.zero(2)
    a = TorusElement.monomial(G22, th0, (1, 2), 2 - 3j)
    assert adjoint(a).coefficient((-1, -2)) == 2 + 3j


def test_adjoint_is_involution():
    a = TorusElement.random(G22, TH, np.random.default_rng(4))
    assert np.allclose(adjoint(adjoint(a)).coeffs, a.coeffs, atol=1e-14)


def test_adjoint_matches_conjugate_transpose_on_interior():
    g = LatticeGrid(2, 3)
    a = TorusElement.random(LatticeGrid(2, 1), TH, np.random.default_rng(7)).extend(g)
    M = matrix_rep(a).entries
    Ms = matrix_rep(adjoint(a)).entries
    inner = interior(g, 2)
    block = np.ix_(inner, inner)
    assert np.max(np.abs(Ms[block] - M.conj().T[block])) <= 1e-12


def test_trace_examples():
    assert trace(TorusElement.unit(G22, TH)) == 1
    assert trace(TorusElement.monomial(G22, TH, (1, -1))) == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_trace_parseval_positive_and_tracial(seed):
    rng = np.random.default_rng(seed)
    big = LatticeGrid(2, 4)
    small = LatticeGrid(2, 2)
    a = TorusElement.random(small, TH, rng).extend(big)
    b = TorusElement.random(small, TH, rng).extend(big)
    aa = multiply(adjoint(a), a)
    t = trace(aa)
    assert abs(t.imag) <= 1e-12
    assert t.real >= -1e-14
    assert abs(t.real - np.sum(np.abs(a.coeffs) ** 2)) <= 1e-12 * max(1, t.real)
    assert abs(trace(multiply(a, b)) - trace(multiply(b, a))) <= 1e-12 * (1 + np.abs(a.coeffs).sum() * np.abs(b.coeffs).sum())


# -- matrix representation ---------------------------------------------------


def test_identity_representation():
    assert np.array_equal(matrix_rep(TorusElement.unit(G22, TH)).entries, np.eye(G22.size))


def test_shift_hand_construction():
    g = LatticeGrid(2, 1)
    M = matrix_rep(TorusElement.monomial(g, TH, (1, 0))).entries
    expected = np.zeros((9, 9), dtype=complex)
    for j, n in enumerate(g.points):
        i = g.index(n + np.array([1, 0]))
        if i >= 0:
            # phi(e1, n) = e1 . L . n with L[1,0] = -0.3 only, so zero
            expected[i, j] = 1.0
    assert np.allclose(M, expected, atol=1e-15)
    My = matrix_rep(TorusElement.monomial(g, TH, (0, 1))).entries
    for j, n in enumerate(g.points):
        i = g.index(n + np.array([0, 1]))
        if i >= 0:
            assert My[i, j] == pytest.approx(cmath.exp(-2j * math.pi * 0.3 * n[0]), abs=1e-15)
            assert abs(My[i, j]) == pytest.approx(1.0)


def test_columns_reproduce_products():
    g = LatticeGrid(2, 2)
    a = TorusElement.random(g, TH, np.random.default_rng(3))
    M = matrix_rep(a).entries
    for j, n in enumerate(g.points):
        col = multiply(a, TorusElement.monomial(g, TH, n)).coeffs
        assert np.allclose(M[:, j], col, atol=1e-14)


def test_hilbert_schmidt_parseval():
    g = LatticeGrid(2, 3)
    a = TorusElement.random(LatticeGrid(2, 1), TH, np.random.default_rng(5)).extend(g)
    M = matrix_rep(a).entries
    inner = interior(g, 2)
    # every column inside radius 2 sees the full support of a
    assert np.allclose(np.sum(np.abs(M[:, inner]) ** 2, axis=0), np.sum(np.abs(a.coeffs) ** 2))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-1, 1))
def test_homomorphism_on_interior(seed, theta):
    rng = np.random.default_rng(seed)
    th = ThetaMatrix(2, (theta,))
    small, big = LatticeGrid(2, 1), LatticeGrid(2, 4)
    a = TorusElement.random(small, th, rng).extend(big)
    b = TorusElement.random(small, th, rng).extend(big)
    lhs = matrix_rep(a).entries @ matrix_rep(b).entries
    ab = multiply(a, b)
    rhs = matrix_rep(ab).entries
    inner = interior(big, 2)
    block = np.ix_(inner, inner)
    assert np.linalg.norm(lhs[block] - rhs[block], 2) <= ab.dropped_mass + 1e-10


def test_matrix_rep_on_padded_grid():
    a = TorusElement.monomial(G22, TH, (1, 0))
    M = matrix_rep(a, G22.padded())
    assert M.grid.R == 4


def test_matrix_rep_hermitian_flag_checked():
    with pytest.raises(InvalidParameter):
        MatrixRep(LatticeGrid(1, 1), np.triu(np.ones((3, 3))), hermitian=True)


# -- serialization -----------------------------------------------------------


def test_element_json_round_trip():
    a = TorusElement.random(LatticeGrid(3, 1), ThetaMatrix(3, (0.1, -0.2, 0.5)), np.random.default_rng(0))
    text = json.dumps(a.to_json())
    assert TorusElement.from_json(text) == a


def test_matrix_json_round_trip():
    M = matrix_rep(TorusElement.random(G22, TH, np.random.default_rng(0)))
    back = MatrixRep.from_json(json.dumps(M.to_json()))
    assert np.array_equal(back.entries, M.entries)


def test_bad_json_rows():
    with pytest.raises(InvalidParameter):
        TorusElement.from_json({"d": 2, "R": 1, "coeffs": [[0, 0, 1.0]]})
    with pytest.raises(InvalidParameter):
        TorusElement.from_json({"d": 1, "R": 1, "coeffs": [[3, 1.0, 0.0]]})
