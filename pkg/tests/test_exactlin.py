import itertools

import pytest
from hypothesis import given, strategies as st

from soalab.exactlin import (BigMatrix, diagonalize_mod, invariant_factors, lattice_basis, lcm,
                             smith_normal_form, solve_congruences, solve_linear, xgcd)

small = st.integers(min_value=-9, max_value=9)


@st.composite
def matrices(draw, max_dim=4):
    r = draw(st.integers(0, max_dim))
    c = draw(st.integers(0, max_dim))
    rows = [[draw(small) for _ in range(c)] for _ in range(r)]
    return BigMatrix.from_rows(rows, c)


def _is_identity(M):
    return M.tolist() == BigMatrix.identity(M.rows).tolist()


@given(st.integers(-500, 500), st.integers(-500, 500))
def test_xgcd_bezout(a, b):
    g, x, y = xgcd(a, b)
    assert g >= 0 and a * x + b * y == g
    if g:
        assert a % g == 0 and b % g == 0


def test_lcm_basic():
    assert lcm(4, 6) == 12 and lcm() == 1


@given(matrices())
def test_smith_decomposition(A):
    d = smith_normal_form(A)
    assert (d.U @ A @ d.V).tolist() == d.S.tolist()
    assert _is_identity(d.U @ d.U_inv) and _is_identity(d.V @ d.V_inv)
    diag = d.diagonal
    for i in range(d.S.rows):
        for j in range(d.S.cols):
            if i != j:
                assert d.S[i, j] == 0
    assert all(x >= 0 for x in diag)
    nz = [x for x in diag if x]
    assert diag[:len(nz)] == nz, "zeros trail"
    for a, b in zip(nz, nz[1:]):
        assert b % a == 0


def test_smith_known_example():
    A = BigMatrix.from_rows([[2, 4, 4], [-6, 6, 12], [10, -4, -16]])
    assert invariant_factors(A) == [2, 6, 12]


@given(matrices(), st.integers(2, 12))
def test_diagonalize_mod(A, m):
    U, D, V, Ui = diagonalize_mod(A, m, want_inverse=True)
    lhs = (U @ A @ V).mod(m).tolist()
    expect = [[(D[i] if i == j and i < len(D) else 0) % m for j in range(A.cols)] for i in range(A.rows)]
    assert lhs == expect
    assert [[x % m for x in r] for r in (U @ Ui).tolist()] == BigMatrix.identity(A.rows).tolist()


@st.composite
def congruence_systems(draw):
    m = draw(st.integers(2, 12))
    n = draw(st.integers(1, 3))
    r = draw(st.integers(1, 3))
    A = BigMatrix.from_rows([[draw(st.integers(0, m - 1)) for _ in range(n)] for _ in range(r)], n)
    b = [draw(st.integers(0, m - 1)) for _ in range(r)]
    return A, b, m


def _satisfies(A, b, m, x):
    return all((v - bi) % m == 0 for v, bi in zip(A.apply(x), b))


@given(congruence_systems())
def test_solve_linear_matches_enumeration(sys_):
    A, b, m = sys_
    sol = solve_linear(A, b, m)
    brute = [x for x in itertools.product(range(m), repeat=A.cols) if _satisfies(A, b, m, x)]
    assert sol.empty == (not brute)
    for x in itertools.product(range(m), repeat=A.cols):
        assert sol.contains(x) == _satisfies(A, b, m, x)


@given(st.lists(st.integers(2, 8), min_size=1, max_size=3), st.data())
def test_solve_congruences_mixed_moduli(moduli, data):
    n = data.draw(st.integers(1, 2))
    A = BigMatrix.from_rows([[data.draw(st.integers(0, 7)) for _ in range(n)] for _ in moduli], n)
    b = [data.draw(st.integers(0, 7)) for _ in moduli]
    sol = solve_congruences(A, b, moduli)
    L = lcm(*moduli)
    ok = lambda x: all((v - bi) % mo == 0 for v, bi, mo in zip(A.apply(x), b, moduli))
    for x in itertools.product(range(L), repeat=n):
        assert sol.contains(x) == ok(x)


def test_solve_over_integers():
    A = BigMatrix.from_rows([[2, 4]])
    sol = solve_linear(A, [6])
    assert sol.contains((3, 0)) and sol.contains((1, 1)) and not sol.contains((1, 0))
    assert solve_linear(A, [3]).empty


def test_lattice_basis_hermite():
    assert lattice_basis([[2, 4], [4, 6]], 2) == [[2, 0], [0, 2]]
    assert lattice_basis([[3, 1]], 2, 3) == [[0, 1]]


def test_shape_errors():
    with pytest.raises(ValueError):
        BigMatrix(2, 2, (1, 2, 3))
    with pytest.raises(ValueError):
        BigMatrix.identity(2) @ BigMatrix.identity(3)
    with pytest.raises(ValueError):
        solve_linear(BigMatrix.identity(2), [1])
