import itertools
from fractions import Fraction as F

from hypothesis import given, settings
from hypothesis import strategies as st

from magtrans._lattice import integer_solve, left_null_space, solve_affine, solve_mod_integers

small = st.integers(-4, 4)


def matrices(rows, cols):
    return st.lists(st.lists(small, min_size=cols, max_size=cols), min_size=rows, max_size=rows)


def test_solve_affine_particular_and_null():
    rows = [[F(1), F(2), F(0)], [F(0), F(0), F(1)]]
    part, null = solve_affine(rows, [F(3), F(5)], 3)
    assert part == [3, 0, 5]
    assert null == [[-2, 1, 0]]
    assert solve_affine([[F(1)], [F(1)]], [F(0), F(1)], 1) is None


def test_integer_solve_detects_parity_obstruction():
    assert integer_solve([[2, 4]], [3]) is None
    z = integer_solve([[2, 4]], [6])
    assert 2 * z[0] + 4 * z[1] == 6


@settings(max_examples=60, deadline=None)
@given(matrices(2, 3), st.lists(small, min_size=2, max_size=2))
def test_integer_solve_matches_brute_force(K, c):
    z = integer_solve(K, c)
    brute = any(
        all(sum(a * b for a, b in zip(row, cand)) == ci for row, ci in zip(K, c))
        for cand in itertools.product(range(-12, 13), repeat=3)
    )
    if z is not None:
        assert all(sum(a * b for a, b in zip(row, z)) == ci for row, ci in zip(K, c))
    else:
        assert not brute


@settings(max_examples=40, deadline=None)
@given(matrices(4, 2))
def test_left_null_space_annihilates(M):
    rows = [[F(v) for v in r] for r in M]
    for y in left_null_space(rows, 2):
        assert all(sum(y[i] * rows[i][j] for i in range(4)) == 0 for j in range(2))


@settings(max_examples=40, deadline=None)
@given(matrices(3, 2), st.lists(st.integers(-20, 20), min_size=3, max_size=3), st.lists(small, min_size=3, max_size=3))
def test_solve_mod_integers_roundtrip(M, t_num, z):
    # b = M t + z has a solution by construction
    rows = [[F(v) for v in r] for r in M]
    t = [F(t_num[0], 3), F(t_num[1], 5)]
    b = [sum(r[j] * t[j] for j in range(2)) + zi for r, zi in zip(rows, z)]
    sol = solve_mod_integers(rows, b, 2)
    assert sol is not None
    resid = [bi - sum(r[j] * sol[j] for j in range(2)) for r, bi in zip(rows, b)]
    assert all(v.denominator == 1 for v in resid)


def test_solve_mod_integers_infeasible():
    # t = 0 and t = 1/2 (mod 1) at once
    rows = [[F(1)], [F(1)]]
    assert solve_mod_integers(rows, [F(0), F(1, 2)], 1) is None
