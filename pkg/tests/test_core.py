import itertools
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from magtrans.core import (
    AntisymTensor3,
    DimensionError,
    GroupVector,
    LatticeError,
    Phase,
    TwoForm,
    phase_of,
    random_tensor,
    require_lattice,
    triple_eval,
    two_form_eval,
)

rationals = st.fractions(min_value=-5, max_value=5, max_denominator=12)


def vectors(n):
    return st.lists(rationals, min_size=n, max_size=n).map(GroupVector)


def brute_triple(a, x, y, z):
    n = a.n
    return sum(a[i, j, k] * x[i] * y[j] * z[k] for i, j, k in itertools.product(range(n), repeat=3))


# --- Phase --------------------------------------------------------------------


@pytest.mark.parametrize("e, expected", [(F(1, 8), F(1, 8)), (F(9, 8), F(1, 8)), (F(-1, 4), F(3, 4)), (3, 0)])
def test_phase_of_normalizes(e, expected):
    assert phase_of(e).exponent == expected


def test_phase_arithmetic():
    a, b = Phase(F(1, 3)), Phase(F(5, 6))
    assert (a * b).exponent == F(1, 6)
    assert (a / b).exponent == F(1, 2)
    assert a.inverse().exponent == F(2, 3)
    assert (a**3).is_trivial


def test_float_phase_tolerance():
    assert Phase(0.25) == Phase(0.25 + 5e-10)
    assert Phase(0.25) != Phase(0.25 + 1e-8)
    # circle metric wraps around
    assert Phase(1e-12) == Phase(1 - 1e-12)
    assert Phase(-1e-17).exponent == 0.0


def test_phase_complex_value():
    assert abs(complex(Phase(F(1, 4))) - 1j) < 1e-15


@given(rationals, rationals, rationals)
def test_phase_group_laws(a, b, c):
    pa, pb, pc = phase_of(a), phase_of(b), phase_of(c)
    assert pa * pb == phase_of(a + b)
    assert pa * pb == pb * pa
    assert (pa * pb) * pc == pa * (pb * pc)
    assert 0 <= pa.exponent < 1


# --- vectors ------------------------------------------------------------------


def test_vector_lattice_flag():
    assert GroupVector([1, -2, 3]).is_lattice
    assert not GroupVector([F(1, 2), 0]).is_lattice
    with pytest.raises(LatticeError):
        require_lattice(GroupVector([F(1, 2)]))


# --- tensors ------------------------------------------------------------------


def test_epsilon_entries():
    e = AntisymTensor3.epsilon()
    assert e[0, 1, 2] == 1 and e[1, 0, 2] == -1 and e[2, 0, 1] == 1 and e[0, 0, 1] == 0


def test_dense_constructor_antisymmetrizes():
    raw = np.zeros((3, 3, 3), dtype=object)
    raw[0, 1, 2] = 6
    a = AntisymTensor3(3, raw)
    assert a[0, 1, 2] == 1 and a[2, 1, 0] == -1
    assert AntisymTensor3(3, AntisymTensor3.epsilon().coefficients) == AntisymTensor3.epsilon()


def test_from_entries_orbits_add():
    a = AntisymTensor3.from_entries(3, [(0, 1, 2, 1), (1, 0, 2, -1)])
    assert a[0, 1, 2] == 2
    with pytest.raises(DimensionError):
        AntisymTensor3.from_entries(2, [(0, 1, 2, 1)])


@given(st.integers(0, 10_000))
def test_random_tensor_is_antisymmetric(seed):
    a = random_tensor(random.Random(seed), 4, integral=False)
    for i, j, k in itertools.product(range(4), repeat=3):
        assert a[i, j, k] == -a[j, i, k] == -a[i, k, j]


# --- triple_eval --------------------------------------------------------------


def test_triple_eval_examples():
    e = AntisymTensor3.epsilon()
    assert triple_eval(e, [1, 0, 0], [0, 1, 0], [0, 0, 1]) == 1
    assert triple_eval(e, [1, 2, 3], [1, 2, 3], [0, 5, 1]) == 0
    assert triple_eval(e, [1, 2, 0], [0, 1, 1], [2, 0, 1]) == 5


def test_triple_eval_dimension_mismatch():
    with pytest.raises(DimensionError):
        triple_eval(AntisymTensor3.epsilon(), [1, 0], [0, 1, 0], [0, 0, 1])


@settings(max_examples=60)
@given(vectors(3), vectors(3), vectors(3))
def test_triple_eval_epsilon_is_determinant(x, y, z):
    # exact 3x3 determinant via the Leibniz formula on Fractions
    m = [list(x), list(y), list(z)]
    det = sum(
        (1 if p in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] else -1) * m[0][p[0]] * m[1][p[1]] * m[2][p[2]]
        for p in itertools.permutations(range(3))
    )
    assert triple_eval(AntisymTensor3.epsilon(), x, y, z) == det


@settings(max_examples=40)
@given(st.integers(0, 10_000), vectors(4), vectors(4), vectors(4), vectors(4), rationals)
def test_triple_eval_multilinear_antisymmetric(seed, x, y, z, w, s):
    a = random_tensor(random.Random(seed), 4, integral=False)
    t = triple_eval(a, x, y, z)
    assert t == brute_triple(a, x, y, z)
    assert triple_eval(a, x + w * s, y, z) == t + s * triple_eval(a, w, y, z)
    assert triple_eval(a, y, x, z) == -t
    assert triple_eval(a, x, z, y) == -t


# --- two-forms ----------------------------------------------------------------


def test_two_form_examples():
    w = TwoForm(2, [(0, 1, 1)])
    assert two_form_eval(w, [1, 0], [0, 1]) == 1
    assert two_form_eval(w, [2, 3], [1, 4]) == 5
    assert two_form_eval(w, [F(1, 3), 7], [F(1, 3), 7]) == 0


def test_two_form_from_matrix():
    w = TwoForm.from_matrix([[0, 2, 0], [-2, 0, 1], [0, -1, 0]])
    assert w[0, 1] == 2 and w[1, 0] == -2 and w[1, 2] == 1
    assert w.is_integral


@settings(max_examples=40)
@given(vectors(3), vectors(3), rationals, rationals, rationals)
def test_two_form_antisymmetric_bilinear(x, y, a, b, c):
    w = TwoForm(3, [(0, 1, a), (0, 2, b), (1, 2, c)])
    assert two_form_eval(w, x, y) == -two_form_eval(w, y, x)
    assert two_form_eval(w, x + y, y) == two_form_eval(w, x, y)
