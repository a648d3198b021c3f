import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from magtrans.spectral import (
    B1_SIGN,
    LoopFunction,
    TrigPolynomial,
    WindowError,
    b1_cochain,
    decay_fit,
    delta_b1,
    fit_log_growth,
    fourier_element,
    hs_partial_sum,
    hs_partial_sums,
    luscher_integral,
    luscher_trace,
    multiplication_operator,
    ray_distances,
    triangle_loop_function,
)

CUTOFFS = [64, 128, 256, 512, 1024, 2048, 4096]


def quad_element(loop, k, p, q):
    # adaptive quadrature oracle, split at the breakpoints
    bps = [t for t, _ in loop.components[k]]

    def part(fn):
        return sum(integrate.quad(fn, a, b, limit=200, epsabs=1e-13)[0] for a, b in zip(bps, bps[1:]))

    phase = lambda t: 2 * np.pi * (loop(t)[k] + (q - p) * t)  # noqa: E731
    return part(lambda t: np.cos(phase(t))) + 1j * part(lambda t: np.sin(phase(t)))


# --- loop functions ---------------------------------------------------------------


def test_loop_function_flags():
    assert LoopFunction.linear([0.5]).is_open
    w = LoopFunction.linear([3.0])
    assert not w.is_open and list(w.winding) == [3]
    assert not triangle_loop_function([0.3, 0.1], [-0.2, 0.4]).is_open
    with pytest.raises(ValueError):
        LoopFunction([[(0.0, 0.0), (0.5, 1.0)]])


# --- matrix elements ------------------------------------------------------------


def test_zero_loop_is_identity():
    loop = LoopFunction.linear([0.0])
    assert fourier_element(loop, 0, 3, 3) == pytest.approx(1.0)
    assert abs(fourier_element(loop, 0, 3, 5)) < 1e-15


def test_integer_winding_is_shift():
    loop = LoopFunction.linear([2.0])
    assert fourier_element(loop, 0, 7, 5) == pytest.approx(1.0)
    assert abs(fourier_element(loop, 0, 7, 6)) < 1e-14


@pytest.mark.parametrize("p, q", [(0, 0), (3, -2), (-4, 1), (40, -40)])
def test_open_path_closed_form(p, q):
    v = 0.5
    s = v + q - p
    expected = (np.exp(2j * np.pi * s) - 1) / (2j * np.pi * s)
    loop = LoopFunction.linear([v])
    assert abs(fourier_element(loop, 0, p, q) - expected) < 1e-14
    assert abs(fourier_element(loop, 0, p, q) - quad_element(loop, 0, p, q)) < 1e-10


def test_triangle_loop_against_quadrature():
    loop = triangle_loop_function([0.3, 0.1], [-0.2, 0.4])
    for k in (0, 1):
        for p, q in [(0, -1), (5, -3), (17, -20)]:
            assert abs(fourier_element(loop, k, p, q) - quad_element(loop, k, p, q)) < 1e-10


def test_smooth_loop_matches_bessel():
    # exp(2 pi i A sin(2 pi t)) has Fourier coefficients J_d(2 pi A)
    A, K = 2.0, 1024
    t = np.linspace(0, 1, K + 1)
    loop = LoopFunction([list(zip(t, A * np.sin(2 * np.pi * t)))])
    d = np.arange(1, 20)
    el = fourier_element(loop, 0, d, np.zeros_like(d))
    assert np.max(np.abs(el - special.jv(d, 2 * np.pi * A))) < 1e-4


# --- HS diagnostics ---------------------------------------------------------------


def test_hs_zero_loop():
    loop = LoopFunction.linear([0.0])
    assert hs_partial_sums(loop, 0, CUTOFFS) == [0.0] * len(CUTOFFS)


def test_hs_partial_sum_matches_direct_double_sum():
    loop = triangle_loop_function([0.3, 0.1], [-0.2, 0.4])
    g = 20
    p, q = np.meshgrid(np.arange(0, g), np.arange(-g, 0), indexing="ij")
    direct = np.sum(np.abs(fourier_element(loop, 0, p.ravel(), q.ravel())) ** 2)
    assert abs(hs_partial_sum(loop, 0, g) - direct) < 1e-13


def test_triangle_decay_and_convergence():
    loop = triangle_loop_function([0.3, 0.1], [-0.2, 0.4])
    fit = decay_fit(loop, 0, ray_distances(32, 1024))
    assert -2.4 <= fit.slope <= -1.6
    inc = np.diff(hs_partial_sums(loop, 0, CUTOFFS))
    assert np.all(np.diff(inc) < 0) and np.all(inc > 0)


def test_smooth_loop_decays_faster():
    A, K = 2.0, 1024
    t = np.linspace(0, 1, K + 1)
    loop = LoopFunction([list(zip(t, A * np.sin(2 * np.pi * t)))])
    fit = decay_fit(loop, 0, np.arange(8, 25))
    assert fit.magnitudes.min() > 1e-10  # well above roundoff
    assert fit.slope <= -2


def test_open_path_decay_and_log_growth():
    loop = LoopFunction.linear([0.5])
    assert -1.3 <= decay_fit(loop, 0, ray_distances(32, 1024)).slope <= -0.8
    lf = fit_log_growth(CUTOFFS, hs_partial_sums(loop, 0, CUTOFFS))
    assert lf.b1 > 0 and lf.r2 > 0.95


def test_decay_fit_needs_points():
    with pytest.raises(ValueError):
        decay_fit(LoopFunction.linear([0.5]), 0, [4, 8, 16])


# --- multiplication operators ------------------------------------------------------


def test_multiplication_operator_basic():
    c = multiplication_operator(TrigPolynomial.constant(2.5), 3)
    assert np.allclose(c.matrix, 2.5 * np.eye(7))
    s = multiplication_operator(TrigPolynomial.mode(1), 3)
    assert s.matrix[s.index(0, 1), s.index(0, 0)] == 1
    assert np.count_nonzero(s.matrix) == 6
    with pytest.raises(WindowError):
        multiplication_operator(TrigPolynomial.mode(4), 3)


def test_multiplication_operator_composition():
    rng = np.random.default_rng(2)
    f, g = TrigPolynomial.random(rng, 2, 1), TrigPolynomial.random(rng, 3, 1)
    M, inner = 12, 12 - 5
    prod = multiplication_operator(f, M) @ multiplication_operator(g, M)
    fg = multiplication_operator(f * g, M)
    sl = slice(M - inner, M + inner + 1)
    assert np.allclose(prod.matrix[sl, sl], fg.matrix[sl, sl], atol=1e-12)


def test_polarization_blocks():
    op = multiplication_operator(TrigPolynomial.mode(1), 2)
    assert op.block("+", "-").shape == (3, 2)
    assert np.count_nonzero(op.block("+", "-")) == 1


# --- Luscher cocycle ---------------------------------------------------------------


def test_luscher_examples():
    f, g = TrigPolynomial.mode(1), TrigPolynomial.mode(-1)
    assert luscher_trace(f, g, 4) == pytest.approx(-1)
    assert luscher_integral(f, g) == pytest.approx(-1)
    assert luscher_trace(TrigPolynomial.mode(2), TrigPolynomial.mode(1), 5) == 0
    assert luscher_trace(TrigPolynomial.constant(3.0), TrigPolynomial.mode(2), 4) == 0
    with pytest.raises(WindowError):
        luscher_trace(TrigPolynomial.mode(3), TrigPolynomial.mode(-3), 5)


def test_luscher_trace_dense_oracle():
    # explicit diagonal eps and multiplication matrices built here, not in the module
    M, m = 6, 2
    modes = np.arange(-M, M + 1)
    F = (np.subtract.outer(modes, modes) == m).astype(complex)
    G = (np.subtract.outer(modes, modes) == -m).astype(complex)
    E = np.diag(np.where(modes >= 0, 1.0, -1.0))
    expected = 0.5 * np.trace(F @ (E @ G - G @ E))
    assert luscher_trace(TrigPolynomial.mode(m), TrigPolynomial.mode(-m), M) == pytest.approx(expected)
    assert expected == pytest.approx(-m)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(1, 5), st.integers(1, 3))
def test_luscher_trace_equals_integral(seed, df, dg, n):
    rng = np.random.default_rng(seed)
    f, g = TrigPolynomial.random(rng, df, n), TrigPolynomial.random(rng, dg, n)
    M = df + dg
    tr = luscher_trace(f, g, M)
    assert abs(tr - luscher_integral(f, g)) < 1e-12 * max(1, abs(tr))
    assert abs(luscher_trace(f, g, M + 4) - tr) < 1e-12 * max(1, abs(tr))
    assert abs(luscher_integral(g, f) + luscher_integral(f, g)) < 1e-12 * max(1, abs(tr))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10_000))
def test_luscher_bilinear(seed):
    rng = np.random.default_rng(seed)
    f1, f2, g = (TrigPolynomial.random(rng, 3, 2) for _ in range(3))
    lhs = luscher_integral(f1 + f2, g)
    assert abs(lhs - luscher_integral(f1, g) - luscher_integral(f2, g)) < 1e-11


# --- b1 trivialization -------------------------------------------------------------


def test_b1_examples():
    zero = TrigPolynomial.constant(0.0)
    assert b1_cochain(zero, TrigPolynomial.mode(1)) == 0
    cos = TrigPolynomial([[0.5, 0, 0.5]])
    quad = integrate.quad(lambda t: np.cos(2 * np.pi * t) ** 2, 0, 1)[0]
    assert abs(b1_cochain(cos, cos) - quad / (4j * np.pi)) < 1e-14
    assert quad == pytest.approx(0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_delta_b1_is_signed_luscher(seed):
    rng = np.random.default_rng(seed)
    degs = rng.integers(1, 5, size=4)
    A, A2, X, Y = (TrigPolynomial.random(rng, int(d), 2) for d in degs)
    v = delta_b1(A, X, Y)
    assert abs(v - B1_SIGN * luscher_integral(X, Y)) < 1e-12
    assert abs(delta_b1(A2, X, Y) - v) < 1e-12


def test_b1_sign_is_fixed():
    assert B1_SIGN == -1
