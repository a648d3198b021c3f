"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``; the verdict lines are
printed even while pytest captures output.
"""

import itertools
import random
import time
from fractions import Fraction as F

import numpy as np
import pytest

from magtrans import fock
from magtrans.cochain import (
    cocycle_equivalence,
    dd_2cocycle,
    group_coboundary,
    groupoid_trivialization,
    magnetic_3cocycle,
    shift_2cocycle,
    verify_cocycle,
)
from magtrans.core import (
    AntisymTensor3,
    GroupVector,
    Phase,
    TwoForm,
    random_float_vector,
    random_tensor,
    random_two_form,
    random_vector,
    triple_eval,
)
from magtrans.geometry import (
    Tetrahedron,
    integrate_omega_tet,
    loop_cocycle_sides,
    monte_carlo_omega_tet,
    polygon_chain,
    stokes_check,
    tetra_phase,
)
from magtrans.spectral import (
    B1_SIGN,
    LoopFunction,
    TrigPolynomial,
    WindowError,
    decay_fit,
    delta_b1,
    fit_log_growth,
    hs_partial_sums,
    luscher_integral,
    luscher_trace,
    ray_distances,
    triangle_loop_function,
)

CUTOFFS = [64, 128, 256, 512, 1024, 2048, 4096]


@pytest.fixture
def verdict(capsys):
    def emit(k, title, ok, detail=""):
        with capsys.disabled():
            print(f"\n[acceptance {k:2d}] {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip())
        return ok

    return emit


def _float_tensor(a):
    return AntisymTensor3.from_entries(a.n, [(i, j, k, float(v)) for (i, j, k), v in a.independent])


def test_01_three_cocycle_identity(verdict):
    rng = random.Random(101)
    t0 = time.perf_counter()
    worst, checked = F(0), 0
    for n in (3, 4):
        for seed in range(5):
            c = magnetic_3cocycle(random_tensor(rng, n))
            rep = verify_cocycle(c, samples=500, rng_seed=1000 * n + seed)
            worst = max(worst, rep.worst_deviation)
            checked += 500
    elapsed = time.perf_counter() - t0
    ok = worst == 0 and elapsed < 5.0
    assert verdict(1, "3-cocycle identity", ok, f"quadruples={checked} worst={worst} time={elapsed:.2f}s")


def test_02_groupoid_trivialization(verdict):
    rng = random.Random(202)
    c = magnetic_3cocycle(AntisymTensor3.epsilon())
    db = group_coboundary(groupoid_trivialization(c))
    bad = 0
    for _ in range(500):
        u, x, y, z = (random_vector(rng, 3) for _ in range(4))
        bad += db(x, y, z, base=u) != c(x, y, z)
    assert verdict(2, "groupoid trivialization", bad == 0, f"instances=500 mismatches={bad}")


def test_03_integrality(verdict):
    rng = random.Random(303)
    bad = 0
    for i in range(500):
        n = 3 + i % 2
        c = magnetic_3cocycle(random_tensor(rng, n))
        bad += not c(*(random_vector(rng, n, lattice=True, span=9) for _ in range(3))).is_trivial
    assert verdict(3, "integrality on the lattice", bad == 0, f"triples=500 nontrivial={bad}")


def test_04_loop_identity(verdict):
    rng = random.Random(404)
    bad = 0
    for i in range(501):
        if i == 0:
            x, y, z = GroupVector([1, 0, 0]), GroupVector([0, 1, 0]), GroupVector([0, 0, 1])
        else:
            x, y, z = (random_vector(rng, 3) for _ in range(3))
        lhs, rhs = loop_cocycle_sides(x, y, z)
        cycle = polygon_chain(0 * x, x, x + y, x + y + z)
        bad += not (lhs == rhs == cycle)
    e_lhs, _ = loop_cocycle_sides(GroupVector([1, 0, 0]), GroupVector([0, 1, 0]), GroupVector([0, 0, 1]))
    ok = bad == 0 and len(e_lhs) == 4
    assert verdict(4, "loop identity on 1-chains", ok, f"triples=500 mismatches={bad}")


def test_05_simplex_integration(verdict):
    rng = random.Random(505)
    worst_z, mc_bad = 0.0, 0
    for t in range(20):
        a = _float_tensor(random_tensor(rng, 3, integral=False))
        V = Tetrahedron(*(random_float_vector(rng, 3) for _ in range(3)))
        mean, se = monte_carlo_omega_tet(a, V, 10**6, seed=t + 1)
        err = abs(mean - integrate_omega_tet(a, V))
        # a zero tensor gives a zero integrand and se == 0
        z = err / se if se > 0 else (0.0 if err == 0 else float("inf"))
        worst_z = max(worst_z, z)
        mc_bad += z > 3
    exact_bad, phase_bad = 0, 0
    for _ in range(100):
        a = random_tensor(rng, 3, integral=False)
        x, y, z = (random_vector(rng, 3) for _ in range(3))
        exact_bad += integrate_omega_tet(a, Tetrahedron(x, y, z)) != triple_eval(a, x, y, z)
        phase_bad += tetra_phase(a, x, y, z) != magnetic_3cocycle(a)(x, y, z)
    ok = mc_bad == 0 and exact_bad == 0 and phase_bad == 0
    detail = f"max|z|={worst_z:.2f} (<= 3) exact_mismatch={exact_bad} phase_mismatch={phase_bad}"
    assert verdict(5, "simplex integration", ok, detail)


def test_06_stokes(verdict):
    rng = random.Random(606)
    exact_bad, worst_float = 0, 0.0
    for _ in range(100):
        a = random_tensor(rng, 3, integral=False)
        V = Tetrahedron(*(random_vector(rng, 3) for _ in range(3)))
        exact_bad += stokes_check(a, V) != 0
        af = _float_tensor(a)
        Vf = Tetrahedron(*(random_float_vector(rng, 3) for _ in range(3)))
        worst_float = max(worst_float, float(stokes_check(af, Vf)))
    ok = exact_bad == 0 and worst_float <= 1e-12
    assert verdict(6, "Stokes on tetrahedra", ok, f"exact_nonzero={exact_bad} float_max={worst_float:.2e}")


def test_07_luscher_agreement(verdict):
    worst, value_bad, m_dep = 0.0, 0, 0.0
    for m, k in itertools.product(range(-5, 6), repeat=2):
        f, g = TrigPolynomial.mode(m), TrigPolynomial.mode(k)
        tr = luscher_trace(f, g, 12)
        worst = max(worst, abs(tr - luscher_integral(f, g)))
        value_bad += abs(tr - (-m if m + k == 0 else 0)) > 1e-12
        for M in range(max(abs(m) + abs(k), 1), 13):
            m_dep = max(m_dep, abs(luscher_trace(f, g, M) - tr))
    with pytest.raises(WindowError):
        luscher_trace(TrigPolynomial.mode(5), TrigPolynomial.mode(-5), 9)
    ok = worst <= 1e-12 and value_bad == 0 and m_dep <= 1e-12
    detail = f"pairs=121 |trace-integral|={worst:.1e} value_mismatch={value_bad} M-dependence={m_dep:.1e}"
    assert verdict(7, "Luscher trace vs integral", ok, detail)


def test_08_b1_trivialization(verdict):
    rng = np.random.default_rng(808)
    worst, worst_a = 0.0, 0.0
    for _ in range(100):
        A, A2, X, Y = (TrigPolynomial.random(rng, int(rng.integers(0, 5)), 2) for _ in range(4))
        v = delta_b1(A, X, Y)
        worst = max(worst, abs(v - B1_SIGN * luscher_integral(X, Y)))
        worst_a = max(worst_a, abs(delta_b1(A2, X, Y) - v))
    ok = worst <= 1e-12 and worst_a <= 1e-12
    assert verdict(8, "b1 trivializes the Luscher cocycle", ok, f"sign={B1_SIGN} dev={worst:.1e} A-dependence={worst_a:.1e}")


def test_09_hs_diagnostics(verdict):
    t0 = time.perf_counter()
    tri = triangle_loop_function([0.3, 0.1], [-0.2, 0.4])
    fit_c = decay_fit(tri, 0, ray_distances(32, 1024))
    sums = hs_partial_sums(tri, 0, CUTOFFS)
    inc = np.diff(sums)[CUTOFFS.index(128):]
    closed_ok = -2.4 <= fit_c.slope <= -1.6 and bool(np.all(np.diff(inc) < 0))

    line = LoopFunction.linear([0.5])
    fit_o = decay_fit(line, 0, ray_distances(32, 1024))
    lf = fit_log_growth(CUTOFFS, hs_partial_sums(line, 0, CUTOFFS))
    open_ok = -1.3 <= fit_o.slope <= -0.8 and lf.b1 > 0 and lf.r2 > 0.95
    elapsed = time.perf_counter() - t0
    ok = closed_ok and open_ok and elapsed < 60
    detail = f"closed slope={fit_c.slope:.3f} open slope={fit_o.slope:.3f} b1={lf.b1:.3g} R2={lf.r2:.4f} time={elapsed:.1f}s"
    assert verdict(9, "Hilbert-Schmidt diagnostics", ok, detail)


def test_10_car(verdict):
    rng = random.Random(1010)
    ok, dims = True, []
    for n in (1, 2):
        s = fock.build_sector(fock.ModeWindow(-3, 3, n))
        modes = list(s.window.modes)
        pairs = [((rng.choice(modes), rng.randrange(n)), (rng.choice(modes), rng.randrange(n))) for _ in range(100)]
        rep = fock.car_check(s, pairs)
        ok &= rep.passed and rep.anticommutator_deviation == 0 and rep.cross_component_deviation == 0
        dims.append(s.dimension)
    assert verdict(10, "CAR relations", ok, f"pairs=100 per n, dims={dims}, normalization={fock.CAR_SCALE}<u,v>")


def test_11_shift_composition(verdict):
    rng = random.Random(1111)
    sectors = {n: fock.build_sector(fock.ModeWindow(-6, 6, n, 4), None if n == 1 else 1) for n in (1, 2, 3)}
    bad, untwisted_bad = 0, 0
    for i in range(50):
        n = i % 3 + 1
        s = sectors[n]
        x = random_vector(rng, n)
        w = TwoForm(n, [(a, b, F(rng.randint(-9, 9), rng.randint(1, 6))) for a, b in itertools.combinations(range(n), 2)])
        p, q = (GroupVector([rng.randint(-2, 2) for _ in range(n)]) for _ in range(2))
        rep = fock.compose_check(p, q, fock.TwistedPoint(x, w), s)
        bad += not (rep.passed and rep.max_deviation == 0 and rep.measured == shift_2cocycle(w)(p, q, base=x))
        rep0 = fock.compose_check(p, q, fock.TwistedPoint(x, TwoForm(n)), s)
        untwisted_bad += not (rep0.passed and rep0.measured == Phase(0))
    ok = bad == 0 and untwisted_bad == 0
    assert verdict(11, "shift composition phase", ok, f"points=50 mismatches={bad} untwisted_mismatches={untwisted_bad}")


def test_12_equivalence(verdict):
    rng = random.Random(1212)
    found, controls = 0, 0
    for i in range(5):
        w = random_two_form(rng, 3)
        alpha = 2 * (w[0, 1] + w[1, 2] + w[2, 0])
        C = shift_2cocycle(w)
        good = cocycle_equivalence(C, dd_2cocycle(AntisymTensor3.epsilon(3, alpha), "increasing"), rng_seed=i + 1)
        found += good.found and good.residual == 0
        bad = cocycle_equivalence(C, dd_2cocycle(AntisymTensor3.epsilon(3, alpha + 1), "increasing"), rng_seed=i + 1)
        controls += not bad.found
    ok = found == 5 and controls == 5
    assert verdict(12, "cocycle equivalence", ok, f"found={found}/5 control_rejected={controls}/5")
