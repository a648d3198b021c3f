"""Circle-valued group and transformation-groupoid cochains on R^n and Z^n.

A cochain is stored through its real *lift*: ``exponent(...)`` returns the
unreduced scalar ``e`` and calling the cochain returns ``Phase(e)``.
Coboundaries are taken on lifts, so cocycle identities can be checked
exactly and equivalences can be solved as polynomial identities.

Translation-module cochains take a base point first, ``f(u; g1, ..., gk)``,
and the group acts by shifting it, ``(g . f)(u; ...) = f(u + g; ...)``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from magtrans._lattice import solve_affine, solve_mod_integers
from magtrans.core import (
    AntisymTensor3,
    GroupVector,
    Phase,
    TwoForm,
    as_vector,
    random_float_vector,
    random_vector,
    require_lattice,
    triple_eval,
    two_form_eval,
)

CONSTANT = "constant"
TRANSLATION = "translation"


@dataclass(frozen=True)
class GroupCochain:
    degree: int
    dimension: int
    exponent: Callable
    mode: str = CONSTANT
    lattice: bool = False
    name: str = ""

    def __post_init__(self):
        if self.mode not in (CONSTANT, TRANSLATION):
            raise ValueError(f"unknown coefficient mode {self.mode!r}")

    def lift(self, *args, base=None):
        if len(args) != self.degree:
            raise TypeError(f"{self.name or 'cochain'} takes {self.degree} group arguments, got {len(args)}")
        args = [as_vector(g) for g in args]
        if self.lattice:
            require_lattice(*args)
        if self.mode == TRANSLATION:
            if base is None:
                raise TypeError("translation-module cochain needs a base point")
            return self.exponent(as_vector(base), *args)
        return self.exponent(*args)

    def __call__(self, *args, base=None) -> Phase:
        return Phase(self.lift(*args, base=base))


def _const(degree, n, fn, lattice=False, name=""):
    return GroupCochain(degree, n, fn, CONSTANT, lattice, name)


def _trans(degree, n, fn, lattice=False, name=""):
    return GroupCochain(degree, n, fn, TRANSLATION, lattice, name)


def trivial_cochain(degree: int, n: int, mode: str = CONSTANT, lattice: bool = False) -> GroupCochain:
    if mode == TRANSLATION:
        return _trans(degree, n, lambda u, *g: Fraction(0), lattice, "trivial")
    return _const(degree, n, lambda *g: Fraction(0), lattice, "trivial")


def magnetic_3cocycle(a: AntisymTensor3) -> GroupCochain:
    """``c(x, y, z) = exp(2 pi i sum a_ijk x_i y_j z_k)`` with trivial action."""
    return _const(3, a.n, lambda x, y, z: triple_eval(a, x, y, z), name="magnetic")


def groupoid_trivialization(c: GroupCochain) -> GroupCochain:
    """The 2-cochain ``b(u; x, y) = c(u, x, y)`` with translation coefficients."""
    if c.degree != 3 or c.mode != CONSTANT:
        raise ValueError("expects a constant-coefficient 3-cochain")
    return _trans(2, c.dimension, lambda u, x, y: c.exponent(u, x, y), c.lattice, f"b[{c.name}]")


def group_coboundary(f: GroupCochain) -> GroupCochain:
    """Degree-(k+1) coboundary, alternating-sum convention on lifts.

    For ``k = 2`` in translation mode this reads
    ``db(u; x, y, z) = b(u+x; y, z) - b(u; x+y, z) + b(u; x, y+z) - b(u; x, y)``.
    """
    k = f.degree
    if k > 3:
        raise ValueError(f"coboundary of degree {k} cochains is not supported")
    translation = f.mode == TRANSLATION

    def d(*args):
        if translation:
            u, g = args[0], args[1:]
        else:
            u, g = None, args

        def ev(base, gs):
            return f.exponent(base, *gs) if translation else f.exponent(*gs)

        total = ev(u + g[0] if translation else None, g[1:])
        for i in range(k):
            merged = g[:i] + (g[i] + g[i + 1],) + g[i + 2 :]
            total = total + (-1) ** (i + 1) * ev(u, merged)
        total = total + (-1) ** (k + 1) * ev(u, g[:k])
        return total

    return GroupCochain(k + 1, f.dimension, d, f.mode, f.lattice, f"d[{f.name}]")


def perturbed(f: GroupCochain, extra: Callable | None = None) -> GroupCochain:
    """Negative control: ``f`` with ``extra(*args)`` added to its lift.

    The default adds ``x_1^2 y_1`` on the first two group arguments.
    """
    if extra is None:

        def extra(*g):
            return g[0][0] ** 2 * g[1][0]

    if f.mode == TRANSLATION:
        fn = lambda u, *g: f.exponent(u, *g) + extra(*g)
    else:
        fn = lambda *g: f.exponent(*g) + extra(*g)
    return GroupCochain(f.degree, f.dimension, fn, f.mode, f.lattice, f"perturbed[{f.name}]")


@dataclass
class CocycleReport:
    passed: bool
    samples: int
    worst_deviation: Fraction | float
    worst_arguments: tuple | None = None


def _sample_args(f: GroupCochain, k: int, rng: random.Random, backend: str = "rational"):
    n = f.dimension

    def draw(lattice):
        if backend == "float" and not lattice:
            return random_float_vector(rng, n)
        return random_vector(rng, n, lattice=lattice)

    g = tuple(draw(f.lattice) for _ in range(k))
    u = draw(False) if f.mode == TRANSLATION else None
    return u, g


def verify_cocycle(f: GroupCochain, samples: int = 500, rng_seed: int = 1, backend: str = "rational") -> CocycleReport:
    """Evaluate ``df`` on random rational (or lattice) tuples; pass iff all trivial.

    With ``backend="float"`` real arguments are floats and the pass
    criterion is a circle distance of at most 1e-9.
    """
    if f.degree > 3:
        raise ValueError("verify_cocycle supports degree <= 3")
    df = group_coboundary(f)
    rng = random.Random(rng_seed)
    worst, worst_args = Fraction(0), None
    for _ in range(samples):
        u, g = _sample_args(df, df.degree, rng, backend)
        dev = df(*g, base=u).distance(Phase(0))
        if dev > worst:
            worst, worst_args = dev, (u, g)
    passed = worst == 0 if isinstance(worst, Fraction) else worst <= 1e-9
    return CocycleReport(passed, samples, worst, worst_args)


def shift_2cocycle(w: TwoForm) -> GroupCochain:
    """``C(x; p, q) = exp(2 pi i N w(x, p))`` with ``N = sum_j q_j``.

    Base point ``x`` in R^n, arguments in Z^n.
    """

    def e(x, p, q):
        return sum(q.entries, Fraction(0)) * two_form_eval(w, x, p)

    return _trans(2, w.n, e, lattice=True, name="shift")


def dd_2cocycle(a: AntisymTensor3, convention: str = "ordered") -> GroupCochain:
    """``C'(x; u, v) = exp(2 pi i sum a_ijk x_i u_j v_k)``.

    ``convention="ordered"`` sums over all ordered index triples (the
    convention used everywhere else in the package).  ``"increasing"`` sums
    over ``i < j < k`` only; this is the normalization in which the
    two-form equivalence ``alpha = 2(w12 + w23 + w31)`` holds.
    """
    if convention == "ordered":
        return _trans(2, a.n, lambda x, u, v: triple_eval(a, x, u, v), lattice=True, name="dd")
    if convention == "increasing":
        terms = a.independent

        def e(x, u, v):
            total = Fraction(0)
            for (i, j, k), c in terms:
                total = total + c * x[i] * u[j] * v[k]
            return total

        return _trans(2, a.n, e, lattice=True, name="dd<")
    raise ValueError(f"unknown convention {convention!r}")


def luscher_2cocycle_form(a: AntisymTensor3 | None, u, x, y) -> Phase:
    """``c2(u; x, y) = exp(2 pi i sum a_ijk u_i x_j y_k)`` for lattice ``x, y``."""
    x, y = as_vector(x), as_vector(y)
    require_lattice(x, y)
    if a is None:
        return Phase(0)
    return Phase(triple_eval(a, u, x, y))


# ---------------------------------------------------------------------------
# cocycle equivalence


def _monomials(nvars: int, degree: int) -> list[tuple[int, ...]]:
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            out.append(tuple(e))
    return out


def _eval_monomials(monos, point):
    vals = []
    for m in monos:
        acc = Fraction(1)
        for v, k in zip(point, m):
            if k:
                acc = acc * v**k
        vals.append(acc)
    return vals


@dataclass
class EquivalenceResult:
    found: bool
    residual: Fraction | float
    coefficients: dict = field(default_factory=dict)
    beta: GroupCochain | None = None
    message: str = ""


def polynomial_1cochain(n: int, coefficients: dict) -> GroupCochain:
    """``beta(x; p) = sum c_m x^m1 p^m2`` over monomials in ``(x, p)``."""
    items = list(coefficients.items())

    def e(x, p):
        point = list(x.entries) + list(p.entries)
        total = Fraction(0)
        for m, c in items:
            acc = c
            for v, k in zip(point, m):
                if k:
                    acc = acc * v**k
            total = total + acc
        return total

    return _trans(1, n, e, lattice=True, name="beta")


def cocycle_equivalence(
    C1: GroupCochain,
    C2: GroupCochain,
    ansatz_degree: int = 3,
    rng_seed: int = 1,
    check_samples: int = 200,
) -> EquivalenceResult:
    """Search for a polynomial 1-cochain ``beta`` with ``C1 / C2 = d beta`` mod 1.

    Both inputs are translation-module 2-cochains on lattice arguments whose
    lifts are polynomials of degree at most ``ansatz_degree``.  With
    ``D = lift(C1) - lift(C2)`` the requirement is that
    ``D - d beta`` be integer-valued for real base points and lattice
    arguments.  Since the base point is real, the part of ``D - d beta`` that
    depends on it must vanish identically (an exact linear system over Q);
    the base-point-free remainder only has to be integer-valued, which is a
    polynomial of degree ``<= ansatz_degree`` in ``(p, q)`` and therefore is
    integer-valued iff it is so on the grid ``{v in N^2n : |v| <= degree}``.
    """
    for C in (C1, C2):
        if C.degree != 2 or C.mode != TRANSLATION:
            raise ValueError("cocycle_equivalence expects translation-module 2-cochains")
    if C1.dimension != C2.dimension:
        raise ValueError("dimension mismatch")
    n = C1.dimension
    d = ansatz_degree
    monos = _monomials(2 * n, d)
    nunk = len(monos)
    zero = GroupVector.zero(n)

    def D(x, p, q):
        return C1.lift(p, q, base=x) - C2.lift(p, q, base=x)

    def dbeta_row(x, p, q):
        xp = x + p
        pq = p + q
        a = _eval_monomials(monos, list(xp.entries) + list(q.entries))
        b = _eval_monomials(monos, list(x.entries) + list(pq.entries))
        c = _eval_monomials(monos, list(x.entries) + list(p.entries))
        return [ai - bi + ci for ai, bi, ci in zip(a, b, c)]

    rng = random.Random(rng_seed)
    n_points = len(_monomials(3 * n, d)) + 40
    rows, rhs = [], []
    for _ in range(n_points):
        x = random_vector(rng, n, span=3, max_den=7)
        p = random_vector(rng, n, lattice=True, span=4)
        q = random_vector(rng, n, lattice=True, span=4)
        r1, r0 = dbeta_row(x, p, q), dbeta_row(zero, p, q)
        rows.append([a - b for a, b in zip(r1, r0)])
        rhs.append(D(x, p, q) - D(zero, p, q))

    sol = solve_affine(rows, rhs, nunk)
    if sol is None:
        A = np.array(rows, dtype=float)
        y = np.array(rhs, dtype=float)
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        res = float(np.max(np.abs(A @ coef - y)))
        return EquivalenceResult(False, res, message="base-point-dependent part has no polynomial solution")
    c0, null = sol

    grid = [g for g in _monomials(2 * n, d)]
    H, h = [], []
    for g in grid:
        p = GroupVector(g[:n])
        q = GroupVector(g[n:])
        H.append(dbeta_row(zero, p, q))
        h.append(D(zero, p, q))
    # residual(t) = h - H (c0 + F t) = b - M t
    b = [hi - sum(r * c for r, c in zip(row, c0)) for row, hi in zip(H, h)]
    M = [[sum(r * v[i] for i, r in enumerate(row)) for v in null] for row in H]
    t = solve_mod_integers(M, b, len(null))
    if t is None:
        return EquivalenceResult(False, max(_frac_part(v) for v in b), message="integrality obstruction")
    coeffs = list(c0)
    for tj, v in zip(t, null):
        if tj:
            coeffs = [c + tj * vi for c, vi in zip(coeffs, v)]
    coefficients = {m: c for m, c in zip(monos, coeffs) if c != 0}
    beta = polynomial_1cochain(n, coefficients)

    check_rng = random.Random(rng_seed + 7919)
    worst = Fraction(0)
    for _ in range(check_samples):
        x = random_vector(check_rng, n, span=5, max_den=11)
        p = random_vector(check_rng, n, lattice=True, span=6)
        q = random_vector(check_rng, n, lattice=True, span=6)
        db = beta(q, base=x + p) * beta(p + q, base=x).inverse() * beta(p, base=x)
        dev = (C1(p, q, base=x) / C2(p, q, base=x)).distance(db)
        worst = max(worst, dev)
    found = worst == 0
    return EquivalenceResult(found, worst, coefficients, beta if found else None,
                             "" if found else "fresh-sample check failed")


def _frac_part(v: Fraction) -> Fraction:
    r = v - (v.numerator // v.denominator)
    return min(r, 1 - r)
