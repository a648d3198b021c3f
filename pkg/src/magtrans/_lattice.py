"""Exact linear algebra helpers: affine solves over Q and integer solves over Z."""

from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

from sympy import QQ
from sympy.polys.matrices import DomainMatrix


def _to_dm(rows, ncols):
    return DomainMatrix([[QQ(v.numerator, v.denominator) for v in row] for row in rows], (len(rows), ncols), QQ)


def _frac(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


def solve_affine(rows: list[list[Fraction]], rhs: list[Fraction], ncols: int):
    """Solve ``A c = b`` over Q.

    Returns ``(particular, null_basis)`` with free variables set to zero in
    the particular solution, or ``None`` if the system is inconsistent.
    """
    if not rows:
        null = [[Fraction(int(i == j)) for i in range(ncols)] for j in range(ncols)]
        return [Fraction(0)] * ncols, null
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    rref, pivots = _to_dm(aug, ncols + 1).rref()
    if ncols in pivots:
        return None
    R = rref.to_Matrix()
    particular = [Fraction(0)] * ncols
    for r, col in enumerate(pivots):
        particular[col] = _frac(R[r, ncols])
    free = [c for c in range(ncols) if c not in pivots]
    null = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for r, col in enumerate(pivots):
            v[col] = -_frac(R[r, f])
        null.append(v)
    return particular, null


def left_null_space(rows: list[list[Fraction]], ncols: int) -> list[list[int]]:
    """Primitive integer basis of ``{y : y^T A = 0}``."""
    m = len(rows)
    if ncols == 0:
        return [[int(i == j) for i in range(m)] for j in range(m)]
    at = [[rows[i][j] for i in range(m)] for j in range(ncols)]
    sol = solve_affine(at, [Fraction(0)] * ncols, m)
    basis = []
    for v in sol[1]:
        den = lcm(*[x.denominator for x in v])
        ints = [int(x * den) for x in v]
        g = 0
        for x in ints:
            g = gcd(g, x)
        basis.append([x // g for x in ints])
    return basis


def integer_solve(K: list[list[int]], c: list[int]):
    """Find an integer vector ``z`` with ``K z = c``, or ``None``.

    Column-style Hermite reduction with a tracked unimodular transform.
    """
    r = len(K)
    m = len(K[0]) if r else 0
    cols = [[K[i][j] for i in range(r)] for j in range(m)]
    U = [[int(i == j) for i in range(m)] for j in range(m)]  # U[j] is column j

    def combine(j1, j2, a, b, cc, d):
        # (col j1, col j2) <- (a*col j1 + b*col j2, cc*col j1 + d*col j2)
        c1, c2 = cols[j1], cols[j2]
        cols[j1] = [a * x + b * y for x, y in zip(c1, c2)]
        cols[j2] = [cc * x + d * y for x, y in zip(c1, c2)]
        u1, u2 = U[j1], U[j2]
        U[j1] = [a * x + b * y for x, y in zip(u1, u2)]
        U[j2] = [cc * x + d * y for x, y in zip(u1, u2)]

    pivot_of_row = {}
    col = 0
    for i in range(r):
        if col >= m:
            break
        for j in range(col + 1, m):
            if cols[j][i] == 0:
                continue
            a, b = cols[col][i], cols[j][i]
            g, s, t = _xgcd(a, b)
            combine(col, j, s, t, -b // g, a // g)
        if cols[col][i] == 0:
            continue
        if cols[col][i] < 0:
            cols[col] = [-x for x in cols[col]]
            U[col] = [-x for x in U[col]]
        piv = cols[col][i]
        for j in range(col):
            q = cols[j][i] // piv
            if q:
                cols[j] = [x - q * y for x, y in zip(cols[j], cols[col])]
                U[j] = [x - q * y for x, y in zip(U[j], U[col])]
        pivot_of_row[i] = col
        col += 1

    y = [0] * m
    for i in range(r):
        acc = c[i] - sum(cols[j][i] * y[j] for j in range(m) if y[j])
        if i in pivot_of_row:
            j = pivot_of_row[i]
            q, rem = divmod(acc, cols[j][i])
            if rem:
                return None
            y[j] = q
        elif acc != 0:
            return None
    return [sum(U[j][k] * y[j] for j in range(m)) for k in range(m)]


def _xgcd(a: int, b: int):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def solve_mod_integers(M: list[list[Fraction]], b: list[Fraction], ncols: int):
    """Rational ``t`` with ``b - M t`` integral, or ``None``.

    Eliminates ``t`` through the left null space of ``M`` and solves the
    remaining integer system for the integral part.
    """
    m = len(M)
    K = left_null_space(M, ncols)
    kb = [sum(Fraction(k) * v for k, v in zip(row, b)) for row in K]
    if any(v.denominator != 1 for v in kb):
        return None
    if K:
        z = integer_solve(K, [int(v) for v in kb])
        if z is None:
            return None
    else:
        z = [0] * m
    rhs = [bi - zi for bi, zi in zip(b, z)]
    sol = solve_affine(M, rhs, ncols)
    if sol is None:
        return None
    return sol[0]
