"""Piecewise-linear paths, integer chains, and exact integrals of B and Omega.

Loops are compared as reduced 1-chains: formal integer sums of directed
segments in which a segment and its reverse cancel.  Segments and triangles
are stored in a canonical vertex order with the orientation carried by the
sign of the multiplicity, so chain equality is dictionary equality.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from magtrans.core import (
    AntisymTensor3,
    GroupVector,
    Phase,
    as_scalar,
    as_vector,
)


@dataclass(frozen=True)
class PLPath:
    """Breakpoints ``(t_i, v_i)`` with strictly increasing ``t_i``; linear between."""

    breakpoints: tuple

    def __init__(self, breakpoints):
        bps = tuple((as_scalar(t), as_vector(v)) for t, v in breakpoints)
        if len(bps) < 2:
            raise ValueError("a path needs at least two breakpoints")
        for (t0, _), (t1, _) in zip(bps, bps[1:]):
            if not t1 > t0:
                raise ValueError("breakpoint parameters must increase strictly")
        object.__setattr__(self, "breakpoints", bps)

    @property
    def start(self) -> GroupVector:
        return self.breakpoints[0][1]

    @property
    def end(self) -> GroupVector:
        return self.breakpoints[-1][1]

    @property
    def interval(self) -> tuple:
        return self.breakpoints[0][0], self.breakpoints[-1][0]

    @property
    def is_closed(self) -> bool:
        return self.start == self.end

    def __call__(self, t) -> GroupVector:
        t = as_scalar(t)
        bps = self.breakpoints
        if t < bps[0][0] or t > bps[-1][0]:
            raise ValueError(f"parameter {t} outside {self.interval}")
        for (t0, v0), (t1, v1) in zip(bps, bps[1:]):
            if t0 <= t <= t1:
                s = (t - t0) / (t1 - t0)
                return v0 + (v1 - v0) * s
        raise AssertionError("unreachable")

    def vertices(self) -> list[GroupVector]:
        """Breakpoint values with consecutive repeats removed."""
        out = []
        for _, v in self.breakpoints:
            if not out or out[-1] != v:
                out.append(v)
        return out

    def then(self, other: "PLPath") -> "PLPath":
        """Join paths end to start (no translation), re-indexing ``other``'s parameter."""
        if other.start != self.end:
            raise ValueError("paths do not meet")
        t_end = self.breakpoints[-1][0]
        t0 = other.breakpoints[0][0]
        tail = [(t_end + (t - t0), v) for t, v in other.breakpoints[1:]]
        return PLPath(list(self.breakpoints) + tail)

    def reversed(self) -> "PLPath":
        a, b = self.interval
        return PLPath([(a + b - t, v) for t, v in reversed(self.breakpoints)])

    def translated(self, g) -> "PLPath":
        g = as_vector(g)
        return PLPath([(t, g + v) for t, v in self.breakpoints])

    def to_chain(self) -> "OneChain":
        segs = [(v0, v1) for (_, v0), (_, v1) in zip(self.breakpoints, self.breakpoints[1:])]
        return OneChain.from_segments(segs)


def straight_path(x) -> PLPath:
    x = as_vector(x)
    return PLPath([(0, GroupVector.zero(len(x))), (1, x)])


def concat(f: PLPath, f1: PLPath) -> PLPath:
    """Travel ``f``, then ``t -> f(end) + f1(t)`` on the following interval."""
    if any(v != 0 for v in f1.start):
        raise ValueError("the appended path must start at the origin")
    return f.then(f1.translated(f.end))


def _line_key(p: GroupVector, q: GroupVector):
    d = q - p
    i0 = next(i for i, c in enumerate(d) if c != 0)
    d = d * (1 / d[i0]) if isinstance(d[i0], float) else d * (Fraction(1) / d[i0])
    offset = p - d * p[i0]
    return (d, offset), i0


def _refine(terms: dict) -> dict:
    """Canonical form modulo collinear subdivision.

    Segments on a common line are cut at every endpoint, multiplicities are
    summed per piece, and adjacent pieces with equal multiplicity merged
    again, so ``[p, q] + [q, r]`` and ``[p, r]`` agree for collinear points.
    """
    lines: dict = {}
    for (p, q), m in terms.items():
        if m == 0:
            continue
        key, i0 = _line_key(p, q)
        lines.setdefault(key, (i0, []))[1].append((p, q, m))
    out: dict = {}
    for i0, segs in lines.values():
        if len(segs) == 1:
            p, q, m = segs[0]
            out[(p, q)] = out.get((p, q), 0) + m
            continue
        points = {}
        for p, q, _ in segs:
            points.setdefault(p[i0], p)
            points.setdefault(q[i0], q)
        cuts = sorted(points)
        pos = {c: i for i, c in enumerate(cuts)}
        diff = [0] * (len(cuts) + 1)
        for p, q, m in segs:
            diff[pos[p[i0]]] += m
            diff[pos[q[i0]]] -= m
        run_start, run_m, acc = None, 0, 0
        for i, c in enumerate(cuts):
            acc += diff[i]
            if acc != run_m:
                if run_m:
                    out[(points[run_start], points[c])] = run_m
                run_start, run_m = c, acc
        # acc returns to 0 at the last cut, closing any open run
    return {k: v for k, v in out.items() if v != 0}


class OneChain:
    """Reduced integer combination of directed segments.

    Equality is equality of 1-currents: backtracks cancel and collinear
    pieces are merged into maximal runs.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: dict | None = None):
        self._terms = _refine(terms or {})

    @staticmethod
    def _canonical(p: GroupVector, q: GroupVector):
        return ((p, q), 1) if p < q else ((q, p), -1)

    @classmethod
    def from_segments(cls, segments, multiplicity: int = 1) -> "OneChain":
        terms: dict = {}
        for p, q in segments:
            p, q = as_vector(p), as_vector(q)
            if p == q:
                continue
            key, s = cls._canonical(p, q)
            terms[key] = terms.get(key, 0) + s * multiplicity
        return cls(terms)

    def segments(self) -> list:
        """Directed segments, repeated by multiplicity, in canonical order."""
        out = []
        for (p, q), m in sorted(self._terms.items(), key=lambda kv: kv[0]):
            seg = (p, q) if m > 0 else (q, p)
            out.extend([seg] * abs(m))
        return out

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def __add__(self, other: "OneChain") -> "OneChain":
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms.get(k, 0) + v
        return OneChain(terms)

    def __neg__(self) -> "OneChain":
        return OneChain({k: -v for k, v in self._terms.items()})

    def __sub__(self, other: "OneChain") -> "OneChain":
        return self + (-other)

    def __eq__(self, other) -> bool:
        return isinstance(other, OneChain) and self._terms == other._terms

    def __len__(self) -> int:
        return sum(abs(v) for v in self._terms.values())

    def is_empty(self) -> bool:
        return not self._terms

    def vertices(self) -> set:
        return {v for seg in self._terms for v in seg}

    def boundary(self) -> dict:
        out: dict = {}
        for (p, q), m in self._terms.items():
            out[q] = out.get(q, 0) + m
            out[p] = out.get(p, 0) - m
        return {k: v for k, v in out.items() if v != 0}

    def __repr__(self):
        return "OneChain(" + " + ".join(f"{m}*[{p}->{q}]" for (p, q), m in self._terms.items()) + ")"


def chain_sum(c1: OneChain, c2: OneChain) -> OneChain:
    return c1 + c2


def left_translate(c: OneChain, g) -> OneChain:
    g = as_vector(g)
    out = OneChain()
    for (p, q), m in c.terms.items():
        out = out + OneChain.from_segments([(g + p, g + q)], m)
    return out


def loop_path(x, y) -> PLPath:
    """``f_x * f_y`` followed by ``f_{x+y}`` travelled backwards to the origin."""
    x, y = as_vector(x), as_vector(y)
    return concat(straight_path(x), straight_path(y)).then(straight_path(x + y).reversed())


def triangle_loop(x, y) -> OneChain:
    return loop_path(x, y).to_chain()


def polygon_chain(*vertices) -> OneChain:
    vs = [as_vector(v) for v in vertices]
    return OneChain.from_segments(list(zip(vs, vs[1:] + vs[:1])))


def loop_cocycle_sides(x, y, z) -> tuple[OneChain, OneChain]:
    x, y, z = as_vector(x), as_vector(y), as_vector(z)
    lhs = chain_sum(triangle_loop(x, y), triangle_loop(x + y, z))
    rhs = chain_sum(left_translate(triangle_loop(y, z), x), triangle_loop(x, y + z))
    return lhs, rhs


def verify_loop_cocycle(x, y, z) -> bool:
    x, y, z = as_vector(x), as_vector(y), as_vector(z)
    lhs, rhs = loop_cocycle_sides(x, y, z)
    expected = polygon_chain(GroupVector.zero(len(x)), x, x + y, x + y + z)
    return lhs == rhs == expected


# --- 2-chains and simplices -------------------------------------------------


def _is_degenerate(p, q, r) -> bool:
    u, v = q - p, r - p
    for i, j in itertools.combinations(range(len(u)), 2):
        m = u[i] * v[j] - u[j] * v[i]
        if (m != 0) if isinstance(m, Fraction) else abs(m) > 1e-15:
            return False
    return True


class TwoChain:
    """Integer combination of oriented triangles, degenerate ones dropped."""

    __slots__ = ("_terms",)

    def __init__(self, terms: dict | None = None):
        self._terms = {k: v for k, v in (terms or {}).items() if v != 0}

    @classmethod
    def from_triangles(cls, triangles, multiplicities=None) -> "TwoChain":
        terms: dict = {}
        mults = multiplicities or [1] * len(triangles)
        for tri, m in zip(triangles, mults):
            p, q, r = (as_vector(v) for v in tri)
            if _is_degenerate(p, q, r):
                continue
            verts = [p, q, r]
            order = sorted(range(3), key=lambda i: verts[i].entries)
            sign = 1 if order in ([0, 1, 2], [1, 2, 0], [2, 0, 1]) else -1
            key = tuple(verts[i] for i in order)
            terms[key] = terms.get(key, 0) + sign * m
        return cls(terms)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def oriented(self) -> list:
        """``((p, q, r), multiplicity)`` in canonical vertex order."""
        return list(self._terms.items())

    def __add__(self, other: "TwoChain") -> "TwoChain":
        terms = dict(self._terms)
        for k, v in other._terms.items():
            terms[k] = terms.get(k, 0) + v
        return TwoChain(terms)

    def __eq__(self, other):
        return isinstance(other, TwoChain) and self._terms == other._terms

    def boundary(self) -> OneChain:
        out = OneChain()
        for (p, q, r), m in self._terms.items():
            out = out + OneChain.from_segments([(p, q), (q, r), (r, p)], m)
        return out


@dataclass(frozen=True)
class Tetrahedron:
    """Simplex with vertices ``0, x, x+y, x+y+z``."""

    x: GroupVector
    y: GroupVector
    z: GroupVector

    def __init__(self, x, y, z):
        object.__setattr__(self, "x", as_vector(x))
        object.__setattr__(self, "y", as_vector(y))
        object.__setattr__(self, "z", as_vector(z))

    @property
    def vertices(self) -> tuple:
        o = GroupVector.zero(len(self.x))
        return (o, self.x, self.x + self.y, self.x + self.y + self.z)

    def faces(self) -> TwoChain:
        """Oriented boundary ``x.l(y,z) + l(x,y+z) - l(x,y) - l(x+y,z)``."""
        v0, v1, v2, v3 = self.vertices
        return TwoChain.from_triangles(
            [(v1, v2, v3), (v0, v1, v3), (v0, v1, v2), (v0, v2, v3)],
            [1, 1, -1, -1],
        )


def _minor3(cols, i, j, k):
    (a, b, c) = cols
    return (
        a[i] * (b[j] * c[k] - b[k] * c[j])
        - a[j] * (b[i] * c[k] - b[k] * c[i])
        + a[k] * (b[i] * c[j] - b[j] * c[i])
    )


def integrate_omega_tet(a: AntisymTensor3, V: Tetrahedron):
    """Exact integral of the constant 3-form over ``V``.

    Pulled back along the affine chart with edge vectors ``v1-v0, v2-v0,
    v3-v0``, each ordered term ``dx_i dx_j dx_k`` contributes the
    corresponding Jacobian minor times the reference-simplex volume 1/6.
    """
    v0, v1, v2, v3 = V.vertices
    cols = (v1 - v0, v2 - v0, v3 - v0)
    total = Fraction(0)
    for (i, j, k), c in a.independent:
        for perm in itertools.permutations((i, j, k)):
            total = total + a[perm] * _minor3(cols, *perm) / 6
    return total


def integrate_b_triangle(a: AntisymTensor3, T) -> Fraction | float:
    """Exact integral of ``B = sum a_ijk x_i dx_j dx_k`` over an oriented triangle.

    The pulled-back integrand is affine, so the centroid rule is exact:
    ``sum a_ijk c_i M_jk`` with ``M_jk = (u_j v_k - u_k v_j) / 2``.
    """
    p, q, r = (as_vector(v) for v in T)
    u, v = q - p, r - p
    centroid = (p + q + r) * Fraction(1, 3)
    total = Fraction(0)
    for (i, j, k), c in a.independent:
        for perm in itertools.permutations((i, j, k)):
            ii, jj, kk = perm
            area = (u[jj] * v[kk] - u[kk] * v[jj]) / 2
            total = total + a[perm] * centroid[ii] * area
    return total


def integrate_b_chain(a: AntisymTensor3, chain: TwoChain):
    return sum((m * integrate_b_triangle(a, tri) for tri, m in chain.oriented()), Fraction(0))


def stokes_check(a: AntisymTensor3, V: Tetrahedron):
    """``|sum over boundary faces of int B - int_V Omega|``."""
    return abs(integrate_b_chain(a, V.faces()) - integrate_omega_tet(a, V))


def tetra_phase(a: AntisymTensor3, x, y, z) -> Phase:
    return Phase(integrate_omega_tet(a, Tetrahedron(x, y, z)))


# --- Monte-Carlo oracle -----------------------------------------------------

MC_BLOCK = 1 << 16


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("MAGTRANS_THREADS", "1")))
    except ValueError:
        return 1


def _mc_block(density: float, seed: int, block: int, size: int):
    # block index in the high counter word: streams never overlap
    g = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, block]))
    s = g.random((size, 3))
    inside = s.sum(axis=1) <= 1.0
    vals = np.where(inside, density, 0.0)
    return vals.sum(), (vals**2).sum()


def monte_carlo_omega_tet(a: AntisymTensor3, V: Tetrahedron, samples: int = 10**6, seed: int = 0):
    """Hit-or-miss estimate of ``int_V Omega`` and its standard error.

    Uniform samples in the unit parameter cube; the integrand is the
    pulled-back density (Omega evaluated on the three edge vectors) inside
    the reference simplex and zero outside.  Philox blocks keyed by
    ``(seed, block)`` keep the estimate independent of thread count.
    """
    v0, v1, v2, v3 = V.vertices
    J = np.array([[float(c) for c in (v1 - v0)], [float(c) for c in (v2 - v0)], [float(c) for c in (v3 - v0)]]).T
    # dx_i ^ dx_j ^ dx_k on three vectors is the determinant of rows (i, j, k)
    density = 0.0
    for idx in itertools.product(range(a.n), repeat=3):
        c = float(a[idx])
        if c:
            density += c * float(np.linalg.det(J[list(idx), :]))
    sizes = [MC_BLOCK] * (samples // MC_BLOCK)
    if samples % MC_BLOCK:
        sizes.append(samples % MC_BLOCK)
    with ThreadPoolExecutor(max_workers=_thread_cap()) as ex:
        parts = list(ex.map(lambda b: _mc_block(density, seed, b, sizes[b]), range(len(sizes))))
    s1 = sum(p[0] for p in parts)
    s2 = sum(p[1] for p in parts)
    mean = s1 / samples
    var = max(s2 / samples - mean**2, 0.0)
    return mean, float(np.sqrt(var / samples))
