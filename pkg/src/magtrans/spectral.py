"""Fourier matrix elements of multiplication operators on the circle.

Convention used throughout: the circle is ``t in [0, 1)`` with modes
``e_p(t) = exp(2 pi i p t)``.  A map ``l: [0,1] -> R^n`` acts on component
``k`` by multiplication with ``exp(2 pi i l_k(t))``, so an angle-valued
formula over ``[0, 2 pi]`` translates with ``theta = 2 pi t``.

The energy polarization splits modes into ``p >= 0`` (positive block,
``eps = +1``) and ``p < 0`` (``eps = -1``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from magtrans.core import as_scalar


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class LoopFunction:
    """Per-component piecewise-linear map on ``[0, 1]``.

    ``components[k]`` is a list of ``(t, value)`` breakpoints starting at
    ``t = 0`` and ending at ``t = 1``.
    """

    components: tuple

    def __init__(self, components):
        comps = []
        for bps in components:
            bps = tuple((float(t), float(v)) for t, v in bps)
            if bps[0][0] != 0.0 or bps[-1][0] != 1.0:
                raise ValueError("breakpoints must span [0, 1]")
            if any(t1 <= t0 for (t0, _), (t1, _) in zip(bps, bps[1:])):
                raise ValueError("breakpoints must increase strictly")
            comps.append(bps)
        object.__setattr__(self, "components", tuple(comps))

    @property
    def dimension(self) -> int:
        return len(self.components)

    def endpoint_difference(self) -> np.ndarray:
        return np.array([c[-1][1] - c[0][1] for c in self.components])

    @property
    def is_open(self) -> bool:
        d = self.endpoint_difference()
        return bool(np.any(np.abs(d - np.round(d)) > 1e-12))

    @property
    def winding(self) -> np.ndarray | None:
        if self.is_open:
            return None
        return np.round(self.endpoint_difference()).astype(int)

    def __call__(self, t: float) -> np.ndarray:
        return np.array([np.interp(t, [b[0] for b in c], [b[1] for b in c]) for c in self.components])

    @classmethod
    def from_vertices(cls, vertices, times=None) -> "LoopFunction":
        """Polygon through ``vertices`` (rows of R^n) at the given parameters.

        Defaults to equally spaced parameters on ``[0, 1]``.
        """
        V = np.asarray([[float(as_scalar(c)) for c in v] for v in vertices])
        ts = np.linspace(0.0, 1.0, len(V)) if times is None else np.asarray(times, dtype=float)
        return cls([list(zip(ts, V[:, k])) for k in range(V.shape[1])])

    @classmethod
    def linear(cls, v) -> "LoopFunction":
        v = np.atleast_1d(np.asarray(v, dtype=float))
        return cls([[(0.0, 0.0), (1.0, float(c))] for c in v])


def triangle_loop_function(x, y, times=(0.0, 0.3, 0.65, 1.0)) -> LoopFunction:
    """The closed polygon ``0 -> x -> x+y -> 0`` on ``[0, 1]``."""
    x = np.asarray([float(as_scalar(c)) for c in x])
    y = np.asarray([float(as_scalar(c)) for c in y])
    return LoopFunction.from_vertices([0 * x, x, x + y, 0 * x], times)


def _segment_coefficients(bps, d: np.ndarray) -> np.ndarray:
    """``int_0^1 exp(2 pi i (l(t) - d t)) dt`` for an array of frequencies ``d``.

    Closed form per linear segment: ``h * exp(i * mid-phase) * sinc((s - d) h)``
    with ``np.sinc(x) = sin(pi x) / (pi x)``, exact at zero frequency.
    """
    d = np.asarray(d, dtype=float)
    out = np.zeros(d.shape, dtype=complex)
    for (t0, v0), (t1, v1) in zip(bps, bps[1:]):
        h = t1 - t0
        s = (v1 - v0) / h
        nu = s - d
        mid = v0 + s * h / 2 - d * (t0 + h / 2)
        x = nu * h
        sinc = np.sinc(x)
        # np.sinc leaves ~1e-17 at nonzero integers; those zeros are exact
        sinc = np.where((x != 0) & (x == np.round(x)), 0.0, sinc)
        out += h * np.exp(2j * np.pi * mid) * sinc
    return out


def fourier_element(loop: LoopFunction, k: int, p, q):
    """``<e_p, exp(2 pi i l_k) e_q> = int_0^1 exp(2 pi i (l_k(t) + (q - p) t)) dt``."""
    p = np.asarray(p)
    q = np.asarray(q)
    val = _segment_coefficients(loop.components[k], p - q)
    return val.item() if val.ndim == 0 else val


def _pair_counts(gamma: int, d: np.ndarray) -> np.ndarray:
    # pairs 0 <= p < gamma, -gamma <= q < 0 with p - q = d
    return np.minimum(gamma - 1, d - 1) - np.maximum(0, d - gamma) + 1


def hs_partial_sum(loop: LoopFunction, k: int, gamma: int) -> float:
    """Squared Hilbert-Schmidt norm of the (+,-) block truncated at ``gamma``.

    The element only depends on ``d = p - q``, so the double sum is carried
    out over ``d = 1 .. 2 gamma - 1`` with pair multiplicities, and
    accumulated with ``math.fsum``.
    """
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    d = np.arange(1, 2 * gamma)
    w = _pair_counts(gamma, d)
    c = _segment_coefficients(loop.components[k], d)
    return math.fsum((w * np.abs(c) ** 2).tolist())


def hs_partial_sums(loop: LoopFunction, k: int, gammas) -> list[float]:
    return [hs_partial_sum(loop, k, int(g)) for g in gammas]


@dataclass
class DecayFit:
    slope: float
    intercept: float
    distances: np.ndarray
    magnitudes: np.ndarray


def ray_distances(dmin: int, dmax: int, points: int = 24) -> np.ndarray:
    return np.unique(np.round(np.geomspace(dmin, dmax, points)).astype(int))


def decay_fit(loop: LoopFunction, k: int, distances) -> DecayFit:
    """Least-squares slope of ``ln|element|`` against ``ln|p - q|``.

    Elements are taken on the off-diagonal ray ``p = ceil(d/2)``,
    ``q = p - d``, so every point lies in the (+,-) block.
    """
    d = np.asarray(distances, dtype=int)
    if len(d) < 8:
        raise ValueError("decay_fit needs at least 8 distances")
    p = (d + 1) // 2
    q = p - d
    mags = np.abs(fourier_element(loop, k, p, q))
    keep = mags > 0
    if keep.sum() < 8:
        raise ValueError("fewer than 8 nonzero elements on the ray")
    slope, intercept = np.polyfit(np.log(d[keep]), np.log(mags[keep]), 1)
    return DecayFit(float(slope), float(intercept), d, mags)


@dataclass
class LogFit:
    b0: float
    b1: float
    r2: float


def fit_log_growth(gammas, sums) -> LogFit:
    """Fit ``S = b0 + b1 ln(gamma)`` and report the coefficient of determination."""
    x = np.log(np.asarray(gammas, dtype=float))
    y = np.asarray(sums, dtype=float)
    b1, b0 = np.polyfit(x, y, 1)
    resid = y - (b0 + b1 * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return LogFit(float(b0), float(b1), r2)


# --- trigonometric polynomials and truncated operators ----------------------


@dataclass(frozen=True)
class TrigPolynomial:
    """``f_k(t) = sum_m coeffs[k][m] e_m(t)`` with ``m`` in ``[-degree, degree]``."""

    coeffs: np.ndarray  # shape (n, 2*degree + 1), column j is mode j - degree

    def __init__(self, coeffs):
        arr = np.atleast_2d(np.asarray(coeffs, dtype=complex))
        if arr.shape[1] % 2 != 1:
            raise ValueError("coefficient rows must have odd length 2*degree+1")
        object.__setattr__(self, "coeffs", arr)

    @property
    def degree(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    @property
    def dimension(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def mode(cls, m: int, n: int = 1, component: int = 0, value: complex = 1.0, degree: int | None = None):
        deg = abs(m) if degree is None else degree
        c = np.zeros((n, 2 * deg + 1), dtype=complex)
        c[component, m + deg] = value
        return cls(c)

    @classmethod
    def constant(cls, value, n: int = 1):
        return cls(np.full((n, 1), value, dtype=complex))

    @classmethod
    def random(cls, rng: np.random.Generator, degree: int, n: int = 1):
        c = rng.normal(size=(n, 2 * degree + 1)) + 1j * rng.normal(size=(n, 2 * degree + 1))
        return cls(c)

    def coefficient(self, k: int, m: int) -> complex:
        if abs(m) > self.degree:
            return 0j
        return complex(self.coeffs[k, m + self.degree])

    def padded(self, degree: int) -> np.ndarray:
        if degree < self.degree:
            raise ValueError("cannot pad to a smaller degree")
        extra = degree - self.degree
        return np.pad(self.coeffs, ((0, 0), (extra, extra)))

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        deg = max(self.degree, other.degree)
        return TrigPolynomial(self.padded(deg) + other.padded(deg))

    def __mul__(self, other):
        if isinstance(other, TrigPolynomial):
            rows = [np.convolve(a, b) for a, b in zip(self.coeffs, other.coeffs)]
            return TrigPolynomial(np.array(rows))
        return TrigPolynomial(self.coeffs * other)

    __rmul__ = __mul__

    def derivative(self) -> "TrigPolynomial":
        m = np.arange(-self.degree, self.degree + 1)
        return TrigPolynomial(self.coeffs * (2j * np.pi * m))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        m = np.arange(-self.degree, self.degree + 1)
        basis = np.exp(2j * np.pi * np.multiply.outer(t, m))
        return basis @ self.coeffs.T


@dataclass
class TruncatedOperator:
    """Matrix on the window ``[-M, M]`` of modes for ``n`` components.

    Index ``k * (2M + 1) + (p + M)`` is mode ``p`` of component ``k``.
    """

    window: int
    n: int
    matrix: np.ndarray
    _modes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        size = self.n * (2 * self.window + 1)
        if self.matrix.shape != (size, size):
            raise ValueError(f"expected a {size}x{size} matrix")
        self._modes = np.tile(np.arange(-self.window, self.window + 1), self.n)

    @property
    def modes(self) -> np.ndarray:
        return self._modes

    def index(self, k: int, p: int) -> int:
        return k * (2 * self.window + 1) + p + self.window

    @property
    def epsilon(self) -> np.ndarray:
        return np.where(self._modes >= 0, 1.0, -1.0)

    def block(self, rows: str, cols: str) -> np.ndarray:
        """Polarization block, e.g. ``block("+", "-")``."""
        sel = {"+": self._modes >= 0, "-": self._modes < 0}
        return self.matrix[np.ix_(sel[rows], sel[cols])]

    def __matmul__(self, other: "TruncatedOperator") -> "TruncatedOperator":
        return TruncatedOperator(self.window, self.n, self.matrix @ other.matrix)


def multiplication_operator(f, M: int) -> TruncatedOperator:
    """Matrix of pointwise multiplication on the truncated Fourier basis.

    ``f`` is a ``TrigPolynomial`` (entries ``f_k`` coefficient at ``p - q``)
    or a ``LoopFunction`` (entries ``fourier_element``).  Components act
    independently, so the matrix is block diagonal.
    """
    size = 2 * M + 1
    p = np.arange(-M, M + 1)
    diff = np.subtract.outer(p, p)
    if isinstance(f, TrigPolynomial):
        if M < f.degree:
            raise WindowError(f"window {M} smaller than degree {f.degree}")
        blocks = []
        for k in range(f.dimension):
            row = f.coeffs[k]
            blk = np.zeros((size, size), dtype=complex)
            mask = np.abs(diff) <= f.degree
            blk[mask] = row[diff[mask] + f.degree]
            blocks.append(blk)
        n = f.dimension
    elif isinstance(f, LoopFunction):
        blocks = [_segment_coefficients(f.components[k], diff) for k in range(f.dimension)]
        n = f.dimension
    else:
        raise TypeError("expected TrigPolynomial or LoopFunction")
    mat = np.zeros((n * size, n * size), dtype=complex)
    for k, blk in enumerate(blocks):
        mat[k * size : (k + 1) * size, k * size : (k + 1) * size] = blk
    return TruncatedOperator(M, n, mat)


def luscher_trace(f: TrigPolynomial, g: TrigPolynomial, M: int) -> complex:
    """``(1/2) Tr F [eps, G]`` on the window ``[-M, M]``."""
    if M < f.degree + g.degree:
        raise WindowError(f"window {M} < deg f + deg g = {f.degree + g.degree}")
    F = multiplication_operator(f, M)
    G = multiplication_operator(g, M)
    eps = F.epsilon
    comm = eps[:, None] * G.matrix - G.matrix * eps[None, :]
    return 0.5 * complex(np.trace(F.matrix @ comm))


def luscher_integral(f: TrigPolynomial, g: TrigPolynomial) -> complex:
    """``(1/2 pi i) int tr f dg``.

    With ``g' = sum 2 pi i m g_m e_m`` and ``int_0^1 e_a e_b dt = delta_{a+b,0}``
    this is ``sum_k sum_m m f_{k,-m} g_{k,m}``.
    """
    deg = max(f.degree, g.degree)
    F, G = f.padded(deg), g.padded(deg)
    m = np.arange(-deg, deg + 1)
    return complex(np.sum(m[None, :] * F[:, ::-1] * G))


def _pairing(A: TrigPolynomial, X: TrigPolynomial) -> complex:
    # int_0^1 sum_k A_k X_k dt
    deg = max(A.degree, X.degree)
    a, x = A.padded(deg), X.padded(deg)
    return complex(np.sum(a * x[:, ::-1]))


def b1_cochain(A: TrigPolynomial, X: TrigPolynomial) -> complex:
    """``b1(A; X) = (1/4 pi i) int_0^1 sum_k A_k X_k dt``."""
    return _pairing(A, X) / (4j * np.pi)


# d/dt of the gauge parameter in the t in [0,1) convention
def gauge_shift(A: TrigPolynomial, X: TrigPolynomial) -> TrigPolynomial:
    """``A -> A + dX``."""
    return A + X.derivative()


# sign relating d b1 to the Luscher cocycle: d b1 = B1_SIGN * c2
B1_SIGN = -1


def delta_b1(A: TrigPolynomial, X: TrigPolynomial, Y: TrigPolynomial) -> complex:
    """``(d b1)(A; X, Y) = X.b1(A; Y) - Y.b1(A; X)``; the bracket term vanishes.

    ``X.b1(A; Y)`` is the change of ``b1(.; Y)`` along ``A -> A + dX``; since
    ``b1`` is affine in ``A`` the unit finite difference is exact.
    """
    x_on_y = b1_cochain(gauge_shift(A, X), Y) - b1_cochain(A, Y)
    y_on_x = b1_cochain(gauge_shift(A, Y), X) - b1_cochain(A, X)
    return x_on_y - y_on_x
