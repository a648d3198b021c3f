"""Circle-valued arithmetic and the multilinear tensor evaluations.

Everything downstream stores circle values as an exponent ``e`` of
``exp(2*pi*i*e)``, reduced modulo 1.  Rational inputs stay exact
(``fractions.Fraction``); any float input switches that value to the float
backend, where equality is measured on the circle with tolerance 1e-9.
"""

from __future__ import annotations

import itertools
import math
import numbers
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

FLOAT_TOL = 1e-9


class DimensionError(ValueError):
    pass


class LatticeError(ValueError):
    """Raised when a lattice-only argument has non-integer entries."""


def as_scalar(value):
    """Normalize a user scalar: integers and rationals to Fraction, rest to float.

    Strings such as ``"3/4"`` are parsed as rationals.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(value, numbers.Integral):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, numbers.Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, numbers.Real):
        return float(value)
    raise TypeError(f"unsupported scalar {value!r}")


def is_exact(value) -> bool:
    return isinstance(value, Fraction)


def _reduce_mod1(e):
    if isinstance(e, Fraction):
        return e - math.floor(e)
    r = float(e) % 1.0
    # tiny negatives round up to exactly 1.0
    return 0.0 if r >= 1.0 else r


@dataclass(frozen=True, eq=False)
class Phase:
    """The unit complex number ``exp(2*pi*i*exponent)``."""

    exponent: Fraction | float

    def __post_init__(self):
        object.__setattr__(self, "exponent", _reduce_mod1(as_scalar(self.exponent)))

    @property
    def backend(self) -> str:
        return "rational" if isinstance(self.exponent, Fraction) else "float"

    def __mul__(self, other: "Phase") -> "Phase":
        if not isinstance(other, Phase):
            return NotImplemented
        return Phase(self.exponent + other.exponent)

    def __truediv__(self, other: "Phase") -> "Phase":
        if not isinstance(other, Phase):
            return NotImplemented
        return Phase(self.exponent - other.exponent)

    def __pow__(self, k: int) -> "Phase":
        return Phase(self.exponent * k)

    def inverse(self) -> "Phase":
        return Phase(-self.exponent)

    def distance(self, other: "Phase") -> Fraction | float:
        """Circle metric ``min(|d|, 1 - |d|)`` between exponents."""
        d = _reduce_mod1(self.exponent - other.exponent)
        return min(d, 1 - d)

    def is_trivial(self) -> bool:
        return self == Phase(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Phase):
            return NotImplemented
        if self.backend == other.backend == "rational":
            return self.exponent == other.exponent
        return float(self.distance(other)) <= FLOAT_TOL

    def __hash__(self):
        if self.backend != "rational":
            raise TypeError("float-backend phases are not hashable")
        return hash(self.exponent)

    def __complex__(self) -> complex:
        return complex(np.exp(2j * np.pi * float(self.exponent)))

    def __repr__(self) -> str:
        return f"Phase({self.exponent})"


def phase_of(e) -> Phase:
    return Phase(e)


@dataclass(frozen=True)
class GroupVector:
    """An element of R^n (or Z^n when all entries are integers)."""

    entries: tuple

    def __init__(self, entries: Iterable):
        object.__setattr__(self, "entries", tuple(as_scalar(v) for v in entries))

    @property
    def dimension(self) -> int:
        return len(self.entries)

    @property
    def is_lattice(self) -> bool:
        return all(isinstance(v, Fraction) and v.denominator == 1 for v in self.entries)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(v, Fraction) for v in self.entries)

    @classmethod
    def zero(cls, n: int) -> "GroupVector":
        return cls([0] * n)

    @classmethod
    def basis(cls, n: int, i: int) -> "GroupVector":
        return cls([1 if j == i else 0 for j in range(n)])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def _check(self, other):
        if len(other.entries) != len(self.entries):
            raise DimensionError(f"dimension mismatch: {len(self.entries)} vs {len(other.entries)}")

    def __add__(self, other: "GroupVector") -> "GroupVector":
        self._check(other)
        return GroupVector([a + b for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other: "GroupVector") -> "GroupVector":
        self._check(other)
        return GroupVector([a - b for a, b in zip(self.entries, other.entries)])

    def __neg__(self) -> "GroupVector":
        return GroupVector([-a for a in self.entries])

    def __mul__(self, s) -> "GroupVector":
        s = as_scalar(s)
        return GroupVector([s * a for a in self.entries])

    __rmul__ = __mul__

    def __lt__(self, other: "GroupVector") -> bool:
        return self.entries < other.entries

    def __repr__(self) -> str:
        return "GroupVector(" + ", ".join(str(v) for v in self.entries) + ")"


def as_vector(v) -> GroupVector:
    return v if isinstance(v, GroupVector) else GroupVector(v)


def require_lattice(*vectors: GroupVector) -> None:
    for v in vectors:
        if not v.is_lattice:
            raise LatticeError(f"{v!r} is not a lattice vector")


def _perm_sign(perm: Sequence[int]) -> int:
    sign = 1
    perm = list(perm)
    for i in range(len(perm)):
        while perm[i] != i:
            j = perm[i]
            perm[i], perm[j] = perm[j], perm[i]
            sign = -sign
    return sign


_PERMS3 = [(p, _perm_sign(p)) for p in itertools.permutations(range(3))]


class AntisymTensor3:
    """Totally antisymmetric rank-3 coefficient tensor ``a_ijk`` on R^n.

    The dense constructor projects its input onto the antisymmetric part, so
    an already antisymmetric array is returned unchanged.  ``from_entries``
    instead treats each ``(i, j, k, value)`` as the generator of a signed
    orbit, which is how tensors like the Levi-Civita symbol are usually
    written down.
    """

    def __init__(self, n: int, coefficients=None):
        self.n = int(n)
        raw = {}
        if coefficients is not None:
            arr = np.asarray(coefficients, dtype=object)
            if arr.shape != (n, n, n):
                raise DimensionError(f"expected shape {(n, n, n)}, got {arr.shape}")
            for idx in itertools.product(range(n), repeat=3):
                v = arr[idx]
                if v != 0:
                    raw[idx] = as_scalar(v)
        self._set_from_raw(raw, project=True)

    def _set_from_raw(self, raw: dict, project: bool):
        n = self.n
        full = np.empty((n, n, n), dtype=object)
        full.fill(Fraction(0))
        # combos i<j<k carry all information
        self._independent = []
        for i, j, k in itertools.combinations(range(n), 3):
            total = Fraction(0)
            for perm, sign in _PERMS3:
                idx = tuple((i, j, k)[t] for t in perm)
                if idx in raw:
                    total = total + sign * raw[idx]
            if project:
                total = total / 6
            if total != 0:
                self._independent.append(((i, j, k), total))
            for perm, sign in _PERMS3:
                full[tuple((i, j, k)[t] for t in perm)] = sign * total
        self._full = full

    @classmethod
    def from_entries(cls, n: int, entries: Iterable[tuple]) -> "AntisymTensor3":
        """Build from sparse ``(i, j, k, value)`` entries, 0-based.

        Entries with a repeated index are dropped (they vanish under
        antisymmetry).  Listing two members of one orbit adds them.
        """
        self = cls.__new__(cls)
        self.n = int(n)
        raw: dict = {}
        for i, j, k, value in entries:
            for t in (i, j, k):
                if not 0 <= t < n:
                    raise DimensionError(f"index {t} out of range for n={n}")
            if len({i, j, k}) < 3:
                continue
            order = sorted((i, j, k))
            perm = tuple(order.index(t) for t in (i, j, k))
            key = tuple(order)
            raw[key] = raw.get(key, Fraction(0)) + _perm_sign(perm) * as_scalar(value)
        self._set_from_raw(raw, project=False)
        return self

    @classmethod
    def epsilon(cls, n: int = 3, scale=1) -> "AntisymTensor3":
        if n < 3:
            raise DimensionError("epsilon needs n >= 3")
        return cls.from_entries(n, [(0, 1, 2, scale)])

    @classmethod
    def zero(cls, n: int) -> "AntisymTensor3":
        return cls.from_entries(n, [])

    def __getitem__(self, idx):
        return self._full[idx]

    @property
    def coefficients(self) -> np.ndarray:
        return self._full.copy()

    @property
    def independent(self) -> list:
        """Nonzero ``((i, j, k), a_ijk)`` with ``i < j < k``."""
        return list(self._independent)

    @property
    def is_integral(self) -> bool:
        return all(isinstance(v, Fraction) and v.denominator == 1 for _, v in self._independent)

    def scaled(self, s) -> "AntisymTensor3":
        s = as_scalar(s)
        return AntisymTensor3.from_entries(self.n, [(i, j, k, s * v) for (i, j, k), v in self._independent])

    def __eq__(self, other):
        if not isinstance(other, AntisymTensor3):
            return NotImplemented
        return self.n == other.n and dict(self._independent) == dict(other._independent)

    def __repr__(self):
        return f"AntisymTensor3(n={self.n}, {dict(self._independent)})"


class TwoForm:
    """Antisymmetric matrix ``omega_ij``; ``entries`` give ``omega_ij`` for i<j."""

    def __init__(self, n: int, entries: Iterable[tuple] = ()):
        self.n = int(n)
        w = np.empty((n, n), dtype=object)
        w.fill(Fraction(0))
        for i, j, value in entries:
            if not (0 <= i < n and 0 <= j < n):
                raise DimensionError(f"index ({i}, {j}) out of range for n={n}")
            if i == j:
                continue
            v = as_scalar(value)
            w[i, j] = w[i, j] + v
            w[j, i] = w[j, i] - v
        self._w = w

    @classmethod
    def from_matrix(cls, matrix) -> "TwoForm":
        m = np.asarray(matrix, dtype=object)
        n = m.shape[0]
        entries = []
        for i, j in itertools.combinations(range(n), 2):
            v = (as_scalar(m[i, j]) - as_scalar(m[j, i])) / 2
            entries.append((i, j, v))
        return cls(n, entries)

    def __getitem__(self, idx):
        return self._w[idx]

    @property
    def matrix(self) -> np.ndarray:
        return self._w.copy()

    @property
    def is_integral(self) -> bool:
        return all(isinstance(v, Fraction) and v.denominator == 1 for v in self._w.flat)

    def __repr__(self):
        nz = {(i, j): self._w[i, j] for i, j in itertools.combinations(range(self.n), 2) if self._w[i, j] != 0}
        return f"TwoForm(n={self.n}, {nz})"


def _check_dims(n, *vectors):
    for v in vectors:
        if len(v) != n:
            raise DimensionError(f"vector of dimension {len(v)} used with n={n}")


def triple_eval(a: AntisymTensor3, x, y, z):
    """``sum over all ordered (i, j, k) of a_ijk x_i y_j z_k``.

    Evaluated as ``sum_{i<j<k} a_ijk * det`` of the corresponding 3x3 minor,
    which is the same sum regrouped by orbit.
    """
    x, y, z = as_vector(x), as_vector(y), as_vector(z)
    _check_dims(a.n, x, y, z)
    total = Fraction(0)
    for (i, j, k), c in a._independent:
        xi, xj, xk = x[i], x[j], x[k]
        yi, yj, yk = y[i], y[j], y[k]
        zi, zj, zk = z[i], z[j], z[k]
        minor = xi * (yj * zk - yk * zj) - xj * (yi * zk - yk * zi) + xk * (yi * zj - yj * zi)
        total = total + c * minor
    return total


def two_form_eval(w: TwoForm, x, y):
    """``sum_{i<j} w_ij (x_i y_j - x_j y_i)``."""
    x, y = as_vector(x), as_vector(y)
    _check_dims(w.n, x, y)
    total = Fraction(0)
    for i, j in itertools.combinations(range(w.n), 2):
        c = w[i, j]
        if c != 0:
            total = total + c * (x[i] * y[j] - x[j] * y[i])
    return total


# random instance generators shared by tests, suites and verify_cocycle


def random_rational(rng: random.Random, span: int = 3, max_den: int = 8) -> Fraction:
    den = rng.randint(1, max_den)
    return Fraction(rng.randint(-span * den, span * den), den)


def random_vector(rng: random.Random, n: int, lattice: bool = False, span: int = 3, max_den: int = 8) -> GroupVector:
    if lattice:
        return GroupVector([rng.randint(-span, span) for _ in range(n)])
    return GroupVector([random_rational(rng, span, max_den) for _ in range(n)])


def random_float_vector(rng: random.Random, n: int, span: float = 2.0) -> GroupVector:
    return GroupVector([rng.uniform(-span, span) for _ in range(n)])


def random_tensor(rng: random.Random, n: int, span: int = 3, integral: bool = True) -> AntisymTensor3:
    entries = []
    for i, j, k in itertools.combinations(range(n), 3):
        v = rng.randint(-span, span) if integral else random_rational(rng, span)
        entries.append((i, j, k, v))
    return AntisymTensor3.from_entries(n, entries)


def random_two_form(rng: random.Random, n: int, span: int = 3) -> TwoForm:
    return TwoForm(n, [(i, j, rng.randint(-span, span)) for i, j in itertools.combinations(range(n), 2)])
