"""Truncated fermionic Fock spaces over a window of Fourier modes.

Each component is a Dirac sea truncated to modes ``low .. high``: modes
below the window count as permanently occupied and modes above it as
permanently empty, so the vacuum fills exactly the window modes ``< 0``.
Basis states are occupation bitmasks (bit ``k - low`` is mode ``k``) and the
full basis is the plain tensor product over components, which makes
operators of different components commute.

Fermionic signs follow the semi-infinite wedge ordering: ``a*_k`` and
``a_k`` pick up ``(-1)`` to the number of occupied modes above ``k`` in the
same component.  Shifting all modes then never produces a sign.

Every operator here maps a basis state to at most one basis state times a
unit complex number, and is stored that way (``SparseFockOperator``).
Coefficients are kept as exact phase exponents so twisted composition laws
can be checked without rounding.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from magtrans.cochain import shift_2cocycle
from magtrans.core import FLOAT_TOL, GroupVector, Phase, TwoForm, as_vector, require_lattice, two_form_eval

FULL_ENUMERATION_LIMIT = 24
COMPONENT_LIMIT = 20
HALF = Fraction(1, 2)


class SectorError(ValueError):
    pass


@dataclass(frozen=True)
class ModeWindow:
    low: int
    high: int
    n: int = 1
    margin: int = 0

    def __post_init__(self):
        if not self.low < 0 <= self.high:
            raise SectorError(f"window [{self.low}, {self.high}] must satisfy low < 0 <= high")
        if self.n < 1 or self.margin < 0:
            raise SectorError("need n >= 1 and margin >= 0")
        if not self.low + self.margin < 0 <= self.high - self.margin:
            raise SectorError(f"margin {self.margin} too large for window [{self.low}, {self.high}]")

    @property
    def width(self) -> int:
        return self.high - self.low + 1

    @property
    def modes(self) -> range:
        return range(self.low, self.high + 1)


def _charge_level(mask: int, w: ModeWindow) -> tuple[int, int]:
    q = 0
    twice_energy = 0
    for k in w.modes:
        occ = (mask >> (k - w.low)) & 1
        if k >= 0 and occ:
            q += 1
            twice_energy += 2 * k + 1
        elif k < 0 and not occ:
            q -= 1
            twice_energy += -2 * k - 1
    return q, (twice_energy - q * q) // 2


class FockSector:
    """Product basis of per-component occupation patterns.

    With ``max_level=None`` every pattern in the window is kept (guarded by
    ``n * width <= 24``).  Otherwise each component keeps the patterns whose
    excitation level ``energy - charge**2 / 2`` is at most ``max_level``;
    mode shifts preserve that level, so shifted states stay in the basis.
    """

    def __init__(self, window: ModeWindow, max_level: int | None = None):
        self.window = window
        self.max_level = max_level
        w = window
        if max_level is None and w.n * w.width > FULL_ENUMERATION_LIMIT:
            raise SectorError(
                f"full enumeration of {w.n}x{w.width} modes exceeds the {FULL_ENUMERATION_LIMIT}-mode guard; pass max_level"
            )
        if w.width > COMPONENT_LIMIT:
            raise SectorError(f"window width {w.width} exceeds {COMPONENT_LIMIT}")
        masks, charges = [], []
        for mask in range(1 << w.width):
            q, level = _charge_level(mask, w)
            if max_level is None or level <= max_level:
                masks.append(mask)
                charges.append(q)
        self.component_masks = masks
        self.component_charges = np.array(charges, dtype=np.int64)
        self._mask_index = {m: i for i, m in enumerate(masks)}
        size = len(masks)
        self.component_size = size
        self.strides = np.array([size ** (w.n - 1 - j) for j in range(w.n)], dtype=np.int64)
        self.dimension = size**w.n
        idx = np.arange(self.dimension, dtype=np.int64)
        self.component_index = np.stack([(idx // s) % size for s in self.strides], axis=1)
        self.particle_number = self.component_charges[self.component_index].sum(axis=1)
        vac_mask = (1 << (-w.low)) - 1
        vc = self._mask_index[vac_mask]
        self.vacuum = int(vc * self.strides.sum())

    @property
    def n(self) -> int:
        return self.window.n

    def state_index(self, masks) -> int:
        """Index of the product state with the given per-component bitmasks."""
        return int(sum(self._mask_index[m] * s for m, s in zip(masks, self.strides)))

    def state_from_modes(self, occupied) -> int:
        """Index of the state whose occupied window modes per component are given."""
        masks = []
        for modes in occupied:
            m = 0
            for k in modes:
                m |= 1 << (k - self.window.low)
            masks.append(m)
        return self.state_index(masks)

    def occupied_modes(self, index: int) -> list[list[int]]:
        out = []
        for c in self.component_index[index]:
            m = self.component_masks[c]
            out.append([k for k in self.window.modes if (m >> (k - self.window.low)) & 1])
        return out


def build_sector(w: ModeWindow, max_level: int | None = None) -> FockSector:
    return FockSector(w, max_level)


class SparseFockOperator:
    """Monomial operator: column ``s`` maps to ``target[s]`` times ``exp(2 pi i exponent[s])``.

    ``target[s] == -1`` means the column is zero.  ``domain[s]`` is False
    where the true image of ``s`` leaves the truncated basis; such columns
    carry no information and are excluded from every comparison.
    """

    def __init__(self, sector: FockSector, target, exponent, domain, name: str = ""):
        self.sector = sector
        self.target = np.asarray(target, dtype=np.int64)
        self.exponent = np.asarray(exponent, dtype=object)
        self.domain = np.asarray(domain, dtype=bool)
        self.name = name

    @classmethod
    def identity(cls, sector: FockSector) -> "SparseFockOperator":
        d = sector.dimension
        return cls(sector, np.arange(d), _zeros(d), np.ones(d, bool), "1")

    def __matmul__(self, other: "SparseFockOperator") -> "SparseFockOperator":
        d = self.sector.dimension
        t = other.target
        domain = _product_domain(self, other)
        nz = t >= 0
        target = np.full(d, -1, dtype=np.int64)
        target[nz] = self.target[t[nz]]
        exponent = _zeros(d)
        live = target >= 0
        exponent[live] = _add_mod(other.exponent[live], self.exponent[t[live]])
        return SparseFockOperator(self.sector, target, exponent, domain, f"{self.name}{other.name}")

    def scaled(self, phase: Phase) -> "SparseFockOperator":
        exps = _add_mod(self.exponent, [phase.exponent] * len(self.exponent))
        return SparseFockOperator(self.sector, self.target, exps, self.domain, self.name)

    def apply(self, index: int) -> tuple[int, Phase] | None:
        """Image of one basis state as ``(target, coefficient)``, ``None`` for zero."""
        if not self.domain[index]:
            raise SectorError(f"state {index} is outside the validity domain of {self.name}")
        t = int(self.target[index])
        return None if t < 0 else (t, Phase(self.exponent[index]))

    def to_scipy(self) -> sp.csr_matrix:
        """Sparse matrix; integer dtype when all coefficients are +-1."""
        cols = np.nonzero(self.target >= 0)[0]
        rows = self.target[cols]
        exps = self.exponent[cols]
        if all(e == 0 or e == HALF for e in exps):
            data = np.array([1 if e == 0 else -1 for e in exps], dtype=np.int64)
        else:
            data = np.exp(2j * np.pi * np.array([float(e) for e in exps]))
        d = self.sector.dimension
        return sp.csr_matrix((data, (rows, cols)), shape=(d, d))


def _add_mod(a, b) -> np.ndarray:
    # exponent arrays hold few distinct values; memoize over pairs
    cache: dict = {}
    out = np.empty(len(a), dtype=object)
    for i, key in enumerate(zip(a, b)):
        v = cache.get(key)
        if v is None:
            v = cache[key] = (key[0] + key[1]) % 1
        out[i] = v
    return out


def _negligible(v) -> bool:
    return v == 0 if isinstance(v, Fraction) else abs(v) <= FLOAT_TOL


def _zeros(d: int) -> np.ndarray:
    out = np.empty(d, dtype=object)
    out.fill(Fraction(0))
    return out


def compare_on_domain(A: SparseFockOperator, B: SparseFockOperator, extra_domain=None):
    """Max phase distance and count of structural mismatches on the common domain."""
    dom = A.domain & B.domain
    if extra_domain is not None:
        dom &= extra_domain
    idx = np.nonzero(dom)[0]
    mismatched = int(np.sum(A.target[idx] != B.target[idx]))
    live = idx[(A.target[idx] == B.target[idx]) & (A.target[idx] >= 0)]
    worst = Fraction(0)
    for v in set((A.exponent[live] - B.exponent[live]) % 1):
        worst = max(worst, Phase(v).distance(Phase(0)))
    return worst, mismatched, len(idx)


# --- ladder operators --------------------------------------------------------


def _component_ladder(sector: FockSector, mode: int, create: bool):
    w = sector.window
    if not w.low <= mode <= w.high:
        raise SectorError(f"mode {mode} outside window [{w.low}, {w.high}]")
    bit = mode - w.low
    size = sector.component_size
    target = np.full(size, -1, dtype=np.int64)
    sign = np.zeros(size, dtype=np.int64)
    inside = np.ones(size, dtype=bool)
    for c, m in enumerate(sector.component_masks):
        occ = (m >> bit) & 1
        if occ == create:
            continue
        new = m ^ (1 << bit)
        above = bin(m >> (bit + 1)).count("1")
        j = sector._mask_index.get(new)
        if j is None:
            inside[c] = False
            continue
        target[c] = j
        sign[c] = above % 2
    return target, sign, inside


def _lift_component(sector: FockSector, comp: int, target_c, expo_c, inside_c, name) -> SparseFockOperator:
    ci = sector.component_index[:, comp]
    tc = target_c[ci]
    stride = sector.strides[comp]
    idx = np.arange(sector.dimension, dtype=np.int64)
    target = np.where(tc >= 0, idx + (tc - ci) * stride, -1)
    exponent = np.empty(sector.dimension, dtype=object)
    exponent[:] = [expo_c[c] for c in ci]
    return SparseFockOperator(sector, target, exponent, inside_c[ci], name)


def _ladder(sector: FockSector, mode: int, component: int, create: bool):
    if not 0 <= component < sector.n:
        raise SectorError(f"component {component} out of range")
    t, s, inside = _component_ladder(sector, mode, create)
    expo = [HALF if v else Fraction(0) for v in s]
    tag = "a*" if create else "a"
    return _lift_component(sector, component, t, expo, inside, f"{tag}({mode},{component})")


def creation(sector: FockSector, mode: int, component: int = 0) -> SparseFockOperator:
    return _ladder(sector, mode, component, True)


def annihilation(sector: FockSector, mode: int, component: int = 0) -> SparseFockOperator:
    return _ladder(sector, mode, component, False)


# external normalization: a*(u) a(v) + a(v) a*(u) = 2 <u, v>
CAR_SCALE = 2


@dataclass
class CarReport:
    passed: bool
    anticommutator_deviation: int
    same_type_deviation: int
    cross_component_deviation: int
    pairs_checked: int


def _restricted(M: sp.csr_matrix, domain: np.ndarray) -> sp.csr_matrix:
    return M[:, np.nonzero(domain)[0]]


def car_check(sector: FockSector, pairs) -> CarReport:
    """CAR relations for the given ``((k, j), (k2, j2))`` mode pairs.

    Same component: ``2 {a*_u, a_v} = 2 delta_uv`` and same-type
    anticommutators vanish.  Different components: commutators vanish.
    Comparisons run over columns where every product stays in the basis.
    """
    anti = same = cross = 0
    ops: dict = {}

    def get(k, j, create):
        key = (k, j, create)
        if key not in ops:
            op = _ladder(sector, k, j, create)
            ops[key] = (op, op.to_scipy())
        return ops[key]

    eye = CAR_SCALE * sp.identity(sector.dimension, dtype=np.int64, format="csr")
    for (k1, j1), (k2, j2) in pairs:
        cu, au = get(k1, j1, True), get(k1, j1, False)
        cv, av = get(k2, j2, True), get(k2, j2, False)
        for kind, ((X, Xs), (Y, Ys)) in zip(("anti", "cc", "aa"), [(cu, av), (cu, cv), (au, av)]):
            dom = _product_domain(X, Y) & _product_domain(Y, X)
            if j1 == j2:
                R = CAR_SCALE * (Xs @ Ys + Ys @ Xs)
                if kind == "anti" and k1 == k2:
                    R = R - eye
                dev = _max_abs(_restricted(R, dom))
                if kind == "anti":
                    anti = max(anti, dev)
                else:
                    same = max(same, dev)
            else:
                R = Xs @ Ys - Ys @ Xs
                cross = max(cross, _max_abs(_restricted(R, dom)))
    passed = anti == same == cross == 0
    return CarReport(passed, anti, same, cross, len(pairs))


def _product_domain(X: SparseFockOperator, Y: SparseFockOperator) -> np.ndarray:
    dom = Y.domain.copy()
    nz = Y.target >= 0
    dom[nz] &= X.domain[Y.target[nz]]
    return dom


def _max_abs(M) -> int:
    if M.nnz == 0:
        return 0
    v = np.abs(M.data).max()
    return int(v) if np.issubdtype(M.dtype, np.integer) else float(v)


# --- shift operators ---------------------------------------------------------


def _component_shift(sector: FockSector, p: int):
    w = sector.window
    full = (1 << w.width) - 1
    size = sector.component_size
    target = np.full(size, -1, dtype=np.int64)
    inside = np.zeros(size, dtype=bool)
    for c, m in enumerate(sector.component_masks):
        if p >= 0:
            if p and m >> (w.width - p):
                continue  # a particle would leave through the top
            new = ((m << p) | ((1 << p) - 1)) & full
        else:
            low_bits = (1 << -p) - 1
            if m & low_bits != low_bits:
                continue  # a hole would leave through the bottom
            new = m >> -p
        j = sector._mask_index.get(new)
        if j is None:
            continue
        target[c] = j
        inside[c] = True
    return target, inside


def _check_shift(sector: FockSector, p: GroupVector):
    if len(p) != sector.n:
        raise SectorError(f"shift of dimension {len(p)} on {sector.n} components")
    require_lattice(p)
    if any(abs(int(v)) > sector.window.margin for v in p):
        raise SectorError(f"shift {p} exceeds the safe margin {sector.window.margin}")


def shift_operator(p, sector: FockSector) -> SparseFockOperator:
    """Untwisted mode shift ``k -> k + p_j`` in component ``j``."""
    p = as_vector(p)
    _check_shift(sector, p)
    op = SparseFockOperator.identity(sector)
    for j, pj in enumerate(p):
        pj = int(pj)
        if pj == 0:
            continue
        t, inside = _component_shift(sector, pj)
        expo = [Fraction(0)] * sector.component_size
        op = _lift_component(sector, j, t, expo, inside, f"S{j}") @ op
    op.name = f"S({','.join(str(int(v)) for v in p)})"
    return op


@dataclass(frozen=True)
class TwistedPoint:
    x: GroupVector
    omega: TwoForm

    def __init__(self, x, omega: TwoForm):
        object.__setattr__(self, "x", as_vector(x))
        object.__setattr__(self, "omega", omega)

    def section_exponent(self):
        """Exponent of the line-bundle section at ``x``.

        Normalized to 0 on ``[0, 1)^n``; ``psi(x0 + z) = exp(2 pi i w(x0, z))``.
        """
        x = self.x
        z = GroupVector([v // 1 for v in x])
        x0 = x - z
        return two_form_eval(self.omega, x0, z)


def twisted_creation(sector: FockSector, mode: int, component: int, tp: TwistedPoint) -> SparseFockOperator:
    return creation(sector, mode, component).scaled(Phase(tp.section_exponent()))


def twisted_annihilation(sector: FockSector, mode: int, component: int, tp: TwistedPoint) -> SparseFockOperator:
    return annihilation(sector, mode, component).scaled(Phase(-tp.section_exponent()))


def _uniform_ratio(A: SparseFockOperator, B: SparseFockOperator):
    """The single phase ``A/B`` on their common live columns, with spread."""
    dom = A.domain & B.domain & (A.target >= 0) & (A.target == B.target)
    idx = np.nonzero(dom)[0]
    if len(idx) == 0:
        raise SectorError("operators share no live columns")
    diffs = set((A.exponent[idx] - B.exponent[idx]) % 1)
    ref = Phase(min(diffs))
    spread = max(Phase(v).distance(ref) for v in diffs)
    return ref, spread, len(idx)


def twisted_equivariance_check(sector: FockSector, mode: int, component: int, tp: TwistedPoint, z) -> Phase:
    """Discrepancy ``a*(u, x+z) / (exp(2 pi i w(x, z)) a*(u, x))``; trivial when equivariant."""
    z = as_vector(z)
    require_lattice(z)
    shifted = TwistedPoint(tp.x + z, tp.omega)
    lhs = twisted_creation(sector, mode, component, shifted)
    rhs = twisted_creation(sector, mode, component, tp).scaled(Phase(two_form_eval(tp.omega, tp.x, z)))
    ratio, spread, _ = _uniform_ratio(lhs, rhs)
    if not _negligible(spread):
        raise SectorError("twisted operators are not proportional")
    return ratio


def twisted_shift(p, tp: TwistedPoint, sector: FockSector) -> SparseFockOperator:
    """``g(p)`` at base point ``x``.

    Conjugation sends ``a*(u) -> lambda a*(p.u)`` and ``a(u) -> conj(lambda) a(p.u)``
    with ``lambda = exp(2 pi i w(x, p))``, and the vacuum goes to the shifted
    sea with coefficient 1.  A state reached from the vacuum by a word of
    ladder operators with net particle number ``N`` therefore picks up
    ``lambda**N`` on top of the plain mode shift.
    """
    p = as_vector(p)
    S = shift_operator(p, sector)
    lam = two_form_eval(tp.omega, tp.x, p)
    exps = np.empty(sector.dimension, dtype=object)
    by_charge = {N: (lam * int(N)) % 1 for N in set(sector.particle_number.tolist())}
    exps[:] = [by_charge[N] for N in sector.particle_number.tolist()]
    return SparseFockOperator(sector, S.target, _add_mod(S.exponent, exps), S.domain, f"g({p})")


@dataclass
class ShiftConjugationReport:
    passed: bool
    max_deviation: Fraction | float
    mismatched: int
    states_checked: int


def conjugation_check(p, mode: int, component: int, tp: TwistedPoint, sector: FockSector, create: bool = True):
    """``g(p) a#(e_k) = lambda**(+-1) a#(e_{k+p_j}) g(p)`` on the common domain."""
    p = as_vector(p)
    g = twisted_shift(p, tp, sector)
    lam = two_form_eval(tp.omega, tp.x, p)
    ladder = creation if create else annihilation
    shifted_mode = mode + int(p[component])
    lhs = g @ ladder(sector, mode, component)
    rhs = (ladder(sector, shifted_mode, component) @ g).scaled(Phase(lam if create else -lam))
    worst, mism, count = compare_on_domain(lhs, rhs)
    return ShiftConjugationReport(_negligible(worst) and mism == 0 and count > 0, worst, mism, count)


@dataclass
class ComposeReport:
    passed: bool
    measured: Phase | None
    expected: Phase
    max_deviation: Fraction | float
    states_checked: int
    vacuum_checked: bool


def compose_check(p, q, tp: TwistedPoint, sector: FockSector) -> ComposeReport:
    """Measure ``C`` in ``g(p) g(q) = C g(p+q)`` and compare with the cochain formula."""
    p, q = as_vector(p), as_vector(q)
    m = sector.window.margin
    if max(abs(int(v)) for v in p) + max(abs(int(v)) for v in q) > m:
        raise SectorError(f"|p|+|q| exceeds the safe margin {m}")
    lhs = twisted_shift(p, tp, sector) @ twisted_shift(q, tp, sector)
    rhs = twisted_shift(p + q, tp, sector)
    measured, spread, count = _uniform_ratio(lhs, rhs)
    dom = lhs.domain & rhs.domain
    structural = int(np.sum(lhs.target[dom] != rhs.target[dom]))
    expected = shift_2cocycle(tp.omega)(p, q, base=tp.x)
    ok = _negligible(spread) and structural == 0 and measured == expected
    return ComposeReport(ok, measured, expected, spread, count, bool(dom[sector.vacuum]))


@dataclass
class AssociativityReport:
    passed: bool
    left: Phase
    right: Phase


def associativity_check(p, q, r, tp: TwistedPoint, sector: FockSector) -> AssociativityReport:
    """Total phase of ``g(p) g(q) g(r)`` against ``g(p+q+r)`` for both bracketings."""
    p, q, r = as_vector(p), as_vector(q), as_vector(r)
    gp, gq, gr = (twisted_shift(v, tp, sector) for v in (p, q, r))
    total = twisted_shift(p + q + r, tp, sector)
    left, s1, _ = _uniform_ratio((gp @ gq) @ gr, total)
    right, s2, _ = _uniform_ratio(gp @ (gq @ gr), total)
    C = shift_2cocycle(tp.omega)
    x = tp.x
    predicted = C(p, q, base=x) * C(p + q, r, base=x)
    ok = _negligible(s1) and _negligible(s2) and left == right == predicted == C(q, r, base=x) * C(p, q + r, base=x)
    return AssociativityReport(ok, left, right)
