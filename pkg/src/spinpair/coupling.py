"""Two exchange-coupled spins: Clebsch-Gordan algebra and the block-assembled
two-spin propagator.

Orderings used everywhere:

* standard basis: ``|m1, m2>`` with ``m1`` descending (outer) and ``m2``
  descending (inner);
* coupled basis: blocks of total spin ``j`` in descending order, ``m``
  descending inside each block.

With these orderings the coupled-to-standard matrix of two spin-1/2's is
``T`` (columns ``|++>, |Psi+>, |-->, |Psi->``), and the (1, 1/2) and (1, 1)
matrices come out in the same column order as the usual printed tables.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import block_diag

from .su2 import (
    HalfInt,
    PropagatorBlock,
    SpinDomainError,
    SU2Propagator,
    check_magnitude,
    check_projection,
    lift,
    projections,
)


class Basis(enum.Enum):
    STANDARD = "standard"
    COUPLED = "coupled"


@dataclass(frozen=True)
class SpinPair:
    """Spins ``j1``, ``j2`` with isotropic exchange ``-lam * j1.j2`` (hbar = 1)."""

    j1: HalfInt
    j2: HalfInt
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "j1", check_magnitude(self.j1))
        object.__setattr__(self, "j2", check_magnitude(self.j2))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def dims(self) -> tuple[int, int]:
        return self.j1.twice + 1, self.j2.twice + 1

    @property
    def dim(self) -> int:
        d1, d2 = self.dims
        return d1 * d2

    @property
    def blocks(self) -> list[HalfInt]:
        """Total-spin labels, descending."""
        hi = self.j1.twice + self.j2.twice
        lo = abs(self.j1.twice - self.j2.twice)
        return [HalfInt(t) for t in range(hi, lo - 1, -2)]

    def with_lambda(self, lam: float) -> "SpinPair":
        return SpinPair(self.j1, self.j2, lam)

    def key(self) -> tuple[int, int]:
        return self.j1.twice, self.j2.twice


def basis_states(pair: SpinPair, basis: Basis) -> list[tuple[HalfInt, HalfInt]]:
    """Ordered state labels: ``(m1, m2)`` for STANDARD, ``(j, m)`` for COUPLED."""
    if basis is Basis.STANDARD:
        return [(m1, m2) for m1 in projections(pair.j1) for m2 in projections(pair.j2)]
    return [(j, m) for j in pair.blocks for m in projections(j)]


def standard_index(pair: SpinPair, m1, m2) -> int:
    m1, m2 = check_projection(pair.j1, m1), check_projection(pair.j2, m2)
    return ((pair.j1.twice - m1.twice) // 2) * (pair.j2.twice + 1) + (pair.j2.twice - m2.twice) // 2


def block_slices(pair: SpinPair) -> list[slice]:
    """Index range of each total-spin block in the coupled basis."""
    out, start = [], 0
    for j in pair.blocks:
        out.append(slice(start, start + j.twice + 1))
        start += j.twice + 1
    return out


def cg_coefficient(j1, m1, j2, m2, J, M) -> float:
    """Condon-Shortley Clebsch-Gordan coefficient ``<j1 m1; j2 m2 | J M>``.

    Racah's closed form, summed in exact rational arithmetic; zero when the
    selection rules fail.
    """
    j1, j2, J = check_magnitude(j1), check_magnitude(j2), check_magnitude(J)
    m1, m2, M = check_projection(j1, m1), check_projection(j2, m2), check_projection(J, M)
    if M.twice != m1.twice + m2.twice:
        return 0.0
    if not abs(j1.twice - j2.twice) <= J.twice <= j1.twice + j2.twice:
        return 0.0
    if (j1.twice + j2.twice + J.twice) % 2:
        return 0.0
    return _cg(j1.twice, m1.twice, j2.twice, m2.twice, J.twice, M.twice)


_cg_cache: dict[tuple[int, ...], float] = {}


def _cg(a, al, b, be, c, ga) -> float:
    key = (a, al, b, be, c, ga)
    if key in _cg_cache:
        return _cg_cache[key]
    f = math.factorial
    # all arguments below are integers because of the parity checks above
    h = lambda x: x // 2  # noqa: E731
    pre = Fraction(
        (c + 1) * f(h(c + a - b)) * f(h(c - a + b)) * f(h(a + b - c)),
        f(h(a + b + c) + 1),
    ) * (f(h(c + ga)) * f(h(c - ga)) * f(h(a - al)) * f(h(a + al)) * f(h(b - be)) * f(h(b + be)))
    s = Fraction(0)
    for k in range(0, h(a + b - c) + 1):
        args = (h(a + b - c) - k, h(a - al) - k, h(b + be) - k, h(c - b + al) + k, h(c - a - be) + k)
        if min(args) < 0:
            continue
        den = f(k)
        for x in args:
            den *= f(x)
        s += Fraction((-1) ** k, den)
    sq = pre * s * s
    val = math.sqrt(sq.numerator) / math.sqrt(sq.denominator)
    val = math.copysign(val, s) if s else 0.0
    _cg_cache[key] = val
    return val


_matrix_cache: dict[tuple[int, int], np.ndarray] = {}
_matrix_lock = threading.Lock()


def cg_matrix(pair: SpinPair) -> np.ndarray:
    """Real orthogonal matrix taking coupled-basis coordinates to standard ones.

    ``G[std, coupled] = <m1 m2 | j m>``. Cached per ``(j1, j2)``; the returned
    array is read-only.
    """
    key = pair.key()
    with _matrix_lock:
        cached = _matrix_cache.get(key)
        if cached is None:
            std = basis_states(pair, Basis.STANDARD)
            cpl = basis_states(pair, Basis.COUPLED)
            g = np.zeros((pair.dim, pair.dim))
            for col, (j, m) in enumerate(cpl):
                for row, (m1, m2) in enumerate(std):
                    if m1.twice + m2.twice == m.twice:
                        g[row, col] = cg_coefficient(pair.j1, m1, pair.j2, m2, j, m)
            g.setflags(write=False)
            _matrix_cache[key] = cached = g
    return cached


def k_prime(pair: SpinPair, j) -> float:
    """Constant energy of block ``j``: ``(lam/2)[j1(j1+1) + j2(j2+1) - j(j+1)]``."""
    j = check_magnitude(j)
    if j not in pair.blocks:
        raise SpinDomainError(f"j={j} is not a block of ({pair.j1}, {pair.j2})")
    c = lambda s: s.value * (s.value + 1)  # noqa: E731
    return 0.5 * pair.lam * (c(pair.j1) + c(pair.j2) - c(j))


def to_standard(pair: SpinPair, op_coupled: np.ndarray) -> np.ndarray:
    g = cg_matrix(pair)
    return g @ op_coupled @ g.T


def to_coupled(pair: SpinPair, op_standard: np.ndarray) -> np.ndarray:
    g = cg_matrix(pair)
    return g.T @ op_standard @ g


@dataclass(frozen=True)
class PairPropagator:
    """Two-spin evolution operator over ``[0, t]`` in a given basis."""

    pair: SpinPair
    t: float
    blocks: tuple[PropagatorBlock, ...]
    basis: Basis
    matrix: np.ndarray = field(repr=False)

    def to(self, basis: Basis) -> "PairPropagator":
        if basis is self.basis:
            return self
        conv = to_standard if basis is Basis.STANDARD else to_coupled
        return PairPropagator(self.pair, self.t, self.blocks, basis, conv(self.pair, self.matrix))


def coupled_matrix(pair: SpinPair, t: float, a, b) -> np.ndarray:
    """Coupled-basis propagator(s) for amplitude arrays ``a, b`` (vectorised)."""
    a = np.asarray(a, dtype=complex)
    out = np.zeros(a.shape + (pair.dim, pair.dim), dtype=complex)
    for j, sl in zip(pair.blocks, block_slices(pair)):
        out[..., sl, sl] = np.exp(-1j * k_prime(pair, j) * t) * lift(j, a, b)
    return out


def assemble_pair_propagator(
    pair: SpinPair, t: float, u: SU2Propagator, basis: Basis = Basis.STANDARD
) -> PairPropagator:
    """Direct sum of lifted blocks, each carrying its phase ``exp(-i K'(j) t)``.

    ``u`` must be the spin-1/2 propagator of the common field over ``[0, t]``.
    """
    blocks = tuple(
        PropagatorBlock(j, np.exp(-1j * k_prime(pair, j) * t) * lift(j, u.a, u.b)) for j in pair.blocks
    )
    mat = block_diag(*(blk.matrix for blk in blocks))
    if basis is Basis.STANDARD:
        mat = to_standard(pair, mat)
    return PairPropagator(pair, float(t), blocks, basis, mat)
