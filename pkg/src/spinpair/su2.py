"""SU(2) building blocks: half-integer spins, spin-1/2 propagators and their
lift to the (2j+1)-dimensional representation.

A spin-1/2 evolution operator is fixed by two complex amplitudes ``(a, b)``::

    U = [[ a,  b ],
         [-b*, a*]],     |a|^2 + |b|^2 = 1

and the evolution operator of a spin ``j`` in the same field is a polynomial
in ``a, a*, b, b*`` (a finite sum over ``mu``). Matrices use the descending
projection order ``m = j, j-1, ..., -j`` throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np


class SpinDomainError(ValueError):
    """Invalid spin quantum numbers or out-of-range arguments."""


@dataclass(frozen=True, order=True)
class HalfInt:
    """An exact half-integer, stored as twice its value."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)) or isinstance(self.twice, bool):
            raise SpinDomainError(f"twice-value must be an integer, got {self.twice!r}")
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def of(cls, value) -> "HalfInt":
        """Build from ``HalfInt``, int, float, Fraction or a string like ``"3/2"``."""
        if isinstance(value, HalfInt):
            return value
        if isinstance(value, str):
            try:
                value = Fraction(value.strip())
            except ValueError as exc:
                raise SpinDomainError(f"not a half-integer: {value!r}") from exc
        frac = Fraction(value).limit_denominator(4) if isinstance(value, float) else Fraction(value)
        twice = 2 * frac
        if twice.denominator != 1 or (isinstance(value, float) and float(frac) != value):
            raise SpinDomainError(f"not a half-integer: {value!r}")
        return cls(int(twice))

    @property
    def value(self) -> float:
        return self.twice / 2

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.value

    def __add__(self, other):
        return HalfInt(self.twice + HalfInt.of(other).twice)

    def __sub__(self, other):
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __neg__(self):
        return HalfInt(-self.twice)

    def __str__(self) -> str:
        return str(self.twice // 2) if self.twice % 2 == 0 else f"{self.twice}/2"

    def __repr__(self) -> str:
        return f"HalfInt({self})"


def check_magnitude(j) -> HalfInt:
    j = HalfInt.of(j)
    if j.twice < 0:
        raise SpinDomainError(f"spin magnitude must be >= 0, got {j}")
    return j


def check_projection(j, m) -> HalfInt:
    j, m = check_magnitude(j), HalfInt.of(m)
    if abs(m.twice) > j.twice or (j.twice - m.twice) % 2:
        raise SpinDomainError(f"m={m} is not a valid projection for j={j}")
    return m


def projections(j) -> list[HalfInt]:
    """Projections of ``j`` in descending order."""
    j = check_magnitude(j)
    return [HalfInt(j.twice - 2 * k) for k in range(j.twice + 1)]


@dataclass(frozen=True)
class SU2Propagator:
    """Spin-1/2 evolution operator ``[[a, b], [-b*, a*]]``."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))

    @classmethod
    def identity(cls) -> "SU2Propagator":
        return cls(1.0, 0.0)

    @classmethod
    def from_matrix(cls, m) -> "SU2Propagator":
        """Read ``(a, b)`` off the first row of a 2x2 SU(2) matrix."""
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise SpinDomainError(f"expected a 2x2 matrix, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1]).normalized()

    @classmethod
    def from_column(cls, psi) -> "SU2Propagator":
        """From the image of ``|+>``, i.e. the first column ``(a, -b*)``."""
        return cls(psi[0], -np.conj(psi[1])).normalized()

    @property
    def norm_sq(self) -> float:
        return abs(self.a) ** 2 + abs(self.b) ** 2

    def normalized(self) -> "SU2Propagator":
        n = math.sqrt(self.norm_sq)
        if n == 0.0:
            raise SpinDomainError("cannot normalize the zero propagator")
        return SU2Propagator(self.a / n, self.b / n)

    @property
    def matrix(self) -> np.ndarray:
        a, b = self.a, self.b
        return np.array([[a, b], [-b.conjugate(), a.conjugate()]])

    def compose(self, first: "SU2Propagator") -> "SU2Propagator":
        """``self @ first``: apply ``first``, then ``self``."""
        a2, b2, a1, b1 = self.a, self.b, first.a, first.b
        return SU2Propagator(a2 * a1 - b2 * b1.conjugate(), a2 * b1 + b2 * a1.conjugate())

    def __matmul__(self, other: "SU2Propagator") -> "SU2Propagator":
        return self.compose(other)


@dataclass(frozen=True)
class PropagatorBlock:
    """The (2j+1)x(2j+1) evolution block of spin ``j``; rows are final ``m``."""

    j: HalfInt
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.j.twice + 1

    def entry(self, m, m_prime) -> complex:
        m, mp = check_projection(self.j, m), check_projection(self.j, m_prime)
        return complex(self.matrix[(self.j.twice - m.twice) // 2, (self.j.twice - mp.twice) // 2])


def mu_range(j, m, m_prime) -> range:
    """Integer ``mu`` with ``max(0, m'-m) <= mu <= min(j+m', j-m)``."""
    jt, mt, mpt = j.twice, m.twice, m_prime.twice
    return range(max(0, (mpt - mt) // 2), min((jt + mpt) // 2, (jt - mt) // 2) + 1)


def wigner_coeff(j, m, m_prime, mu: int) -> float:
    """Coefficient of ``a^(j+m'-mu) a*^(j-m-mu) b^(m-m'+mu) b*^mu`` in ``U^(j)_{m,m'}``.

    Evaluated with exact integer factorials; only the final square root is
    taken in floating point.
    """
    j = check_magnitude(j)
    m, mp = check_projection(j, m), check_projection(j, m_prime)
    if mu not in mu_range(j, m, mp):
        raise SpinDomainError(f"mu={mu} outside the allowed range for j={j}, m={m}, m'={mp}")
    return _coeff(j.twice, m.twice, mp.twice, mu)


@lru_cache(maxsize=None)
def _coeff(jt: int, mt: int, mpt: int, mu: int) -> float:
    f = math.factorial
    jpm, jmm = (jt + mt) // 2, (jt - mt) // 2
    jpmp, jmmp = (jt + mpt) // 2, (jt - mpt) // 2
    num = f(jpm) * f(jmm) * f(jpmp) * f(jmmp)
    den = f(mu) * f(jpmp - mu) * f(jmm - mu) * f((mt - mpt) // 2 + mu)
    # sqrt(num)/den with num a perfect square when possible keeps small cases exact
    root = math.isqrt(num)
    value = root / den if root * root == num else math.sqrt(num) / den
    return -value if mu % 2 else value


@lru_cache(maxsize=None)
def _monomials(jt: int) -> tuple[tuple[int, int, float, int, int, int, int], ...]:
    """Flattened sum terms ``(row, col, coeff, p_a, p_ac, p_b, p_bc)`` for spin ``jt/2``."""
    j = HalfInt(jt)
    terms = []
    for row, m in enumerate(projections(j)):
        for col, mp in enumerate(projections(j)):
            for mu in mu_range(j, m, mp):
                terms.append((
                    row, col, _coeff(jt, m.twice, mp.twice, mu),
                    (jt + mp.twice) // 2 - mu,
                    (jt - m.twice) // 2 - mu,
                    (m.twice - mp.twice) // 2 + mu,
                    mu,
                ))
    return tuple(terms)


def lift(j, a, b) -> np.ndarray:
    """Vectorised lift: arrays ``a, b`` of shape ``S`` give blocks of shape ``S + (d, d)``."""
    j = check_magnitude(j)
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    a, b = np.broadcast_arrays(a, b)
    d = j.twice + 1
    out = np.zeros(a.shape + (d, d), dtype=complex)
    # powers 0..2j of each amplitude; 0**0 == 1 by construction
    pa = np.stack([a ** k for k in range(d)])
    pac = np.conj(pa)
    pb = np.stack([b ** k for k in range(d)])
    pbc = np.conj(pb)
    for row, col, c, ka, kac, kb, kbc in _monomials(j.twice):
        out[..., row, col] += c * pa[ka] * pac[kac] * pb[kb] * pbc[kbc]
    return out


def propagator_block(j, u: SU2Propagator, phase: float = 0.0) -> PropagatorBlock:
    """Spin-``j`` evolution block built from ``u``, times ``exp(-i*phase)``.

    ``phase`` is the accumulated constant-energy angle of the block; the caller
    supplies it so this function stays independent of the coupling.
    """
    j = check_magnitude(j)
    mat = lift(j, u.a, u.b)
    if phase:
        mat = mat * np.exp(-1j * phase)
    return PropagatorBlock(j, mat)
