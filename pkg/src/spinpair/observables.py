"""Spin operators, two-spin states and expectation values.

Pure states are vectors and mixed states are density matrices. Both carry a
basis tag, and the standard basis is the working one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .coupling import (
    Basis,
    PairPropagator,
    SpinPair,
    basis_states,
    block_slices,
    cg_matrix,
    coupled_matrix,
    standard_index,
)
from .su2 import HalfInt, SpinDomainError, check_magnitude


@dataclass(frozen=True)
class SpinOperators:
    j: HalfInt
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    @property
    def plus(self) -> np.ndarray:
        return self.x + 1j * self.y

    def casimir(self) -> np.ndarray:
        return self.x @ self.x + self.y @ self.y + self.z @ self.z


@lru_cache(maxsize=None)
def _ops(jt: int) -> SpinOperators:
    j = jt / 2
    m = j - np.arange(jt + 1)
    # <m+1|j+|m> = sqrt(j(j+1) - m(m+1)); row index of m+1 is one above m
    jp = np.diag(np.sqrt(j * (j + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    jm = jp.conj().T
    ops = SpinOperators(HalfInt(jt), (jp + jm) / 2, (jp - jm) / 2j, np.diag(m).astype(complex))
    for a in (ops.x, ops.y, ops.z):
        a.setflags(write=False)
    return ops


def spin_operators(j) -> SpinOperators:
    return _ops(check_magnitude(j).twice)


def pair_operators(pair: SpinPair) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """``([j1x, j1y, j1z], [j2x, j2y, j2z])`` on the standard product space."""
    s1, s2 = spin_operators(pair.j1), spin_operators(pair.j2)
    i1, i2 = np.eye(pair.dims[0]), np.eye(pair.dims[1])
    return (
        [np.kron(a, i2) for a in (s1.x, s1.y, s1.z)],
        [np.kron(i1, a) for a in (s2.x, s2.y, s2.z)],
    )


def total_spin_squared(pair: SpinPair) -> np.ndarray:
    j1, j2 = pair_operators(pair)
    return sum((a + b) @ (a + b) for a, b in zip(j1, j2))


def named_operator(pair: SpinPair, name: str) -> np.ndarray:
    """Standard-basis matrix of ``Jz``, ``j1z``, ``j2z`` or ``J2``."""
    j1, j2 = pair_operators(pair)
    table = {"Jz": lambda: j1[2] + j2[2], "j1z": lambda: j1[2], "j2z": lambda: j2[2],
             "J2": lambda: total_spin_squared(pair)}
    try:
        return table[name]()
    except KeyError:
        raise SpinDomainError(f"unknown operator {name!r}; known: {', '.join(table)}") from None


@dataclass(frozen=True)
class PairState:
    pair: SpinPair
    data: np.ndarray
    basis: Basis = Basis.STANDARD

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.shape not in ((self.pair.dim,), (self.pair.dim, self.pair.dim)):
            raise SpinDomainError(f"state shape {data.shape} does not fit dimension {self.pair.dim}")
        object.__setattr__(self, "data", data)

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    def density(self) -> np.ndarray:
        return np.outer(self.data, self.data.conj()) if self.is_pure else self.data

    def to(self, basis: Basis) -> "PairState":
        if basis is self.basis:
            return self
        g = cg_matrix(self.pair)
        m = g if basis is Basis.STANDARD else g.T
        data = m @ self.data if self.is_pure else m @ self.data @ m.T
        return PairState(self.pair, data, basis)

    def evolve(self, u: PairPropagator) -> "PairState":
        u = u.to(self.basis)
        data = u.matrix @ self.data if self.is_pure else u.matrix @ self.data @ u.matrix.conj().T
        return PairState(self.pair, data, self.basis)


def product_state(pair: SpinPair, m1, m2) -> PairState:
    v = np.zeros(pair.dim, dtype=complex)
    v[standard_index(pair, m1, m2)] = 1.0
    return PairState(pair, v)


def stretched_state(pair: SpinPair) -> PairState:
    """``|j1, j2>``."""
    return product_state(pair, pair.j1, pair.j2)


def flipped_state(pair: SpinPair) -> PairState:
    """``|-j1, -j2>``."""
    return product_state(pair, -pair.j1, -pair.j2)


def coupled_state(pair: SpinPair, j, m) -> PairState:
    """Total-spin eigenstate ``|j, m>``, returned in the standard basis."""
    g = cg_matrix(pair)
    labels = basis_states(pair, Basis.COUPLED)
    j, m = HalfInt.of(j), HalfInt.of(m)
    try:
        col = labels.index((j, m))
    except ValueError:
        raise SpinDomainError(f"|{j}, {m}> is not a coupled state of ({pair.j1}, {pair.j2})") from None
    return PairState(pair, g[:, col].astype(complex))


def maximally_mixed(pair: SpinPair) -> PairState:
    return PairState(pair, np.eye(pair.dim, dtype=complex) / pair.dim)


def transition_probability(u: PairPropagator, initial: PairState, final: PairState) -> float:
    """``|<final| U |initial>|^2``."""
    if not (initial.is_pure and final.is_pure):
        raise SpinDomainError("transition probabilities need pure states")
    if initial.basis is not final.basis:
        raise SpinDomainError(f"basis mismatch: {initial.basis.value} vs {final.basis.value}")
    u = u.to(initial.basis)
    return float(abs(np.vdot(final.data, u.matrix @ initial.data)) ** 2)


def expectation(state: PairState, op) -> float:
    """``Tr(rho op)`` for a named operator or a Hermitian standard-basis matrix."""
    if isinstance(op, str):
        op = named_operator(state.pair, op)
    else:
        op = np.asarray(op)
        if not np.allclose(op, op.conj().T, atol=1e-12):
            raise SpinDomainError("expectation values need a Hermitian operator")
    s = state.to(Basis.STANDARD)
    if s.is_pure:
        val = np.vdot(s.data, op @ s.data)
    else:
        val = np.trace(s.data @ op)
    return float(val.real)


def reduced_density(state: PairState, which: int) -> np.ndarray:
    """Partial trace over the other spin (``which`` is 1 or 2)."""
    if which not in (1, 2):
        raise SpinDomainError(f"which must be 1 or 2, got {which}")
    rho = state.to(Basis.STANDARD).density()
    d1, d2 = state.pair.dims
    r = rho.reshape(d1, d2, d1, d2)
    return np.einsum("ijkj->ik", r) if which == 1 else np.einsum("ijil->jl", r)


def inter_block_norm(state: PairState) -> float:
    """Largest modulus among coupled-basis entries linking different blocks."""
    rho = state.to(Basis.COUPLED).density()
    mask = np.ones(rho.shape, dtype=bool)
    for sl in block_slices(state.pair):
        mask[sl, sl] = False
    return float(np.abs(rho[mask]).max(initial=0.0))


def is_ife_state(state: PairState, tol: float = 1e-10) -> bool:
    """True when the state is block diagonal in the coupled basis.

    Such states evolve, spin by spin, exactly as without the exchange term.
    """
    return inter_block_norm(state) < tol


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(rho - sigma)).sum())


def evolve_series(pair: SpinPair, elapsed, a, b, initial: PairState) -> np.ndarray:
    """Standard-basis states (or densities) from amplitude arrays ``a, b``.

    ``elapsed`` is the time since the start of the evolution at each point; it
    sets the block phases.

    Returns shape ``(n, D)`` for a pure initial state and ``(n, D, D)`` for a
    mixed one.
    """
    elapsed = np.asarray(elapsed, dtype=float)
    g = cg_matrix(pair)
    u = np.einsum("ij,njk,lk->nil", g, coupled_matrix(pair, elapsed[:, None, None], a, b), g)
    s = initial.to(Basis.STANDARD)
    if s.is_pure:
        return u @ s.data
    return u @ s.data @ np.conj(np.swapaxes(u, -1, -2))


def measure(states: np.ndarray, op: np.ndarray) -> np.ndarray:
    """``<op>`` for a stack of pure states ``(n, D)`` or densities ``(n, D, D)``."""
    if states.ndim == 2:
        return np.einsum("ni,ij,nj->n", states.conj(), op, states).real
    return np.einsum("nij,ji->n", states, op).real
