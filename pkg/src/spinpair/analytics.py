"""Closed-form results: joint inversion, Landau-Zener probabilities with and
without fast transverse noise, the noise-regime classification of ``Gamma``,
and the spin-projection expectations for the three worked pairs.

Notation: ``p = exp(-2 pi Gamma)`` is the single-spin LZ survival probability
and ``theta`` the dimensionless noise strength.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .su2 import SpinDomainError, SU2Propagator, check_magnitude


@dataclass(frozen=True)
class LZParams:
    gamma: float
    theta: float = 0.0

    def __post_init__(self):
        if not (self.gamma >= 0 and self.theta >= 0):
            raise SpinDomainError(f"need gamma >= 0 and theta >= 0, got ({self.gamma}, {self.theta})")


class Initial(enum.Enum):
    PLUS_PLUS = "++"
    MINUS_MINUS = "--"
    PSI_PLUS = "psi+"


@dataclass(frozen=True)
class TripletPopulations:
    """Asymptotic occupations of ``|++>``, ``|Psi+>`` and ``|-->``."""

    p_pp: float
    p_psi_plus: float
    p_mm: float

    @property
    def p_pm(self) -> float:
        return self.p_psi_plus / 2

    @property
    def p_mp(self) -> float:
        return self.p_psi_plus / 2

    def as_tuple(self) -> tuple[float, float, float]:
        return self.p_pp, self.p_psi_plus, self.p_mm


class Regime(enum.Enum):
    NOISE_FAVORS = "NoiseFavors"
    NON_MONOTONE = "NonMonotone"
    NOISE_HINDERS = "NoiseHinders"


def joint_inversion_probability(j1, j2, b) -> float:
    """``|b|^(4 (j1 + j2))``: probability of ``|j1, j2> -> |-j1, -j2>``."""
    j1, j2 = check_magnitude(j1), check_magnitude(j2)
    mod = abs(complex(b))
    if mod > 1 + 1e-12:
        raise SpinDomainError(f"|b| = {mod} exceeds 1")
    return min(mod, 1.0) ** (2 * (j1.twice + j2.twice))


def _survival(gamma):
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0):
        raise SpinDomainError("gamma must be >= 0")
    return np.exp(-2 * np.pi * gamma)


def lz_probability(gamma):
    """Single spin-1/2 transition probability ``1 - exp(-2 pi Gamma)``."""
    return 1.0 - _survival(gamma)


def joint_lz_probability(j1, j2, gamma):
    j1, j2 = check_magnitude(j1), check_magnitude(j2)
    return lz_probability(gamma) ** (j1.twice + j2.twice)


def _populations_pp(gamma, theta):
    p = _survival(gamma)
    theta = np.asarray(theta, dtype=float)
    e1, e3 = np.exp(-theta / 2), np.exp(-1.5 * theta)
    x = 1 - 4 * p + 3 * p * p
    y = 3 * p * p - 2 * p
    s, d = 1.5 * e1 + 0.5 * e3, 1.5 * e1 - 0.5 * e3
    p_mm = (1 + s * x - d * y) / 3
    p_psi = (1 - e3 * x - e3 * y) / 3
    p_pp = (1 - d * x + s * y) / 3
    return p_pp, p_psi, p_mm


def _populations_psi(gamma, theta):
    p = _survival(gamma)
    e3 = np.exp(-1.5 * np.asarray(theta, dtype=float))
    z = 6 * p - 6 * p * p - 1
    side = (1 + e3 * z) / 3
    return side, (1 - 2 * e3 * z) / 3, side


def noisy_lz_populations(params: LZParams, initial: Initial = Initial.PLUS_PLUS) -> TripletPopulations:
    """Asymptotic triplet populations after a sweep under fast transverse noise."""
    initial = Initial(initial)
    if initial is Initial.PSI_PLUS:
        vals = _populations_psi(params.gamma, params.theta)
    else:
        vals = _populations_pp(params.gamma, params.theta)
        if initial is Initial.MINUS_MINUS:
            # reversing both spins swaps the roles of |++> and |-->
            vals = vals[::-1]
    return TripletPopulations(*(float(v) for v in vals))


def populations_grid(gamma, theta, initial: Initial = Initial.PLUS_PLUS):
    """Vectorised populations ``(p_pp, p_psi_plus, p_mm)`` over broadcast arrays."""
    initial = Initial(initial)
    if np.any(np.asarray(theta) < 0):
        raise SpinDomainError("theta must be >= 0")
    if initial is Initial.PSI_PLUS:
        return _populations_psi(gamma, theta)
    vals = _populations_pp(gamma, theta)
    return vals[::-1] if initial is Initial.MINUS_MINUS else vals


def asymptotic_jz(params: LZParams) -> float:
    """``<Jz(inf)> = exp(-theta/2) (2 exp(-2 pi Gamma) - 1)`` starting from ``|++>``."""
    return float(math.exp(-params.theta / 2) * (2 * _survival(params.gamma) - 1))


# d P_mm / d theta at theta = 0 is -(1 - p)(1 - 3p)/2 and the theta -> inf limit is 1/3;
# the two thresholds are where each of these changes sign relative to P_mm(0).
GAMMA_LOW_EXPR = "ln((3 + sqrt(3)) / 2) / (2 pi)"
GAMMA_HIGH_EXPR = "ln(3) / (2 pi)"
GAMMA_LOW = math.log((3 + math.sqrt(3)) / 2) / (2 * math.pi)
GAMMA_HIGH = math.log(3) / (2 * math.pi)


def gamma_regime(gamma: float) -> Regime:
    if gamma < 0:
        raise SpinDomainError("gamma must be >= 0")
    if gamma <= GAMMA_LOW:
        return Regime.NOISE_FAVORS
    if gamma >= GAMMA_HIGH:
        return Regime.NOISE_HINDERS
    return Regime.NON_MONOTONE


_WORKED = {(1, 1): "half-half", (2, 1): "one-half", (2, 2): "one-one"}


def _worked_case(pair) -> str:
    j1, j2 = (check_magnitude(x) for x in pair)
    try:
        return _WORKED[(j1.twice, j2.twice)]
    except KeyError:
        raise SpinDomainError(
            f"closed form only for (1/2,1/2), (1,1/2), (1,1); got ({j1}, {j2})"
        ) from None


def j1z_expectation(pair, u: SU2Propagator, lam: float, t: float) -> float:
    """``<j1z(t)>`` from the initial product state ``|j1, j2 - 1>``."""
    case = _worked_case(pair)
    pa, pb = abs(u.a) ** 2, abs(u.b) ** 2
    d = pa - pb
    if case == "half-half":
        return 0.5 * d * math.cos(lam * t)
    if case == "one-half":
        return d * (5 + 4 * math.cos(1.5 * lam * t)) / 9
    # |1, 0> splits evenly over the j=2 and j=1 blocks; inside each block j1z
    # acts as Jz/2 and the cross-block term gives the oscillation
    return 0.5 * d * (1 + math.cos(2 * lam * t))


def jz_expectation(pair, u: SU2Propagator) -> float:
    """``<Jz(t)>`` from ``|j1, j2 - 1>``; independent of the coupling."""
    case = _worked_case(pair)
    d = abs(u.a) ** 2 - abs(u.b) ** 2
    return {"half-half": 0.0, "one-half": 0.5 * d, "one-one": d}[case]
