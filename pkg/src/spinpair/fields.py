"""Deterministic control fields, given directly as angular-frequency vectors
``Omega(t) = (omega_x, omega_y, omega_z)`` so that ``H = Omega(t) . j``.
"""

from __future__ import annotations

import bisect
import csv
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .su2 import SU2Propagator


class FieldRangeError(ValueError):
    """Time outside a tabulated field's grid."""


class FieldSample(NamedTuple):
    omega_x: float
    omega_y: float
    omega_z: float


@dataclass(frozen=True)
class Rabi:
    """Field of constant magnitude precessing about z: ``(w_perp cos wt, w_perp sin wt, w0)``."""

    omega_perp: float
    omega_rot: float
    omega_0: float

    def field(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        ph = self.omega_rot * t
        return np.stack(
            [self.omega_perp * np.cos(ph), self.omega_perp * np.sin(ph), np.full_like(t, self.omega_0)], axis=-1
        )

    def at(self, t: float) -> tuple[float, float, float]:
        ph = self.omega_rot * t
        return self.omega_perp * math.cos(ph), self.omega_perp * math.sin(ph), self.omega_0

    @property
    def at_resonance(self) -> bool:
        return self.omega_rot == self.omega_0


@dataclass(frozen=True)
class LandauZener:
    """Linear sweep ``(delta, 0, alpha t)`` through the crossing at ``t = 0``."""

    delta: float
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"sweep rate must be positive, got {self.alpha}")

    @property
    def gamma(self) -> float:
        """Adiabaticity parameter ``delta^2 / (4 alpha)``."""
        return self.delta**2 / (4 * self.alpha)

    @classmethod
    def from_gamma(cls, gamma: float, alpha: float = 1.0) -> "LandauZener":
        return cls(math.sqrt(4 * alpha * gamma), alpha)

    def field(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.stack([np.full_like(t, self.delta), np.zeros_like(t), self.alpha * t], axis=-1)

    def at(self, t: float) -> tuple[float, float, float]:
        return self.delta, 0.0, self.alpha * t


@dataclass(frozen=True)
class Constant:
    value: FieldSample

    def __post_init__(self):
        object.__setattr__(self, "value", FieldSample(*map(float, self.value)))

    def field(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return np.broadcast_to(np.asarray(self.value, dtype=float), t.shape + (3,)).copy()

    def at(self, t: float) -> tuple[float, float, float]:
        return self.value


@dataclass(frozen=True, eq=False)
class Tabulated:
    """Piecewise-linear field through samples on a strictly increasing grid."""

    times: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        samples = np.array(self.samples, dtype=float)
        if times.ndim != 1 or len(times) < 2:
            raise ValueError("tabulated field needs at least two time points")
        if samples.shape != (len(times), 3):
            raise ValueError(f"samples must have shape ({len(times)}, 3), got {samples.shape}")
        if np.any(np.diff(times) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if not np.all(np.isfinite(samples)):
            raise ValueError("field samples must be finite")
        times.setflags(write=False)
        samples.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "_lists", None)

    def __eq__(self, other):
        return (
            isinstance(other, Tabulated)
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.samples, other.samples)
        )

    def field(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        lo, hi = self.times[0], self.times[-1]
        if np.any(t < lo) or np.any(t > hi):
            raise FieldRangeError(f"t outside tabulated range [{lo}, {hi}]")
        return np.stack([np.interp(t, self.times, self.samples[:, k]) for k in range(3)], axis=-1)

    def at(self, t: float) -> tuple[float, float, float]:
        if self._lists is None:
            # plain-Python copies make scalar lookups inside ODE right-hand sides cheap
            object.__setattr__(self, "_lists", (self.times.tolist(), self.samples.tolist()))
        ts, rows = self._lists
        if not ts[0] <= t <= ts[-1]:
            raise FieldRangeError(f"t={t} outside tabulated range [{ts[0]}, {ts[-1]}]")
        k = min(bisect.bisect_right(ts, t), len(ts) - 1)
        t_lo, t_hi = ts[k - 1], ts[k]
        w = (t - t_lo) / (t_hi - t_lo)
        lo, hi = rows[k - 1], rows[k]
        return lo[0] + w * (hi[0] - lo[0]), lo[1] + w * (hi[1] - lo[1]), lo[2] + w * (hi[2] - lo[2])

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        """Read a ``t,omega_x,omega_y,omega_z`` CSV (header row required)."""
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].lstrip().startswith("#")]
        header = [h.strip() for h in rows[0]]
        if header != ["t", "omega_x", "omega_y", "omega_z"]:
            raise ValueError(f"{path}: expected header t,omega_x,omega_y,omega_z, got {','.join(header)}")
        data = np.array([[float(x) for x in r] for r in rows[1:]])
        return cls(data[:, 0], data[:, 1:])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "omega_x", "omega_y", "omega_z"])
            for t, s in zip(self.times, self.samples):
                w.writerow([repr(float(t))] + [repr(float(x)) for x in s])


FieldDriver = Union[Rabi, LandauZener, Constant, Tabulated]


def sample(driver: FieldDriver, t: float) -> FieldSample:
    return FieldSample(*(float(x) for x in driver.at(float(t))))


def breakpoints(driver: FieldDriver) -> np.ndarray:
    """Times where the field is not smooth (knots of a tabulated driver)."""
    if isinstance(driver, Tabulated):
        return driver.times
    return np.empty(0)


def random_tabulated(rng: np.random.Generator, t0: float, t1: float, n_modes: int = 4,
                     amplitude: float = 1.0, points: int = 401) -> Tabulated:
    """A smooth random field: a few random sinusoids per axis, tabulated finely."""
    t = np.linspace(t0, t1, points)
    span = t1 - t0
    out = np.zeros((points, 3))
    for k in range(3):
        freqs = rng.uniform(0.2, 3.0, n_modes) * 2 * np.pi / span
        amps = rng.normal(0, amplitude / math.sqrt(n_modes), n_modes)
        phases = rng.uniform(0, 2 * np.pi, n_modes)
        out[:, k] = rng.normal(0, amplitude / 2) + (amps * np.sin(np.outer(t - t0, freqs) + phases)).sum(axis=1)
    return Tabulated(t, out)


def rabi_resonance_ab(omega_perp: float, t, omega_0: float = 0.0) -> SU2Propagator:
    """Closed-form spin-1/2 propagator for the Rabi field at resonance.

    With ``omega_rot == omega_0`` the rotating frame removes the time
    dependence and::

        a = exp(-i w0 t / 2) cos(w_perp t / 2)
        b = -i exp(-i w0 t / 2) sin(w_perp t / 2)

    so ``|b|^2 = sin^2(w_perp t / 2)`` reaches full inversion at
    ``t = pi / w_perp``.
    """
    ph = np.exp(-0.5j * omega_0 * t)
    x = 0.5 * omega_perp * t
    return SU2Propagator(ph * math.cos(x), -1j * ph * math.sin(x))
