"""Numerical propagation.

* :func:`solve_su2` integrates the spin-1/2 problem ``i dU/dt = (Omega + eta).sigma/2 U``
  with an adaptive 8th-order Runge-Kutta method (scipy's DOP853).
* :func:`solve_full` integrates the whole two-spin propagator in the product
  basis; it is the independent check of the block construction.
* :class:`MagnusStepper` is a fixed-grid fourth-order Magnus integrator for
  piecewise-linear fields, compiled with numba. Monte Carlo ensembles use it,
  where an adaptive step on ~1e5-knot noise paths would be far too slow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np
from scipy.integrate import solve_ivp

from .coupling import SpinPair
from .fields import FieldDriver, Tabulated, breakpoints
from .observables import pair_operators
from .su2 import SpinDomainError, SU2Propagator

MAX_FULL_DIM = 64
# piecewise integration across field knots only while it stays cheap
_MAX_SEGMENTS = 4000

_SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
_SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2


class IntegrationError(RuntimeError):
    """The ODE solver gave up; ``t_reached`` is the last time it got to."""

    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (reached t={t_reached:.6g})")
        self.t_reached = t_reached


@dataclass(frozen=True)
class IntegrationConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    method: str = "DOP853"

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise ValueError("tolerances and max_step must be positive")

    def halved(self) -> "IntegrationConfig":
        return IntegrationConfig(self.rel_tol / 2, self.abs_tol / 2, self.max_step, self.method)


@dataclass(frozen=True, eq=False)
class PropagatorTrajectory:
    """Propagators ``U(t_k, t0)`` on an ascending time grid, shape ``(n, d, d)``.

    ``norm_drift`` is the largest deviation of ``|a|^2 + |b|^2`` from 1 before
    the output renormalisation (spin-1/2 runs only).
    """

    times: np.ndarray
    matrices: np.ndarray
    norm_drift: float = 0.0

    def __len__(self) -> int:
        return len(self.times)

    @property
    def dim(self) -> int:
        return self.matrices.shape[-1]

    @property
    def a(self) -> np.ndarray:
        return self.matrices[:, 0, 0]

    @property
    def b(self) -> np.ndarray:
        return self.matrices[:, 0, 1]

    def su2(self, k: int = -1) -> SU2Propagator:
        if self.dim != 2:
            raise SpinDomainError("not a spin-1/2 trajectory")
        return SU2Propagator(self.matrices[k, 0, 0], self.matrices[k, 0, 1])

    @property
    def final(self) -> np.ndarray:
        return self.matrices[-1]


def total_field(driver: FieldDriver, noise: Optional[Tabulated]):
    """Scalar-time field ``Omega(t) + eta(t)`` as a plain tuple."""
    if noise is None:
        return driver.at

    def field(t):
        w, e = driver.at(t), noise.at(t)
        return w[0] + e[0], w[1] + e[1], w[2] + e[2]

    return field


def _output_grid(t0: float, t1: float, grid) -> np.ndarray:
    if not t0 < t1:
        raise SpinDomainError(f"need t0 < t1, got [{t0}, {t1}]")
    grid = np.array([t0, t1] if grid is None else grid, dtype=float).ravel()
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise SpinDomainError("output grid must be non-empty and strictly ascending")
    if grid[0] < t0 or grid[-1] > t1:
        raise SpinDomainError(f"output grid leaves [{t0}, {t1}]")
    return grid


def _segments(t0, t1, driver, noise) -> np.ndarray:
    knots = [breakpoints(driver)]
    if noise is not None:
        knots.append(noise.times)
    k = np.concatenate(knots)
    k = np.unique(k[(k > t0) & (k < t1)])
    if len(k) > _MAX_SEGMENTS:
        k = np.empty(0)
    return np.concatenate([[t0], k, [t1]])


def _integrate(rhs, y0, t0, t1, grid, config, edges):
    """Integrate ``y' = rhs(t, y)`` from t0 and return ``y`` at every grid time."""
    out = np.empty((len(grid), len(y0)), dtype=complex)
    y = np.asarray(y0, dtype=complex)
    done = 0
    while done < len(grid) and grid[done] == t0:
        out[done] = y
        done += 1
    latest = [t0]

    def tracked(t, y):
        dy = rhs(t, y)
        if not np.all(np.isfinite(dy)):
            raise IntegrationError(f"non-finite derivative at t={t:.6g}", float(latest[0]))
        latest[0] = t
        return dy

    for lo, hi in zip(edges[:-1], edges[1:]):
        if done == len(grid):
            break
        stop = np.searchsorted(grid, hi, side="right")
        t_eval = grid[done:stop]
        if t_eval.size == 0 or t_eval[-1] != hi:
            t_eval = np.append(t_eval, hi)
        sol = solve_ivp(tracked, (lo, hi), y, method=config.method, t_eval=t_eval,
                        rtol=config.rel_tol, atol=config.abs_tol, max_step=config.max_step)
        if sol.status != 0:
            raise IntegrationError(sol.message, float(latest[0]))
        n_new = stop - done
        out[done:stop] = sol.y[:, :n_new].T
        y = sol.y[:, -1]
        done = stop
    return out


def solve_su2(driver: FieldDriver, noise: Optional[Tabulated] = None, t0: float = 0.0, t1: float = 1.0,
              grid=None, config: Optional[IntegrationConfig] = None) -> PropagatorTrajectory:
    """Spin-1/2 propagator in the field ``Omega(t) + eta(t)`` on ``grid``.

    Integrates the image of ``|+>`` (the column ``(a, -b*)``); ``(a, b)`` are
    renormalised at the output points only.
    """
    config = config or IntegrationConfig()
    grid = _output_grid(t0, t1, grid)
    field = total_field(driver, noise)

    def rhs(t, psi):
        wx, wy, wz = field(t)
        p0, p1 = complex(psi[0]), complex(psi[1])
        # -i (w.sigma/2) psi
        return np.array([-0.5j * (wz * p0 + complex(wx, -wy) * p1),
                         -0.5j * (complex(wx, wy) * p0 - wz * p1)])

    cols = _integrate(rhs, [1.0, 0.0], t0, t1, grid, config, _segments(t0, t1, driver, noise))
    a, b = cols[:, 0], -np.conj(cols[:, 1])
    n2 = np.abs(a) ** 2 + np.abs(b) ** 2
    n = np.sqrt(n2)
    a, b = a / n, b / n
    mats = np.empty((len(grid), 2, 2), dtype=complex)
    mats[:, 0, 0], mats[:, 0, 1] = a, b
    mats[:, 1, 0], mats[:, 1, 1] = -np.conj(b), np.conj(a)
    return PropagatorTrajectory(grid, mats, float(np.abs(n2 - 1).max()))


def pair_hamiltonian(pair: SpinPair):
    """``H(w) = w.(j1 + j2) - lam j1.j2`` as a function of the field vector."""
    j1, j2 = pair_operators(pair)
    total = [a + b for a, b in zip(j1, j2)]
    exchange = -pair.lam * sum(a @ b for a, b in zip(j1, j2))
    return lambda w: w[0] * total[0] + w[1] * total[1] + w[2] * total[2] + exchange


def solve_full(pair: SpinPair, driver: FieldDriver, noise: Optional[Tabulated] = None, t0: float = 0.0,
               t1: float = 1.0, grid=None, config: Optional[IntegrationConfig] = None) -> PropagatorTrajectory:
    """Direct integration of the two-spin propagator in the standard basis."""
    d = pair.dim
    if d > MAX_FULL_DIM:
        raise SpinDomainError(f"dimension {d} exceeds the direct-integration cap {MAX_FULL_DIM}")
    config = config or IntegrationConfig()
    grid = _output_grid(t0, t1, grid)
    field = total_field(driver, noise)
    ham = pair_hamiltonian(pair)

    def rhs(t, y):
        return (-1j * ham(field(t)) @ y.reshape(d, d)).ravel()

    flat = _integrate(rhs, np.eye(d, dtype=complex).ravel(), t0, t1, grid, config,
                      _segments(t0, t1, driver, noise))
    return PropagatorTrajectory(grid, flat.reshape(len(grid), d, d))


# --- fixed-grid Magnus stepper --------------------------------------------------

_G1 = 0.5 - math.sqrt(3) / 6
_G2 = 0.5 + math.sqrt(3) / 6


def step_grid(times, max_step: float) -> tuple[np.ndarray, np.ndarray]:
    """Knots covering ``times`` with spacing <= ``max_step``; also the indices of ``times``."""
    times = np.asarray(times, dtype=float)
    pieces, idx, count = [times[:1]], [0], 0
    for lo, hi in zip(times[:-1], times[1:]):
        n = max(1, int(math.ceil((hi - lo) / max_step * (1 - 1e-12))))
        pieces.append(lo + (hi - lo) * np.arange(1, n + 1) / n)
        count += n
        idx.append(count)
    knots = np.concatenate(pieces)
    knots[np.asarray(idx)] = times
    return knots, np.asarray(idx)


@numba.njit(cache=True, inline="always")
def _magnus_step(h, x1, y1, z1, x2, y2, z2, a, b):  # pragma: no cover - compiled
    # exponent -i v.sigma/2 with v = h/2 (n1 + n2) + c (n2 x n1)
    c = math.sqrt(3.0) / 12.0 * h * h
    vx = 0.5 * h * (x1 + x2) + c * (y2 * z1 - z2 * y1)
    vy = 0.5 * h * (y1 + y2) + c * (z2 * x1 - x2 * z1)
    vz = 0.5 * h * (z1 + z2) + c * (x2 * y1 - y2 * x1)
    th = math.sqrt(vx * vx + vy * vy + vz * vz)
    cs = math.cos(0.5 * th)
    sn = math.sin(0.5 * th) / th if th > 0.0 else 0.5
    m00 = cs - 1j * sn * vz
    m01 = -1j * sn * (vx - 1j * vy)
    return m00 * a - m01 * b.conjugate(), m00 * b + m01 * a.conjugate()


@numba.njit(cache=True, inline="always")
def _record(a, b, j, out_a, out_b):  # pragma: no cover - compiled
    # no renormalisation: every step is exactly unitary, so |a|^2 + |b|^2
    # drifts only by rounding and stays a meaningful check
    out_a[j] = a
    out_b[j] = b


@numba.njit(cache=True)
def _magnus_kernel(knots, f1, f2, noise, out_idx, out_a, out_b):  # pragma: no cover - compiled
    a = 1.0 + 0.0j
    b = 0.0 + 0.0j
    j = 0
    if out_idx.size > 0 and out_idx[0] == 0:
        _record(a, b, 0, out_a, out_b)
        j = 1
    has_noise = noise.shape[0] > 0
    for k in range(knots.size - 1):
        x1, y1, z1 = f1[k, 0], f1[k, 1], f1[k, 2]
        x2, y2, z2 = f2[k, 0], f2[k, 1], f2[k, 2]
        if has_noise:
            dx = noise[k + 1, 0] - noise[k, 0]
            dy = noise[k + 1, 1] - noise[k, 1]
            dz = noise[k + 1, 2] - noise[k, 2]
            x1 += noise[k, 0] + _G1 * dx
            y1 += noise[k, 1] + _G1 * dy
            z1 += noise[k, 2] + _G1 * dz
            x2 += noise[k, 0] + _G2 * dx
            y2 += noise[k, 1] + _G2 * dy
            z2 += noise[k, 2] + _G2 * dz
        a, b = _magnus_step(knots[k + 1] - knots[k], x1, y1, z1, x2, y2, z2, a, b)
        if j < out_idx.size and out_idx[j] == k + 1:
            _record(a, b, j, out_a, out_b)
            j += 1


@numba.njit(cache=True)
def _magnus_ou_kernel(knots, f1, f2, rng, axes, sigma, lam, out_idx, out_a, out_b):  # pragma: no cover - compiled
    # draws in the same order and with the same arithmetic as the standalone
    # OU sampler, so a shared generator state gives the same path
    prev = np.zeros(3)
    cur = np.zeros(3)
    for c in range(axes.size):
        prev[axes[c]] = sigma[c] * rng.standard_normal()
    a = 1.0 + 0.0j
    b = 0.0 + 0.0j
    j = 0
    if out_idx.size > 0 and out_idx[0] == 0:
        _record(a, b, 0, out_a, out_b)
        j = 1
    h_prev = -1.0
    decay = kick = 0.0
    for k in range(knots.size - 1):
        h = knots[k + 1] - knots[k]
        if h != h_prev:
            decay = math.exp(-lam * h)
            kick = math.sqrt(-math.expm1(-2.0 * lam * h))
            h_prev = h
        for c in range(axes.size):
            ax = axes[c]
            cur[ax] = prev[ax] * decay + sigma[c] * kick * rng.standard_normal()
        dx, dy, dz = cur[0] - prev[0], cur[1] - prev[1], cur[2] - prev[2]
        x1 = f1[k, 0] + prev[0] + _G1 * dx
        y1 = f1[k, 1] + prev[1] + _G1 * dy
        z1 = f1[k, 2] + prev[2] + _G1 * dz
        x2 = f2[k, 0] + prev[0] + _G2 * dx
        y2 = f2[k, 1] + prev[1] + _G2 * dy
        z2 = f2[k, 2] + prev[2] + _G2 * dz
        a, b = _magnus_step(h, x1, y1, z1, x2, y2, z2, a, b)
        prev[0], prev[1], prev[2] = cur[0], cur[1], cur[2]
        if j < out_idx.size and out_idx[j] == k + 1:
            _record(a, b, j, out_a, out_b)
            j += 1


class MagnusStepper:
    """Spin-1/2 propagation over fixed knots with piecewise-linear noise.

    The deterministic field is evaluated once at the two Gauss nodes of every
    step, so many noise realisations can reuse it.
    """

    def __init__(self, driver: FieldDriver, times, max_step: float):
        self.times = np.asarray(times, dtype=float)
        self.knots, self.out_idx = step_grid(self.times, max_step)
        h = np.diff(self.knots)
        self._f1 = np.ascontiguousarray(driver.field(self.knots[:-1] + _G1 * h))
        self._f2 = np.ascontiguousarray(driver.field(self.knots[:-1] + _G2 * h))

    def run(self, noise_values: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray]:
        """``(a, b)`` at the output times for one noise realisation on the knots."""
        if noise_values is None:
            noise_values = np.empty((0, 3))
        elif noise_values.shape != (len(self.knots), 3):
            raise SpinDomainError(f"noise must have shape ({len(self.knots)}, 3)")
        out_a = np.empty(len(self.times), dtype=complex)
        out_b = np.empty(len(self.times), dtype=complex)
        _magnus_kernel(self.knots, self._f1, self._f2, np.ascontiguousarray(noise_values, dtype=float),
                       self.out_idx, out_a, out_b)
        return out_a, out_b

    def run_ou(self, sigma_sq, inv_corr_time: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Like :meth:`run`, sampling an OU path on the knots while stepping.

        Consumes ``rng`` exactly as :func:`spinpair.noise.sample_noise_path`
        would on the same knots, so both routes give the same realisation.
        """
        sigma_sq = np.asarray(sigma_sq, dtype=float)
        axes = np.flatnonzero(sigma_sq)
        out_a = np.empty(len(self.times), dtype=complex)
        out_b = np.empty(len(self.times), dtype=complex)
        _magnus_ou_kernel(self.knots, self._f1, self._f2, rng, axes, np.sqrt(sigma_sq[axes]),
                          float(inv_corr_time), self.out_idx, out_a, out_b)
        return out_a, out_b
