"""Classical Gaussian coloured noise and Monte Carlo ensembles.

Each field component is an independent stationary Ornstein-Uhlenbeck process,
``<eta_i(t) eta_i(t')> = sigma_i^2 exp(-Lambda |t - t'|)``, sampled with the
exact discrete update so any grid spacing is unbiased.

Trajectory ``k`` draws from its own Philox stream keyed by
``(master_seed, k)``; trajectories are reduced in fixed-size chunks in index
order, so results do not depend on how many workers ran them.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numba
import numpy as np

from .fields import Tabulated
from .su2 import SpinDomainError

# trajectories per reduction chunk; fixed so the summation order never changes
CHUNK = 256
FAILURE_LIMIT = 0.01


class EnsembleError(RuntimeError):
    """Too many trajectories failed."""

    def __init__(self, n_failed: int, n_total: int, first: str = ""):
        super().__init__(f"{n_failed} of {n_total} trajectories failed" + (f"; first: {first}" if first else ""))
        self.n_failed = n_failed
        self.n_total = n_total


@dataclass(frozen=True)
class NoiseModel:
    """Diagonal OU noise: per-axis variances ``sigma_sq`` and inverse correlation time."""

    sigma_sq: tuple[float, float, float]
    inv_corr_time: float

    def __post_init__(self):
        s = tuple(float(x) for x in self.sigma_sq)
        if len(s) != 3 or any(not (x >= 0 and math.isfinite(x)) for x in s):
            raise SpinDomainError(f"sigma_sq needs three finite values >= 0, got {self.sigma_sq}")
        if not (self.inv_corr_time > 0 and math.isfinite(self.inv_corr_time)):
            raise SpinDomainError(f"inverse correlation time must be positive, got {self.inv_corr_time}")
        object.__setattr__(self, "sigma_sq", s)
        object.__setattr__(self, "inv_corr_time", float(self.inv_corr_time))

    @property
    def r0(self) -> float:
        """Equal-time transverse correlation ``sigma_x^2 + sigma_y^2``."""
        return self.sigma_sq[0] + self.sigma_sq[1]

    def theta(self, alpha: float) -> float:
        """Dimensionless noise strength ``2 pi R(0) / alpha`` for a sweep of rate ``alpha``.

        This normalisation matches ``H = (Omega + eta).j``; see the README
        for how it relates to the Pauli-matrix convention.
        """
        return 2 * math.pi * self.r0 / alpha

    @classmethod
    def transverse(cls, theta: float, alpha: float, inv_corr_time: float, axes: str = "xy") -> "NoiseModel":
        """Transverse noise giving ``theta`` at sweep rate ``alpha``.

        ``axes="xy"`` splits ``R(0)`` equally over x and y; ``axes="y"`` puts it
        all on y, which stays perpendicular to a sweep field ``(delta, 0, alpha t)``
        even at the crossing.
        """
        if theta < 0:
            raise SpinDomainError("theta must be >= 0")
        r0 = theta * alpha / (2 * math.pi)
        if axes == "xy":
            return cls((r0 / 2, r0 / 2, 0.0), inv_corr_time)
        if axes == "y":
            return cls((0.0, r0, 0.0), inv_corr_time)
        raise SpinDomainError(f"axes must be 'xy' or 'y', got {axes!r}")

    @property
    def is_silent(self) -> bool:
        return not any(self.sigma_sq)

    @property
    def max_step(self) -> float:
        return 1.0 / (10.0 * self.inv_corr_time)


@numba.njit(cache=True)
def _ou_kernel(times, xi, axes, sigma, lam, out):  # pragma: no cover - compiled
    # xi holds one column per entry of sigma; out columns follow axes
    for c in range(sigma.size):
        out[0, axes[c]] = sigma[c] * xi[0, c]
    for k in range(1, times.size):
        d = times[k] - times[k - 1]
        decay = math.exp(-lam * d)
        kick = math.sqrt(-math.expm1(-2.0 * lam * d))
        for c in range(sigma.size):
            a = axes[c]
            out[k, a] = out[k - 1, a] * decay + sigma[c] * kick * xi[k, c]


def trajectory_rng(master_seed: int, k: int) -> np.random.Generator:
    """Independent stream for trajectory ``k``; a pure function of ``(master_seed, k)``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(master_seed), spawn_key=(int(k),))))


def sample_noise_path(model: NoiseModel, grid, seed) -> Tabulated:
    """One realisation on ``grid``; ``seed`` is an int or a ``Generator``.

    The first sample comes from the stationary law ``N(0, sigma^2)``. Axes with
    zero variance stay at zero and consume no random numbers.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise SpinDomainError("noise grid must be strictly increasing with at least two points")
    step = float(np.max(np.diff(grid)))
    if step > model.max_step * (1 + 1e-9):
        raise SpinDomainError(f"grid step {step:.4g} exceeds 1/(10 Lambda) = {model.max_step:.4g}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    axes = np.flatnonzero(np.asarray(model.sigma_sq))
    out = np.zeros((grid.size, 3))
    if axes.size:
        xi = rng.standard_normal((grid.size, axes.size))
        _ou_kernel(grid, xi, axes, np.sqrt(np.asarray(model.sigma_sq)[axes]), model.inv_corr_time, out)
    return Tabulated(grid, out)


@dataclass(frozen=True)
class EnsembleConfig:
    n_trajectories: int
    master_seed: int = 0
    path_step: Optional[float] = None
    workers: int = 1
    method: str = "magnus"

    METHODS = ("magnus", "adaptive", "full")

    def __post_init__(self):
        if int(self.n_trajectories) < 1:
            raise SpinDomainError("n_trajectories must be >= 1")
        if not 0 <= int(self.master_seed) < 2**64:
            raise SpinDomainError("master_seed must fit in 64 unsigned bits")
        if self.path_step is not None and not self.path_step > 0:
            raise SpinDomainError("path_step must be positive")
        if int(self.workers) < 1:
            raise SpinDomainError("workers must be >= 1")
        if self.method not in self.METHODS:
            raise SpinDomainError(f"method must be one of {self.METHODS}, got {self.method!r}")

    def step_for(self, model: NoiseModel) -> float:
        step = model.max_step if self.path_step is None else self.path_step
        if step > model.max_step * (1 + 1e-9):
            raise SpinDomainError(f"path_step {step:.4g} exceeds 1/(10 Lambda) = {model.max_step:.4g}")
        return step


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    times: np.ndarray
    names: tuple[str, ...]
    mean: np.ndarray
    stderr: np.ndarray
    n_trajectories: int
    n_failed: int = 0

    def column(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        i = self.names.index(name)
        return self.mean[:, i], self.stderr[:, i]

    def final(self, name: str) -> tuple[float, float]:
        m, s = self.column(name)
        return float(m[-1]), float(s[-1])


@dataclass
class _Moments:
    """Running count, mean and centred sum of squares (Chan's pairwise merge)."""

    n: int
    mean: np.ndarray
    m2: np.ndarray

    @classmethod
    def of(cls, values: np.ndarray) -> "_Moments":
        # shift by the first row: exact zero spread for identical rows
        d = values - values[0]
        dm = d.mean(axis=0)
        return cls(len(values), values[0] + dm, ((d - dm) ** 2).sum(axis=0))

    def merge(self, other: "_Moments") -> "_Moments":
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.n / n)
        m2 = self.m2 + other.m2 + delta**2 * (self.n * other.n / n)
        return _Moments(n, mean, m2)


def _run_chunk(task):
    """Worker entry point: evaluate trajectories ``lo..hi-1`` of a prepared runner."""
    runner, lo, hi = task
    rows, failures = [], []
    for k in range(lo, hi):
        try:
            rows.append(runner.trajectory(k))
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            failures.append(f"trajectory {k}: {exc}")
    values = np.stack(rows) if rows else np.empty((0,) + runner.shape)
    return _Moments.of(values) if rows else _Moments(0, 0.0, 0.0), failures


def reduce_trajectories(runner, config: EnsembleConfig) -> EnsembleResult:
    """Run ``runner.trajectory(k)`` for every ``k`` and reduce in index order.

    ``runner`` must be picklable when ``config.workers > 1`` and expose
    ``times``, ``names`` and ``shape`` (per-trajectory array shape).
    """
    n = int(config.n_trajectories)
    tasks = [(runner, lo, min(lo + CHUNK, n)) for lo in range(0, n, CHUNK)]
    if config.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    total = _Moments(0, 0.0, 0.0)
    failures: list[str] = []
    for moments, fails in parts:
        total = total.merge(moments)
        failures.extend(fails)
    if len(failures) > FAILURE_LIMIT * n or total.n == 0:
        raise EnsembleError(len(failures), n, failures[0] if failures else "")
    if total.n > 1:
        stderr = np.sqrt(total.m2 / (total.n - 1) / total.n)
    else:
        stderr = np.zeros_like(total.mean)
    return EnsembleResult(np.asarray(runner.times), tuple(runner.names), np.asarray(total.mean),
                          np.asarray(stderr), total.n, len(failures))



def run_ensemble(scenario) -> EnsembleResult:
    """Monte Carlo average of the scenario's observables over noise realisations."""
    from .pipeline import EnsembleRunner

    if scenario.noise is None or scenario.ensemble is None:
        raise SpinDomainError("ensemble runs need a noise model and an ensemble section")
    return reduce_trajectories(EnsembleRunner(scenario), scenario.ensemble)
