"""End-to-end runs of a :class:`~spinpair.scenario.Scenario`.

The deterministic path solves one spin-1/2 problem, lifts it to every
total-spin block and measures; noisy scenarios are averaged over an ensemble.
:func:`oracle_check` compares the block construction with direct integration
of the full two-spin Hamiltonian.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .coupling import SpinPair, cg_matrix, coupled_matrix
from .integrator import MagnusStepper, solve_full, solve_su2
from .noise import run_ensemble, sample_noise_path, trajectory_rng
from .observables import (
    PairState,
    evolve_series,
    flipped_state,
    measure,
    named_operator,
    product_state,
    stretched_state,
)
from .scenario import Scenario
from .su2 import HalfInt, SpinDomainError

SIG_DIGITS = 12


@dataclass(frozen=True, eq=False)
class SeriesOutput:
    """A time-series table: first column ``t`` (or another abscissa), then values."""

    header: tuple[str, ...]
    rows: np.ndarray
    comments: tuple[str, ...] = field(default=())

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[1] != len(self.header):
            raise ValueError(f"rows must have {len(self.header)} columns")
        object.__setattr__(self, "rows", rows)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.header.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        for c in self.comments:
            buf.write(f"# {c}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([format_value(x) for x in row])
        return buf.getvalue()

    def write(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def read_csv(cls, path) -> "SeriesOutput":
        with open(path) as fh:
            lines = fh.read().splitlines()
        comments = tuple(l[2:] for l in lines if l.startswith("# "))
        body = [l for l in lines if not l.startswith("#")]
        rows = list(csv.reader(body))
        return cls(tuple(rows[0]), np.array([[float(x) for x in r] for r in rows[1:]]), comments)


def format_value(x: float) -> str:
    """Plain decimal with 12 significant digits (``-0`` normalised to ``0``)."""
    s = f"{x:.{SIG_DIGITS}g}"
    return "0" if s in ("-0", "0") else s


# --- states and observables ------------------------------------------------------


def psi_state(pair: SpinPair, sign: int) -> PairState:
    """``(|j1, j2-1> + sign |j1-1, j2>) / sqrt 2``; ``|Psi+->`` for two spin-1/2's."""
    if pair.j1.twice < 1 or pair.j2.twice < 1:
        raise SpinDomainError("psi states need both spins >= 1/2")
    a = product_state(pair, pair.j1, pair.j2 - 1).data
    b = product_state(pair, pair.j1 - 1, pair.j2).data
    return PairState(pair, (a + sign * b) / math.sqrt(2))


def named_state(pair: SpinPair, name: str) -> PairState:
    if name == "stretched":
        return stretched_state(pair)
    if name == "flipped":
        return flipped_state(pair)
    if name == "psi_plus":
        return psi_state(pair, +1)
    if name == "psi_minus":
        return psi_state(pair, -1)
    m1, m2 = name.split(";")
    return product_state(pair, HalfInt.of(m1), HalfInt.of(m2))


def initial_state(s: Scenario) -> PairState:
    spec = s.initial
    if spec.kind == "m-pair":
        return product_state(s.pair, spec.m1, spec.m2)
    if spec.kind == "custom":
        return PairState(s.pair, np.array(spec.vector, dtype=complex))
    return named_state(s.pair, spec.kind)


def observable_matrix(pair: SpinPair, name: str) -> np.ndarray:
    if name == "joint_inversion":
        name = "pop:flipped"
    if name.startswith("pop:"):
        v = named_state(pair, name[4:]).data
        return np.outer(v, v.conj())
    return named_operator(pair, name)


def _measure_all(states, ops) -> np.ndarray:
    return np.stack([measure(states, op) for op in ops], axis=-1)


# --- deterministic and ensemble runs --------------------------------------------


def simulate(s: Scenario) -> SeriesOutput:
    """Run a scenario; noisy ones go through the Monte Carlo ensemble."""
    if s.noise is not None:
        res = run_ensemble(s)
        cols = [res.times[:, None]]
        for i in range(len(res.names)):
            cols += [res.mean[:, i:i + 1], res.stderr[:, i:i + 1]]
        header = ("t",) + tuple(x for n in res.names for x in (n, f"{n}_stderr"))
        return SeriesOutput(header, np.hstack(cols),
                            (f"trajectories={res.n_trajectories} failed={res.n_failed}",))
    times = s.time.values()
    traj = solve_su2(s.driver, None, s.time.t0, s.time.t1, times, s.integration)
    states = evolve_series(s.pair, times - s.time.t0, traj.a, traj.b, initial_state(s))
    ops = [observable_matrix(s.pair, n) for n in s.observables]
    return SeriesOutput(("t",) + tuple(s.observables), np.column_stack([times, _measure_all(states, ops)]))


class EnsembleRunner:
    """Per-trajectory work for :func:`spinpair.noise.run_ensemble` (picklable)."""

    def __init__(self, s: Scenario):
        self.scenario = s
        self.times = s.time.values()
        self.names = s.observables
        self.shape = (len(self.times), len(self.names))
        self.method = s.ensemble.method
        self.step = s.ensemble.step_for(s.noise)
        self.state = initial_state(s)
        self.ops = [observable_matrix(s.pair, n) for n in s.observables]
        # integrate from t0 even when the first output time is later
        self._lead = 1 if self.times[0] > s.time.t0 else 0
        grid = np.concatenate([[s.time.t0], self.times]) if self._lead else self.times
        if self.method == "magnus":
            self.stepper = MagnusStepper(s.driver, grid, self.step)
            self.knots = self.stepper.knots
        else:
            n = max(1, int(math.ceil((s.time.t1 - s.time.t0) / self.step * (1 - 1e-12))))
            self.knots = np.linspace(s.time.t0, s.time.t1, n + 1)

    def trajectory(self, k: int) -> np.ndarray:
        s = self.scenario
        rng = trajectory_rng(s.ensemble.master_seed, k)
        if self.method == "magnus":
            a, b = self.stepper.run_ou(s.noise.sigma_sq, s.noise.inv_corr_time, rng)
            a, b = a[self._lead:], b[self._lead:]
        elif self.method == "adaptive":
            path = sample_noise_path(s.noise, self.knots, rng)
            traj = solve_su2(s.driver, path, s.time.t0, s.time.t1, self.times, s.integration)
            a, b = traj.a, traj.b
        else:
            path = sample_noise_path(s.noise, self.knots, rng)
            traj = solve_full(s.pair, s.driver, path, s.time.t0, s.time.t1, self.times, s.integration)
            psi = self.state.data
            states = traj.matrices @ psi if self.state.is_pure else \
                traj.matrices @ psi @ np.conj(np.swapaxes(traj.matrices, -1, -2))
            return _measure_all(states, self.ops)
        return _measure_all(evolve_series(s.pair, self.times - s.time.t0, a, b, self.state), self.ops)


# --- oracle ----------------------------------------------------------------------


@dataclass(frozen=True)
class OracleReport:
    max_deviation: float
    tolerance: float
    dimension: int
    n_times: int

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance

    def summary(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} max|U_blocks - U_direct| = {self.max_deviation:.3e} "
                f"(tol {self.tolerance:.1e}, D={self.dimension}, {self.n_times} times)")


def block_propagators(pair: SpinPair, times, a, b, corrupt: bool = False) -> np.ndarray:
    """Standard-basis two-spin propagators from spin-1/2 amplitudes at each time.

    ``corrupt=True`` applies the coupled-to-standard matrix the wrong way round;
    it exists only as a negative control for :func:`oracle_check`.
    """
    g = cg_matrix(pair)
    if corrupt:
        g = g.T
    u = coupled_matrix(pair, np.asarray(times, dtype=float)[:, None, None], a, b)
    return np.einsum("ij,njk,lk->nil", g, u, g)


def oracle_check(s: Scenario, tol: float = 1e-6, corrupt: bool = False) -> OracleReport:
    times = s.time.values()
    traj = solve_su2(s.driver, None, s.time.t0, s.time.t1, times, s.integration)
    # the block phases run from t0, the amplitudes already do
    blocks = block_propagators(s.pair, times - s.time.t0, traj.a, traj.b, corrupt)
    direct = solve_full(s.pair, s.driver, None, s.time.t0, s.time.t1, times, s.integration)
    dev = float(np.abs(blocks - direct.matrices).max())
    return OracleReport(dev, tol, s.pair.dim, len(times))
