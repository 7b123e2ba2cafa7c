"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in the terminal summary. Criterion 4 runs 10^5 noisy
sweeps and dominates the runtime (about a quarter of an hour on one core).
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from conftest import ACCEPTANCE
from golden import C_GOLD, T_GOLD, W_GOLD, one_half_propagator, quintet_block, two_half_propagator
from spinpair.analytics import j1z_expectation, noisy_lz_populations, LZParams, populations_grid
from spinpair.cli import main
from spinpair.coupling import Basis, SpinPair, assemble_pair_propagator, cg_matrix
from spinpair.fields import LandauZener, Rabi, random_tabulated
from spinpair.integrator import IntegrationConfig, MagnusStepper, solve_full, solve_su2
from spinpair.noise import NoiseModel, run_ensemble, sample_noise_path, trajectory_rng
from spinpair.observables import (
    PairState,
    expectation,
    flipped_state,
    product_state,
    reduced_density,
    stretched_state,
    total_spin_squared,
    trace_distance,
)
from spinpair.pipeline import SeriesOutput, block_propagators
from spinpair.scenario import lz_window, noisy_lz_scenario
from spinpair.su2 import HalfInt, SU2Propagator, lift

BASELINES = Path(__file__).parent / "baselines"
DRIFT = {}  # criterion -> (unitarity drift, J^2 drift), filled by criteria 1-5


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, detail


def _drift(key, unitarity, j2):
    u, j = DRIFT.get(key, (0.0, 0.0))
    DRIFT[key] = (max(u, float(unitarity)), max(j, float(j2)))


def _unitarity(mats):
    mats = np.asarray(mats)
    eye = np.eye(mats.shape[-1])
    return np.abs(np.conj(np.swapaxes(mats, -1, -2)) @ mats - eye).max()


def _j2_drift(pair, mats, rho0):
    """Largest change of Tr(rho J^2) along a stack of propagators."""
    j2 = total_spin_squared(pair)
    start = np.trace(rho0 @ j2).real
    rho = mats @ rho0 @ np.conj(np.swapaxes(mats, -1, -2))
    return np.abs(np.einsum("nij,ji->n", rho, j2).real - start).max()


def _random_density(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


# --- 1 -----------------------------------------------------------------------------

PAIRS = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2)]  # twice j, up to (3/2, 1)


def test_criterion_1_oracle_equivalence():
    rng = np.random.default_rng(101)
    start, worst = time.perf_counter(), 0.0
    for k in range(20):
        tj1, tj2 = PAIRS[k % len(PAIRS)]
        pair = SpinPair(HalfInt(tj1), HalfInt(tj2), rng.uniform(-2, 2))
        t1 = rng.uniform(2, 10)
        drv = random_tabulated(rng, 0.0, t1, points=201)
        grid = np.linspace(0.0, t1, 11)
        half = solve_su2(drv, None, 0.0, t1, grid)
        direct = solve_full(pair, drv, None, 0.0, t1, grid)
        blocks = block_propagators(pair, grid, half.a, half.b)
        worst = max(worst, np.abs(blocks - direct.matrices).max())
        rho0 = _random_density(rng, pair.dim)
        _drift(1, max(_unitarity(direct.matrices), _unitarity(blocks), half.norm_drift),
               max(_j2_drift(pair, direct.matrices, rho0), _j2_drift(pair, blocks, rho0)))
    elapsed = time.perf_counter() - start
    record(1, worst < 1e-6 and elapsed < 60,
           f"max deviation {worst:.2e} (< 1e-6) over 20 scenarios in {elapsed:.1f} s (< 60 s)")


# --- 2 -----------------------------------------------------------------------------


def test_criterion_2_golden_matrices():
    rng = np.random.default_rng(202)
    hh, oh, oo = (SpinPair(HalfInt(a), HalfInt(b)) for a, b in [(1, 1), (2, 1), (2, 2)])
    worst = max(np.abs(cg_matrix(p) - g).max() for p, g in [(hh, T_GOLD), (oh, W_GOLD), (oo, C_GOLD)])
    for _ in range(50):
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        u = SU2Propagator(v[0] + 1j * v[1], v[2] + 1j * v[3])
        lam, t = rng.uniform(-2, 2), rng.uniform(0, 10)
        a, b = u.a, u.b
        worst = max(worst, np.abs(assemble_pair_propagator(hh.with_lambda(lam), t, u).matrix
                                  - two_half_propagator(a, b, lam, t)).max())
        worst = max(worst, np.abs(assemble_pair_propagator(oh.with_lambda(lam), t, u).matrix
                                  - one_half_propagator(a, b, lam, t)).max())
        m = assemble_pair_propagator(oo.with_lambda(lam), t, u, Basis.COUPLED).matrix
        worst = max(worst, np.abs(m[:5, :5] - np.exp(1j * lam * t) * quintet_block(a, b)).max())
        worst = max(worst, np.abs(m[5:8, 5:8] - np.exp(-1j * lam * t) * lift(1, a, b)).max())
        worst = max(worst, abs(m[8, 8] - np.exp(-2j * lam * t)))
    record(2, worst < 1e-12, f"max entrywise deviation {worst:.2e} (< 1e-12) at 50 random points")


# --- 3 -----------------------------------------------------------------------------

LZ_GAMMAS = (0.05, 0.1, 0.2, 0.3, 0.5, 1.0)
# the +-200 sweep window needs a tighter tolerance than the default to keep
# |a|^2 + |b|^2 within 1e-8 of 1 before renormalisation
LZ_CONFIG = IntegrationConfig(rel_tol=1e-11, abs_tol=1e-13)


def test_criterion_3_noiseless_lz():
    start = time.perf_counter()
    single, joint = 0.0, 0.0
    hh = SpinPair(HalfInt(1), HalfInt(1))
    oh = SpinPair(HalfInt(2), HalfInt(1))
    for g in LZ_GAMMAS:
        lz = LandauZener.from_gamma(g)
        half = lz_window(lz)
        grid = np.linspace(-half, half, 9)
        traj = solve_su2(lz, None, -half, half, grid, LZ_CONFIG)
        p = 1 - math.exp(-2 * math.pi * g)
        single = max(single, abs(abs(traj.b[-1]) ** 2 - p))
        for pair in (hh, oh):
            mats = block_propagators(pair, grid + half, traj.a, traj.b)
            pj = abs(flipped_state(pair).data @ mats[-1] @ stretched_state(pair).data) ** 2
            joint = max(joint, abs(pj - p ** (pair.j1.twice + pair.j2.twice)))
            _drift(3, _unitarity(mats), _j2_drift(pair, mats, _random_density(np.random.default_rng(3), pair.dim)))
        _drift(3, traj.norm_drift, 0.0)
    elapsed = time.perf_counter() - start
    record(3, single < 1e-2 and joint < 2e-2 and elapsed < 120,
           f"single-spin error {single:.1e} (< 1e-2), joint error {joint:.1e} (< 2e-2), {elapsed:.0f} s (< 120 s)")


# --- 4 -----------------------------------------------------------------------------

MC_N = 10_000
MC_CONFIGS = [(g, th) for g in (0.1, 0.2, 0.5) for th in (0.5, 2.0, 5.0)]
MC_LARGE_THETA = (0.2, 20.0)
MC_OBSERVABLES = ("pop:stretched", "pop:psi_plus", "pop:flipped", "j1z")
MC_ELAPSED = []


@pytest.fixture(scope="module")
def mc_results():
    out = {}
    start = time.perf_counter()
    for g, th in MC_CONFIGS + [MC_LARGE_THETA]:
        s = noisy_lz_scenario(g, th, MC_N, seed=20240611, axes="y", observables=MC_OBSERVABLES)
        out[(g, th)] = (s, run_ensemble(s))
    MC_ELAPSED.append(time.perf_counter() - start)
    return out


def test_criterion_4_noisy_lz_monte_carlo(mc_results):
    lines, ok = [], True
    for g, th in MC_CONFIGS:
        _, res = mc_results[(g, th)]
        ref = noisy_lz_populations(LZParams(g, th)).as_tuple()
        for name, want in zip(MC_OBSERVABLES[:3], ref):
            got, se = res.final(name)
            band = 3 * se + 0.05 * want
            ok &= abs(got - want) <= band
            if abs(got - want) > band:
                lines.append(f"({g},{th}) {name} {got:.4f} vs {want:.4f} band {band:.4f}")
    _, res = mc_results[MC_LARGE_THETA]
    far = [res.final(n)[0] for n in MC_OBSERVABLES[:3]]
    ok &= all(abs(x - 1 / 3) <= 0.02 for x in far)
    worst = max(abs(mc_results[c][1].final(n)[0] - r) / (3 * mc_results[c][1].final(n)[1] + 0.05 * r)
                for c in MC_CONFIGS
                for n, r in zip(MC_OBSERVABLES[:3], noisy_lz_populations(LZParams(*c)).as_tuple()))
    # conservation along a few noisy realisations per configuration
    for g, th in MC_CONFIGS:
        s, _ = mc_results[(g, th)]
        st = MagnusStepper(s.driver, np.linspace(s.time.t0, s.time.t1, 41), s.noise.max_step)
        for k in range(3):
            a, b = st.run_ou(s.noise.sigma_sq, s.noise.inv_corr_time, trajectory_rng(1, k))
            mats = block_propagators(s.pair, st.times - st.times[0], a, b)
            _drift(4, np.abs(np.abs(a) ** 2 + np.abs(b) ** 2 - 1).max(),
                   _j2_drift(s.pair, mats, _random_density(np.random.default_rng(k), 4)))
    record(4, ok, f"9 configs x {MC_N} trajectories: worst |MC - closed form| / band = {worst:.2f} (<= 1); "
                  f"theta=20 populations {', '.join(f'{x:.3f}' for x in far)} (1/3 +- 0.02); "
                  f"{MC_ELAPSED[0]:.0f} s (target < 1800 s)"
                  + ("; " + "; ".join(lines) if lines else ""))


def test_invariant_joint_is_not_product_of_singles(mc_results):
    # single-spin flip probability 1/2 - <j1z>; under noise the joint one is not its square
    rows = []
    for g, th in MC_CONFIGS:
        if th < 1:
            continue
        _, res = mc_results[(g, th)]
        pj, se_j = res.final("pop:flipped")
        z, se_z = res.final("j1z")
        p1 = 0.5 - z
        gap = abs(pj - p1 ** 2)
        rows.append(gap > se_j + 2 * p1 * se_z)
    record("4b", all(rows), f"P(++ -> --) differs from P(+ -> -)^2 beyond statistical error in {sum(rows)}/{len(rows)} "
                            "noisy configs with theta >= 1")


# --- 5 -----------------------------------------------------------------------------


def _block_diagonal_density(rng, pair):
    g = cg_matrix(pair)
    rho = np.zeros((pair.dim, pair.dim), dtype=complex)
    lo = 0
    for j in pair.blocks:
        n = j.twice + 1
        rho[lo:lo + n, lo:lo + n] = _random_density(rng, n) * rng.uniform(0.1, 1)
        lo += n
    rho /= np.trace(rho).real
    return g @ rho @ g.T


WORKED = [(1, 1), (2, 1), (2, 2)]


def test_criterion_5_ife_properties():
    rng = np.random.default_rng(505)
    worst_tr, worst_jz, worst_j1z = 0.0, 0.0, 0.0
    for k in range(50):
        tj1, tj2 = WORKED[k % 3] if k < 30 else PAIRS[k % len(PAIRS)]
        base = SpinPair(HalfInt(tj1), HalfInt(tj2))
        drv = random_tabulated(rng, 0.0, 10.0, points=201)
        grid = np.linspace(0.0, 10.0, 21)
        traj = solve_su2(drv, None, 0.0, 10.0, grid)
        rho0 = _block_diagonal_density(rng, base)
        psi0 = product_state(base, base.j1, base.j2 - 1).data
        reduced, jz, j1z = {}, {}, {}
        for lam in (0.0, 1.0, 5.0):
            pair = base.with_lambda(lam)
            mats = block_propagators(pair, grid, traj.a, traj.b)
            rhos = mats @ rho0 @ np.conj(np.swapaxes(mats, -1, -2))
            reduced[lam] = [(reduced_density(PairState(pair, r), 1), reduced_density(PairState(pair, r), 2))
                            for r in rhos]
            states = [PairState(pair, m @ psi0) for m in mats]
            jz[lam] = np.array([expectation(s, "Jz") for s in states])
            j1z[lam] = np.array([expectation(s, "j1z") for s in states])
            _drift(5, max(_unitarity(mats), traj.norm_drift), _j2_drift(pair, mats, rho0))
            if (tj1, tj2) in WORKED:
                want = [j1z_expectation((base.j1, base.j2), traj.su2(i), lam, t) for i, t in enumerate(grid)]
                worst_j1z = max(worst_j1z, np.abs(j1z[lam] - want).max())
        for lam in (1.0, 5.0):
            for (a1, a2), (b1, b2) in zip(reduced[0.0], reduced[lam]):
                worst_tr = max(worst_tr, trace_distance(a1, b1), trace_distance(a2, b2))
            worst_jz = max(worst_jz, np.abs(jz[lam] - jz[0.0]).max())
    record(5, worst_tr < 1e-8 and worst_jz < 1e-8 and worst_j1z < 1e-8,
           f"reduced-state trace distance {worst_tr:.1e}, <Jz> spread {worst_jz:.1e}, "
           f"<j1z> vs closed form {worst_j1z:.1e} (all < 1e-8, 50 cases)")


# --- 6 -----------------------------------------------------------------------------


def _sandwich_flip(gamma, theta):
    """P(++ -> --) from relaxation, ideal crossing, relaxation (independent route)."""
    p = math.exp(-2 * math.pi * gamma)
    q = 1 - p
    w = np.array([[-1, 1, 0], [1, -2, 1], [0, 1, -1.0]])
    cross = np.array([[p * p, 2 * p * q, q * q], [2 * p * q, (p - q) ** 2, 2 * p * q], [q * q, 2 * p * q, p * p]])
    r = expm(w * theta / 4)
    return (r @ cross @ r)[2, 0]


def test_criterion_6_regime_structure():
    theta = np.round(np.arange(0, 1001) * 0.01, 10)
    diffs, agree = {}, 0.0
    for g in (0.12, 0.15, 0.18):
        p = populations_grid(g, theta)[2]
        ref = np.array([_sandwich_flip(g, x) for x in theta])
        agree = max(agree, np.abs(p - ref).max())
        diffs[g] = p - p[0]
    tol = 1e-14
    ok = (diffs[0.12].min() >= -tol and diffs[0.18].max() <= tol
          and diffs[0.15].max() > tol and diffs[0.15].min() < -tol and agree < 1e-12)
    record(6, ok, f"Gamma=0.12 min {diffs[0.12].min():+.1e}, Gamma=0.18 max {diffs[0.18].max():+.1e}, "
                  f"Gamma=0.15 range [{diffs[0.15].min():+.3f}, {diffs[0.15].max():+.3f}]; "
                  f"closed form vs independent model {agree:.1e}")


# --- 7 -----------------------------------------------------------------------------


def test_criterion_7_conservation():
    # a short noisy realisation integrated in the full product space, which knows
    # nothing about the block structure
    rng = np.random.default_rng(707)
    model = NoiseModel((0.4, 0.3, 0.2), 4.0)
    for tj1, tj2 in PAIRS:
        pair = SpinPair(HalfInt(tj1), HalfInt(tj2), rng.uniform(-2, 2))
        grid = np.linspace(0.0, 3.0, 7)
        path = sample_noise_path(model, np.linspace(0.0, 3.0, 121), rng)
        full = solve_full(pair, Rabi(1.0, 0.7, 0.3), path, 0.0, 3.0, grid)
        _drift(7, _unitarity(full.matrices), _j2_drift(pair, full.matrices, _random_density(rng, pair.dim)))
    missing = [k for k in (1, 3, 4, 5) if k not in DRIFT]
    if missing:
        pytest.skip(f"run together with criteria {missing}")
    u = max(v[0] for v in DRIFT.values())
    j = max(v[1] for v in DRIFT.values())
    record(7, u < 1e-8 and j < 1e-8,
           f"unitarity drift {u:.1e}, Tr(rho J^2) drift {j:.1e} (< 1e-8) over criteria 1, 3, 4, 5 "
           "and noisy full-space runs")


# --- 8 -----------------------------------------------------------------------------


def _p_flip_closed(gamma, theta):
    # written out independently of the package
    p = np.exp(-2 * np.pi * np.asarray(gamma, dtype=float))
    th = np.asarray(theta, dtype=float)
    e1, e3 = np.exp(-th / 2), np.exp(-3 * th / 2)
    return 1 / 3 - 0.5 * e1 * (2 * p - 1) + (1 / 6) * e3 * (1 - 6 * p + 6 * p * p)


def _expected(name):
    g = np.linspace(0.0, 1.0, 1001)
    th = np.linspace(0.0, 10.0, 1001)
    if name == "fig2":
        return np.column_stack([g] + [_p_flip_closed(g, x) for x in (0.0, 0.5, 1.0, 2.0, 5.0)])
    if name == "fig3":
        return np.column_stack([th] + [_p_flip_closed(x, th) for x in (1.0, 0.5, 0.3, 0.2, 0.1, 0.05, 0.0)])
    if name == "fig4":
        return np.column_stack([th] + [_p_flip_closed(x, th) for x in (0.16, 0.15, 0.14)] + [np.full_like(th, 1 / 3)])
    p = np.exp(-2 * np.pi * g)
    return np.column_stack([g] + [np.exp(-x / 2) * (2 * p - 1) for x in (0.0, 1.0, 3.0, 7.0)])


def test_criterion_8_figures(tmp_path):
    worst, stable = 0.0, True
    for name in ("fig2", "fig3", "fig4", "fig5"):
        out = tmp_path / f"{name}.csv"
        assert main(["figure", "--figure", name, "--out", str(out)]) == 0
        got = SeriesOutput.read_csv(out).rows
        want = _expected(name)
        # 12 significant digits, with a 1e-15 floor for entries that cancel to zero
        worst = max(worst, float((np.abs(got - want) / (1e-11 * np.abs(want) + 1e-15)).max()))
        stable &= out.read_bytes() == (BASELINES / f"{name}.csv").read_bytes()
    out = tmp_path / "fig1.csv"
    assert main(["figure", "--figure", "fig1", "--out", str(out)]) == 0
    fig1 = SeriesOutput.read_csv(out)
    stable &= out.read_bytes() == (BASELINES / "fig1.csv").read_bytes()
    # resonant rotating field integrated directly; lambda_R = omega_perp / 2
    w_perp, w0 = 2.0, 1.3
    tau = fig1.column("tau")
    traj = solve_su2(Rabi(w_perp, w0, w0), None, 0.0, tau[-1] / (w_perp / 2), tau / (w_perp / 2))
    b2 = np.abs(traj.b) ** 2
    ode = 0.0
    for col, (j1, j2) in zip(fig1.header[1:], [(0.5, 0.5), (1.0, 0.5), (1.0, 1.0)]):
        ode = max(ode, np.abs(fig1.column(col) - b2 ** (2 * (j1 + j2))).max())
    record(8, worst <= 1 and ode < 1e-8 and stable,
           f"fig2-fig5 |csv - closed form| / (1e-11 |value| + 1e-15) = {worst:.2f} (<= 1), fig1 vs ODE {ode:.1e} (< 1e-8), "
           f"byte-identical to baselines: {stable}")
