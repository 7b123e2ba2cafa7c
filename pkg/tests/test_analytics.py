import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from conftest import random_su2, su2_props
from spinpair.analytics import (
    GAMMA_HIGH,
    GAMMA_LOW,
    Initial,
    LZParams,
    Regime,
    asymptotic_jz,
    gamma_regime,
    j1z_expectation,
    joint_inversion_probability,
    joint_lz_probability,
    jz_expectation,
    lz_probability,
    noisy_lz_populations,
    populations_grid,
)
from spinpair.coupling import SpinPair, assemble_pair_propagator
from spinpair.observables import PairState, expectation, product_state
from spinpair.su2 import HalfInt, SpinDomainError


def _sandwich(gamma, theta, start):
    """Independent three-level model: noise-only relaxation, an ideal crossing, relaxation.

    The triplet populations relax with generator W for a quarter of theta on
    each side of a crossing whose transfer matrix is the symmetric square of
    the single-spin LZ matrix.
    """
    p = math.exp(-2 * math.pi * gamma)
    q = 1 - p
    w = np.array([[-1, 1, 0], [1, -2, 1], [0, 1, -1.0]])
    cross = np.array([[p * p, 2 * p * q, q * q], [2 * p * q, (p - q) ** 2, 2 * p * q], [q * q, 2 * p * q, p * p]])
    r = expm(w * theta / 4)
    return r @ cross @ r @ np.asarray(start, dtype=float)


@given(st.floats(0, 2), st.floats(0, 15))
def test_populations_match_independent_model(gamma, theta):
    for init, start in [(Initial.PLUS_PLUS, [1, 0, 0]), (Initial.PSI_PLUS, [0, 1, 0]), (Initial.MINUS_MINUS, [0, 0, 1])]:
        got = noisy_lz_populations(LZParams(gamma, theta), init).as_tuple()
        assert np.abs(np.array(got) - _sandwich(gamma, theta, start)).max() < 1e-12


def test_population_grid_normalisation():
    g, th = np.meshgrid(np.linspace(0, 2, 100), np.linspace(0, 20, 100))
    for init in Initial:
        pops = np.array(populations_grid(g, th, init))
        assert pops.min() >= -1e-15 and pops.max() <= 1 + 1e-15
        assert np.abs(pops.sum(axis=0) - 1).max() < 1e-12


def test_examples():
    assert lz_probability(0.0) == 0.0
    assert lz_probability(50.0) == pytest.approx(1.0)
    assert lz_probability(0.3) == pytest.approx(1 - math.exp(-0.6 * math.pi), abs=1e-15)
    assert lz_probability(0.3) == pytest.approx(0.848, abs=2e-4)
    assert joint_lz_probability(0.5, 0.5, 0.0) == 0.0
    # exponent 2 (j1 + j2) = 3 for the (1, 1/2) pair
    assert joint_lz_probability(1, 0.5, 0.2) == pytest.approx((1 - math.exp(-0.4 * math.pi)) ** 3)
    assert noisy_lz_populations(LZParams(0, 0)).as_tuple() == pytest.approx((1, 0, 0), abs=1e-15)
    p = noisy_lz_populations(LZParams(1, 6))
    assert all(0.30 <= x <= 0.37 for x in p.as_tuple())
    assert p.p_pm == p.p_mp == p.p_psi_plus / 2
    far = noisy_lz_populations(LZParams(0.4, 60))
    assert far.as_tuple() == pytest.approx((1 / 3,) * 3, abs=1e-12)


@given(st.floats(0, 3))
def test_theta_zero_reduces_to_joint_lz(gamma):
    assert noisy_lz_populations(LZParams(gamma, 0)).p_mm == pytest.approx(
        joint_lz_probability(0.5, 0.5, gamma), abs=1e-15)


@given(st.floats(0, 3), st.floats(0, 20))
def test_psi_plus_symmetry_and_jz(gamma, theta):
    ps = noisy_lz_populations(LZParams(gamma, theta), Initial.PSI_PLUS)
    assert ps.p_pp == ps.p_mm
    pp = noisy_lz_populations(LZParams(gamma, theta))
    assert asymptotic_jz(LZParams(gamma, theta)) == pytest.approx(pp.p_pp - pp.p_mm, abs=1e-12)
    if gamma < 2:
        ratio = asymptotic_jz(LZParams(gamma, theta)) / asymptotic_jz(LZParams(gamma, 0))
        if abs(2 * math.exp(-2 * math.pi * gamma) - 1) > 1e-6:
            assert ratio == pytest.approx(math.exp(-theta / 2), rel=1e-9)


def test_asymptotic_jz_examples():
    assert asymptotic_jz(LZParams(0, 0)) == 1.0
    assert asymptotic_jz(LZParams(0.3, 80)) == pytest.approx(0, abs=1e-15)
    assert asymptotic_jz(LZParams(0.2, 2)) == pytest.approx(math.exp(-1) * (2 * math.exp(-0.4 * math.pi) - 1))


def test_regime_thresholds_closed_form():
    assert GAMMA_LOW == pytest.approx(math.log((3 + math.sqrt(3)) / 2) / (2 * math.pi))
    assert GAMMA_HIGH == pytest.approx(math.log(3) / (2 * math.pi))
    assert gamma_regime(0.05) is Regime.NOISE_FAVORS
    assert gamma_regime(0.15) is Regime.NON_MONOTONE
    assert gamma_regime(1.0) is Regime.NOISE_HINDERS
    assert gamma_regime(GAMMA_LOW) is Regime.NOISE_FAVORS
    assert gamma_regime(GAMMA_HIGH) is Regime.NOISE_HINDERS


def test_regime_boundaries_from_the_formula():
    theta = np.arange(0, 10.0001, 0.01)
    for g, sign in [(GAMMA_LOW - 1e-4, 1), (0.12, 1), (0.18, -1), (GAMMA_HIGH + 1e-4, -1)]:
        p = populations_grid(g, theta)[2]
        assert np.all(sign * (p - p[0]) >= -1e-15)
    p = populations_grid(0.15, theta)[2]
    assert (p - p[0]).max() > 0 and (p - p[0]).min() < 0
    # the initial slope changes sign exactly at the upper threshold
    h = 1e-6
    for g, sign in [(GAMMA_HIGH - 1e-3, 1), (GAMMA_HIGH + 1e-3, -1)]:
        slope = (populations_grid(g, h)[2] - populations_grid(g, 0.0)[2]) / h
        assert sign * slope > 0
    # the late-time value 1/3 crosses the noiseless one exactly at the lower threshold
    for g, sign in [(GAMMA_LOW - 1e-3, 1), (GAMMA_LOW + 1e-3, -1)]:
        assert sign * (populations_grid(g, 50.0)[2] - populations_grid(g, 0.0)[2]) > 0


def test_joint_inversion_probability(rng):
    assert joint_inversion_probability(0.5, 0.5, 1.0) == 1.0
    u = random_su2(rng)
    pair = SpinPair(HalfInt(2), HalfInt(2), 0.8)
    m = assemble_pair_propagator(pair, 1.1, u).matrix
    assert joint_inversion_probability(1, 1, u.b) == pytest.approx(abs(m[-1, 0]) ** 2, abs=1e-12)
    hh = assemble_pair_propagator(SpinPair(HalfInt(1), HalfInt(1), 0.3), 2.0, u).matrix
    assert joint_inversion_probability(0.5, 0.5, u.b) == pytest.approx(abs(hh[3, 0]) ** 2, abs=1e-14)
    with pytest.raises(SpinDomainError):
        joint_inversion_probability(0.5, 0.5, 1.5)


CASES = [(HalfInt(1), HalfInt(1)), (HalfInt(2), HalfInt(1)), (HalfInt(2), HalfInt(2))]


@given(su2_props(), st.floats(-3, 3), st.floats(0, 10), st.sampled_from(CASES))
def test_spin_projection_closed_forms(u, lam, t, case):
    pair = SpinPair(case[0], case[1], lam)
    psi0 = product_state(pair, pair.j1, pair.j2 - 1)
    psi = PairState(pair, assemble_pair_propagator(pair, t, u).matrix @ psi0.data)
    assert j1z_expectation(case, u, lam, t) == pytest.approx(expectation(psi, "j1z"), abs=1e-10)
    assert jz_expectation(case, u) == pytest.approx(expectation(psi, "Jz"), abs=1e-10)


def test_spin_projection_examples(rng):
    u = random_su2(rng)
    d = abs(u.a) ** 2 - abs(u.b) ** 2
    h, one = HalfInt(1), HalfInt(2)
    assert j1z_expectation((h, h), u, 0.0, 3.0) == pytest.approx(d / 2)
    from spinpair.su2 import SU2Propagator

    ident = SU2Propagator.identity()
    assert j1z_expectation((one, h), ident, 0.6, 1.7) == pytest.approx((5 + 4 * math.cos(1.5 * 0.6 * 1.7)) / 9)
    assert jz_expectation((h, h), u) == 0.0
    assert jz_expectation((one, one), ident) == 1.0
    with pytest.raises(SpinDomainError):
        jz_expectation((HalfInt(3), h), u)
