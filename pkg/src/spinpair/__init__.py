"""Two exchange-coupled spins in time-dependent and noisy magnetic fields.

The two-spin propagator is assembled from the solution of a single spin-1/2
problem, lifted to every total-spin block of the pair.
"""

from .analytics import (
    Initial,
    LZParams,
    Regime,
    TripletPopulations,
    asymptotic_jz,
    gamma_regime,
    j1z_expectation,
    joint_inversion_probability,
    joint_lz_probability,
    jz_expectation,
    lz_probability,
    noisy_lz_populations,
)
from .coupling import Basis, PairPropagator, SpinPair, assemble_pair_propagator, cg_coefficient, cg_matrix, k_prime
from .fields import Constant, LandauZener, Rabi, Tabulated, rabi_resonance_ab, sample
from .integrator import IntegrationConfig, IntegrationError, MagnusStepper, solve_full, solve_su2
from .noise import EnsembleConfig, EnsembleError, EnsembleResult, NoiseModel, run_ensemble, sample_noise_path
from .observables import (
    PairState,
    expectation,
    is_ife_state,
    reduced_density,
    spin_operators,
    transition_probability,
)
from .pipeline import SeriesOutput, oracle_check, simulate
from .scenario import Scenario, emit_scenario, load_scenario, parse_scenario
from .su2 import HalfInt, PropagatorBlock, SpinDomainError, SU2Propagator, propagator_block, wigner_coeff

__version__ = "0.1.0"

__all__ = [
    "Basis",
    "Constant",
    "EnsembleConfig",
    "EnsembleError",
    "EnsembleResult",
    "HalfInt",
    "Initial",
    "IntegrationConfig",
    "IntegrationError",
    "LZParams",
    "LandauZener",
    "MagnusStepper",
    "NoiseModel",
    "PairPropagator",
    "PairState",
    "PropagatorBlock",
    "Rabi",
    "Regime",
    "SU2Propagator",
    "Scenario",
    "SeriesOutput",
    "SpinDomainError",
    "SpinPair",
    "Tabulated",
    "TripletPopulations",
    "assemble_pair_propagator",
    "asymptotic_jz",
    "cg_coefficient",
    "cg_matrix",
    "emit_scenario",
    "expectation",
    "gamma_regime",
    "is_ife_state",
    "j1z_expectation",
    "joint_inversion_probability",
    "joint_lz_probability",
    "jz_expectation",
    "k_prime",
    "load_scenario",
    "lz_probability",
    "noisy_lz_populations",
    "oracle_check",
    "parse_scenario",
    "propagator_block",
    "rabi_resonance_ab",
    "reduced_density",
    "run_ensemble",
    "sample",
    "sample_noise_path",
    "simulate",
    "solve_full",
    "solve_su2",
    "spin_operators",
    "transition_probability",
    "wigner_coeff",
]
