"""Data behind the five figures, one :class:`SeriesOutput` per figure.

* fig1: joint inversion probability ``|b|^(4(j1+j2))`` under a resonant
  rotating field for (1/2,1/2), (1,1/2) and (1,1), against ``tau = lambda_R t``
  with ``lambda_R = omega_perp / 2`` so that ``|b|^2 = sin^2 tau``;
* fig2: ``P(|++> -> |-->)`` at ``t = inf`` versus ``Gamma`` for several ``theta``;
* fig3, fig4: the same versus ``theta`` for several ``Gamma`` (fig4 adds the
  constant 1/3 line);
* fig5: ``<Jz(inf)>`` versus ``Gamma`` for several ``theta``.
"""

from __future__ import annotations

import math

import numpy as np

from .analytics import populations_grid
from .fields import rabi_resonance_ab
from .pipeline import SeriesOutput

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5")

FIG1_PAIRS = ((0.5, 0.5), (1.0, 0.5), (1.0, 1.0))
FIG2_THETAS = (0.0, 0.5, 1.0, 2.0, 5.0)
FIG3_GAMMAS = (1.0, 0.5, 0.3, 0.2, 0.1, 0.05, 0.0)
FIG4_GAMMAS = (0.16, 0.15, 0.14)
FIG5_THETAS = (0.0, 1.0, 3.0, 7.0)

GAMMA_AXIS = np.linspace(0.0, 1.0, 1001)
THETA_AXIS = np.linspace(0.0, 10.0, 1001)
TAU_AXIS = np.linspace(0.0, 2 * math.pi, 721)

LAMBDA_R_NOTE = "tau = lambda_R t with lambda_R = omega_perp/2 (half the Rabi frequency), so |b|^2 = sin^2(tau)"


def _label(prefix: str, x: float) -> str:
    return f"{prefix}={x:g}"


def fig1(tau=TAU_AXIS, omega_perp: float = 2.0) -> SeriesOutput:
    tau = np.asarray(tau, dtype=float)
    t = tau / (omega_perp / 2)
    b2 = np.array([abs(rabi_resonance_ab(omega_perp, x).b) ** 2 for x in t])
    cols = [b2 ** (2 * (j1 + j2)) for j1, j2 in FIG1_PAIRS]
    header = ("tau",) + tuple(f"P_j1={j1:g}_j2={j2:g}" for j1, j2 in FIG1_PAIRS)
    return SeriesOutput(header, np.column_stack([tau, *cols]), (LAMBDA_R_NOTE,))


def _p_flip(gamma, theta):
    return populations_grid(gamma, theta)[2]


def fig2() -> SeriesOutput:
    cols = [_p_flip(GAMMA_AXIS, th) for th in FIG2_THETAS]
    header = ("gamma",) + tuple(_label("theta", th) for th in FIG2_THETAS)
    return SeriesOutput(header, np.column_stack([GAMMA_AXIS, *cols]))


def fig3() -> SeriesOutput:
    cols = [_p_flip(g, THETA_AXIS) for g in FIG3_GAMMAS]
    header = ("theta",) + tuple(_label("gamma", g) for g in FIG3_GAMMAS)
    return SeriesOutput(header, np.column_stack([THETA_AXIS, *cols]))


def fig4() -> SeriesOutput:
    cols = [_p_flip(g, THETA_AXIS) for g in FIG4_GAMMAS]
    header = ("theta",) + tuple(_label("gamma", g) for g in FIG4_GAMMAS) + ("one_third",)
    return SeriesOutput(header, np.column_stack([THETA_AXIS, *cols, np.full_like(THETA_AXIS, 1 / 3)]))


def fig5() -> SeriesOutput:
    p = np.exp(-2 * np.pi * GAMMA_AXIS)
    cols = [np.exp(-th / 2) * (2 * p - 1) for th in FIG5_THETAS]
    header = ("gamma",) + tuple(_label("theta", th) for th in FIG5_THETAS)
    return SeriesOutput(header, np.column_stack([GAMMA_AXIS, *cols]))


def figure(name: str) -> SeriesOutput:
    builders = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5}
    try:
        return builders[name]()
    except KeyError:
        raise ValueError(f"unknown figure {name!r}; known: {', '.join(FIGURES)}") from None
