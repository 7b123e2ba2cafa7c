import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from spinpair.su2 import SU2Propagator

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_su2(rng) -> SU2Propagator:
    v = rng.normal(size=4)
    v /= np.linalg.norm(v)
    return SU2Propagator(v[0] + 1j * v[1], v[2] + 1j * v[3])


@st.composite
def su2_props(draw):
    comps = [draw(st.floats(-1, 1, allow_nan=False)) for _ in range(4)]
    v = np.array(comps)
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.array([1.0, 0, 0, 0]), 1.0
    v = v / n
    return SU2Propagator(v[0] + 1j * v[1], v[2] + 1j * v[3])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance verdicts, keyed by criterion number; printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=str):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
