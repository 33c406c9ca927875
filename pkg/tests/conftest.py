import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qmm.qubit import BlochAngles

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = dict(allow_nan=False, allow_infinity=False)

thetas = st.floats(min_value=0.0, max_value=np.pi, **finite)
interior_thetas = st.floats(min_value=0.05, max_value=np.pi - 0.05, **finite)
phis = st.floats(min_value=-4 * np.pi, max_value=4 * np.pi, **finite)
couplings = st.floats(min_value=-10.0, max_value=10.0, **finite)


@st.composite
def bloch_angles(draw, interior=False):
    th = draw(interior_thetas if interior else thetas)
    return BlochAngles(th, draw(phis))


@st.composite
def unit_vectors(draw):
    v = np.array(draw(st.lists(st.floats(min_value=-1, max_value=1, **finite), min_size=3, max_size=3)))
    if np.linalg.norm(v) < 1e-3:
        v = np.array([0.0, 0.0, 1.0])
    return v / np.linalg.norm(v)


def random_unit_vectors(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
