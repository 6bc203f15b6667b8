"""Shared fixtures and hypothesis strategies."""
import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from toa.states import GaussianSpec, PhysicalConstants, build_state

settings.register_profile(
    "toa", deadline=None, derandomize=True, print_blob=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("toa")


@st.composite
def gaussian_specs(draw, sign=None, x0_range=(3.0, 12.0)):
    """One packet with |p0| in [2, 6], sigma_p in [0.15, 0.3] and |p0|/sigma_p >= 10.

    The offset x0 is placed on the side the packet travels from, so it
    arrives at x = 0 at a positive time.
    """
    sigma = draw(st.floats(0.15, 0.3))
    mag = draw(st.floats(max(2.0, 10 * sigma), 6.0))
    s = sign if sign is not None else draw(st.sampled_from([1, -1]))
    dist = draw(st.floats(*x0_range))
    return GaussianSpec(s * mag, sigma, -s * dist)


@st.composite
def superpositions(draw, sign=None, max_packets=3):
    n = draw(st.integers(1, max_packets))
    specs = []
    for _ in range(n):
        spec = draw(gaussian_specs(sign=sign))
        phase = draw(st.floats(0, 2 * np.pi))
        amp = draw(st.floats(0.3, 1.0))
        specs.append(GaussianSpec(spec.p0, spec.sigma_p, spec.x0, amp * np.exp(1j * phase)))
    return specs


@pytest.fixture(scope="session")
def reference_state():
    """The classical-limit packet: p0 = 5, sigma_p = 0.2, x0 = -10, hbar = m = 1."""
    return build_state([GaussianSpec(5.0, 0.2, -10.0)], PhysicalConstants(), pmax=10.0)


@pytest.fixture(scope="session")
def two_channel_state():
    """Equal right- and left-movers starting from the same side, x0 = -10."""
    return build_state([GaussianSpec(5.0, 0.2, -10.0), GaussianSpec(-5.0, 0.2, -10.0)],
                       PhysicalConstants(), pmax=10.0)


#: (number, line) per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
