import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ltirelay.spectra import ChannelTriple, QuadratureGrid

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

# Fixed-channel instance used for frequency-domain traces.
FIXED_TAPS = (
    [1.8833, 0.3254, -0.0952, 0.0312, -0.6138],
    [-0.0728, 1.3148, 0.9783, 1.7221, -0.4123],
    [-0.8864, -1.8402, -1.6282, -1.1738, -0.4154],
)


@pytest.fixture(scope="session")
def grid():
    return QuadratureGrid.gauss_legendre(512)


@pytest.fixture(scope="session")
def fixed_channels():
    return ChannelTriple.from_taps(*FIXED_TAPS)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
