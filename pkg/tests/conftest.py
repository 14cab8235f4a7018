import math
import warnings

import numpy as np
import pytest

from ncsoliton.algebra import AlgebraElement, LatticeSpec, Side, TruncationWarning

THETA = math.sqrt(2) - 1


@pytest.fixture
def theta():
    return THETA


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_element(rng, lattice, radius, decay=0.6):
    """Random coefficients with geometric decay so products stay well conditioned."""
    k = np.arange(-radius, radius + 1)
    mm, nn = np.meshgrid(k, k, indexing="ij")
    scale = decay ** (np.abs(mm) + np.abs(nn))
    c = (rng.normal(size=mm.shape) + 1j * rng.normal(size=mm.shape)) * scale
    return AlgebraElement(lattice, c)


@pytest.fixture
def lat_a():
    return LatticeSpec(THETA, Side.PRIMAL)


@pytest.fixture
def lat_b():
    return LatticeSpec(THETA, Side.DUAL)


@pytest.fixture(autouse=True)
def _quiet_truncation():
    # truncation is accounted for in tail_norm; the warnings are noise in tests
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        yield


# one line per acceptance criterion, echoed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
