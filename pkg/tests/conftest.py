import numpy as np
import pytest
from hypothesis import settings

from specfree import simcore

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def hubbard_1x2():
    lat = simcore.Lattice(1, 2, spinful=True)
    return lat, simcore.build_fermi_hubbard(lat, simcore.FermiHubbardParams(1.0, 4.0))


@pytest.fixture(scope="session")
def hubbard_2x2():
    lat = simcore.Lattice(2, 2, spinful=True)
    return lat, simcore.build_fermi_hubbard(lat, simcore.FermiHubbardParams(1.0, 4.0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
