import numpy as np
import pytest

from lcurve.model import PowerLawParams, evaluate
from lcurve.observations import ObservationSet
from lcurve.synth import DEFAULT_SCHEDULE

SIZES = (25, 50, 100, 200, 400)


def noiseless(params, schedule=DEFAULT_SCHEDULE):
    """Observations lying exactly on the curve, F_i copies per size."""
    return ObservationSet.from_mapping({n: [evaluate(params, n)] * f for n, f in schedule})


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def std_curve():
    return PowerLawParams(8.0, 150.0, -0.5)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line[1])
