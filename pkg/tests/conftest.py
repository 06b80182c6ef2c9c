import warnings

import numpy as np
import pytest

from cavext.oracle import CutoffWarning, build_state, cat_cutoff
from cavext.phase_space import GridSpec
from cavext.states import Cat, Fock

ACCEPTANCE_LINES = []


def oracle_state(spec):
    cutoff = spec.n + 1 if isinstance(spec, Fock) else cat_cutoff(spec.alpha0)
    return build_state(spec, cutoff)


@pytest.fixture
def small_grid():
    return GridSpec.square(4.0, 41)


@pytest.fixture
def no_cutoff_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CutoffWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
