"""Solver test configuration."""

import pytest

from libwavelets.const import PROBLEM_INDICATOR_DESK
from libwavelets.solvers.problems import HelmholtzProblem

from . import MANUFACTURED


@pytest.fixture(scope="session")
def desk_problem() -> HelmholtzProblem:
    """Return the indicator source at k = 100."""
    return HelmholtzProblem.from_file(PROBLEM_INDICATOR_DESK)


@pytest.fixture(scope="session")
def manufactured() -> HelmholtzProblem:
    """Return k = 10 with u = x sin(10 x)."""
    return HelmholtzProblem.from_raw(MANUFACTURED)
