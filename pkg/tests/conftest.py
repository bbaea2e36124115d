import numpy as np
import pytest
from hypothesis import settings

from wsladder.model import LatticeSpec, PulseSchedule
from wsladder.sweep import run_sweep

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

FIG3_SPEC = LatticeSpec(10, 10.0)
FIG3_GAMMAS = np.linspace(1.0, 80.0, 200)
FIG_DT = 1e-3

# lines collected by test_acceptance and echoed at the end of the run
CRITERIA_REPORT: list[str] = []


@pytest.fixture(scope="session")
def fig3_sweep():
    return run_sweep(FIG3_SPEC, PulseSchedule.sigmoid(1.0, 1.0), FIG3_GAMMAS, dt=FIG_DT)


@pytest.fixture(scope="session")
def fig4_sweep():
    return run_sweep(FIG3_SPEC, PulseSchedule.truncated(1.0, 1.0, 7.0), FIG3_GAMMAS, dt=FIG_DT)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_REPORT:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_REPORT:
            terminalreporter.write_line(line)
