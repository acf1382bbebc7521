import numpy as np
import pytest

from rmoqpso.control import StateSpaceModel


def random_controllable(rng, n_max=6, m_max=3):
    """Random (A, B) with entries in [-2, 2], redrawn until controllable."""
    while True:
        n = int(rng.integers(1, n_max + 1))
        m = int(rng.integers(1, m_max + 1))
        model = StateSpaceModel(rng.uniform(-2, 2, (n, n)), rng.uniform(-2, 2, (n, m)))
        if model.is_controllable():
            return model


@pytest.fixture
def double_integrator():
    return StateSpaceModel([[0.0, 1.0], [0.0, 0.0]], [[0.0], [1.0]])


# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES = []


def report(criterion: int, ok: bool, detail: str) -> bool:
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
