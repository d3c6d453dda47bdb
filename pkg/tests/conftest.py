import numpy as np
import pytest

from stlpi2 import scenarios


@pytest.fixture(scope="session")
def nav_problem():
    return scenarios.build(scenarios.builtin("nav-simple"))


@pytest.fixture(scope="session")
def consensus_problem():
    return scenarios.build(scenarios.builtin("consensus-complex"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE = []


@pytest.fixture
def criterion():
    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE.append(line)
        print(line, flush=True)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
