"""Shared fixtures plus a terminal summary of acceptance-criterion results."""

import numpy as np
import pytest

import stackgame as sg

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    line = f"[{status}] criterion {number}: {title}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.ensure_newline()
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def uniform_noise():
    return sg.uniform(1.0)


@pytest.fixture(scope="session")
def uniform_ctx(uniform_noise):
    return sg.KernelContext(2.0, uniform_noise)


@pytest.fixture(scope="session")
def uniform_env(uniform_ctx):
    return sg.build_envelope(uniform_ctx)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
