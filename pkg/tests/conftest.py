from functools import lru_cache

import numpy as np
import pytest

from hpkahler.profile import p_alpha, solve_profile

ACCEPTANCE_LINES = []


@lru_cache(maxsize=None)
def solution(alpha: float):
    return solve_profile(p_alpha(alpha))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
