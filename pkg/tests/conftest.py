import math

import pytest
from hypothesis import HealthCheck, settings

from weakduality.core import PhysConfig

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def cfg():
    return PhysConfig()


@pytest.fixture(scope="session")
def skewed_cfg():
    """Non-unit constants, to catch places that silently assume m = hbar = T = x_i = 1."""
    return PhysConfig(m=1.7, hbar=0.6, T=2.3, x_i=0.8)


def zero_xf(n=0, cfg=PhysConfig()):
    return (math.pi / 2 + n * math.pi) / cfg.phase_scale


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def record():
    def _record(number: int, passed: bool, detail: str):
        ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(ACCEPTANCE_LINES[number])
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
    passed = sum(" PASS " in line for line in ACCEPTANCE_LINES.values())
    terminalreporter.write_line(f"{passed}/{len(ACCEPTANCE_LINES)} criteria passed")
