import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile("default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)

_ACCEPTANCE = pytest.StashKey[dict]()
N_CRITERIA = 12


@pytest.fixture
def rng(request):
    """Generator seeded from the test name, so every test is reproducible in isolation."""
    return np.random.default_rng(_stable_seed(request.node.name))


def _stable_seed(name: str) -> int:
    return sum((i + 1) * ord(c) for i, c in enumerate(name)) % 2**32


@pytest.fixture
def criterion(request):
    """``criterion(number, title, ok, detail)`` records a pass/fail line and asserts ``ok``."""
    log = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number: int, title: str, ok: bool, detail: str) -> None:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
        log[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = config.stash.get(_ACCEPTANCE, None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        terminalreporter.write_line(log.get(n, f"criterion {n:2d} FAIL  (no result recorded)"))
