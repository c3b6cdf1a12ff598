import numpy as np
import pytest
from hypothesis import settings

from r22sdf.config import FFTConfig

_ACCEPTANCE = []

# first calls into numba kernels compile; keep hypothesis from timing that
settings.register_profile("r22sdf", deadline=None)
settings.load_profile("r22sdf")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def default_config():
    return FFTConfig()


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion."""

    def record(label, passed, detail=""):
        _ACCEPTANCE.append((label, bool(passed), detail))
        assert passed, f"{label}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  {detail}")
