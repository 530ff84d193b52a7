import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from hallmhd.spectral_basis import TorusDomain, enumerate_modes

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def dom16():
    return TorusDomain(2 * np.pi, 16)


@pytest.fixture(scope="session")
def basis1(dom16):
    return enumerate_modes(dom16, 1)


@pytest.fixture(scope="session")
def basis2(dom16):
    return enumerate_modes(dom16, 2)


@pytest.fixture
def out_root(tmp_path, monkeypatch):
    root = tmp_path / "runs"
    monkeypatch.setenv("HMHD_OUTPUT_ROOT", str(root))
    return root


_criteria = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record one pass/fail line per acceptance criterion; echoed in the terminal summary."""
    lines = request.config.stash.setdefault(_criteria, [])

    def emit(label, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}"
        lines.append(line)
        print(line)
        return passed

    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_criteria, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split()[0].rstrip(":"))):
            terminalreporter.write_line(line)
