import functools
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from basinforge import ScanConfig, scan_grid, unity_polynomial, unity_roots  # noqa: E402

ACCEPTANCE_LINES: list[str] = []
SCAN_SECONDS: dict[tuple[str, int], float] = {}


@functools.lru_cache(maxsize=None)
def full_scan(scheme_name: str, degree: int):
    """Default-configuration 1024x1024 scan, computed once per session."""
    t0 = time.perf_counter()
    g = scan_grid(scheme_name, unity_polynomial(degree), unity_roots(degree), ScanConfig())
    SCAN_SECONDS[(scheme_name, degree)] = time.perf_counter() - t0
    return g


@pytest.fixture
def scan():
    return full_scan


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
