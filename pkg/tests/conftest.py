import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sktdlvt import RadarParams, plan_segments  # noqa: E402


@pytest.fixture(scope="session")
def radar():
    """Simulation table radar with a narrow swath."""
    return RadarParams(num_range_cells=64)


@pytest.fixture(scope="session")
def plan(radar):
    return plan_segments(radar, 61.33, 256)


@pytest.fixture(scope="session")
def small_radar():
    """Shorter aperture for fast end-to-end tests."""
    return RadarParams(num_pulses=1024, num_range_cells=64)


@pytest.fixture(scope="session")
def small_plan(small_radar):
    return plan_segments(small_radar, 61.33, 64)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
