from pathlib import Path

import numpy as np
import pytest

from imufill import Capture, SensorKind, read_capture

DATA = Path(__file__).parent / "data"
T0 = 1500000000000


def grid_capture(n, sensor=SensorKind.ACCELEROMETER, values=None, t0=T0, **kwargs):
    """``n`` observed rows on the exact nominal grid."""
    ts = t0 + sensor.nominal_period_ms * np.arange(n)
    if values is None:
        values = np.column_stack([np.sin(ts / 100.0), np.cos(ts / 70.0), 9.81 + 0.1 * np.arange(n) % 3])
    return Capture.observed(ts, values, sensor=sensor, **kwargs)


@pytest.fixture
def downstairs():
    return read_capture(DATA / "downstairs_450.tsv", "accelerometer", "moving_downstairs")


@pytest.fixture
def sinusoid():
    return read_capture(DATA / "sinusoid_500.csv", "accelerometer", "walking")


@pytest.fixture
def constant():
    return read_capture(DATA / "constant_500.csv", "accelerometer", "standing")


_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and (report.when == "call" or report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        if report.when == "call" or name not in _ACCEPTANCE:
            _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_ACCEPTANCE.items()):
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome.upper())
        terminalreporter.write_line(f"{label}  {name}")
