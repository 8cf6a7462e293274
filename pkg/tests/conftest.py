import pytest
from hypothesis import HealthCheck, settings

from lteval.core import Box, FramePrediction, FrameTruth, SequenceTruth, TrackerRun

settings.register_profile(
    "repro", derandomize=True, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repro")

_ACCEPTANCE_LINES: list[str] = []

GT_BOX = Box(0, 0, 10, 10)
FAR_BOX = Box(50, 50, 10, 10)


def five_frame_fixture():
    """Initialization frame plus five scored frames.

    Target visible on scored frames 1-3 and absent on 4-5; a prediction on
    every frame with confidences 0.9..0.5 and overlaps 1, 0.5, 0.5, 0, 0.
    """
    truth = SequenceTruth(
        "fixture",
        [FrameTruth(GT_BOX)] * 4 + [FrameTruth(None)] * 2,
    )
    run = TrackerRun(
        "fixture",
        [
            FramePrediction(GT_BOX, 1.0),
            FramePrediction(GT_BOX, 0.9),
            FramePrediction(Box(0, 0, 20, 10), 0.8),
            FramePrediction(Box(0, 0, 10, 5), 0.7),
            FramePrediction(FAR_BOX, 0.6),
            FramePrediction(FAR_BOX, 0.5),
        ],
    )
    return truth, run


@pytest.fixture
def fixture5():
    return five_frame_fixture()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        status = "PASS" if report.passed else "FAIL"
        _ACCEPTANCE_LINES.append(f"[{status}] {marker.args[0]}")


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
