import pytest

from rqtladder.model import MeasurementPoint, ParameterSpace
from rqtladder.synth import generate_corpus

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = mark.args
    status = "PASS" if rep.passed else "FAIL"
    prev = _criteria.get(number)
    if prev is None or prev[1] == "PASS":
        _criteria[number] = (title, status)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")


def point(resolution=1080, qp=30, bitrate=1000.0, decode_time=1.0, seq="s", **scores):
    scores.setdefault("xpsnr", 40.0)
    return MeasurementPoint(seq, resolution, qp, bitrate, decode_time, **scores)


def space_of(*points, seq="s"):
    return ParameterSpace(seq, tuple(points))


@pytest.fixture(scope="session")
def corpus():
    return generate_corpus(100, seed=0)


@pytest.fixture(scope="session")
def small_corpus():
    return generate_corpus(10, seed=100)
