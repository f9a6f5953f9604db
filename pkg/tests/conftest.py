import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mlproc import corpus  # noqa: E402
from mlproc.semantics import compile_source  # noqa: E402

TESTS = Path(__file__).parent


@pytest.fixture(scope="session")
def tdsp_source() -> str:
    return corpus.read()


@pytest.fixture(scope="session")
def tdsp_model(tdsp_source):
    result = compile_source(tdsp_source)
    assert result.ok, [d.render() for d in result.diagnostics]
    return result.model


_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    item_marks = getattr(report, "criterion", None)
    if item_marks is None:
        return
    number, title = item_marks
    failed = report.failed or (report.when == "call" and not report.passed)
    previous = _criteria.get(number, (title, "PASS"))[1]
    _criteria[number] = (title, "FAIL" if failed or previous == "FAIL" else "PASS")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = tuple(mark.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, verdict = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")
