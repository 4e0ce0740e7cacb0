"""Print one PASS/FAIL line per acceptance criterion after the run."""
import pytest

_results = {}
_details = {}


def pytest_runtest_logreport(report):
    marks = getattr(report, "criterion", None)
    if marks is None:
        return
    if report.when == "call" or report.failed or report.skipped:
        prev = _results.get(marks)
        if prev != "FAIL":
            _results[marks] = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        outcome.get_result().criterion = (mark.args[0], mark.args[1])


@pytest.fixture
def detail(request):
    """Attach a short result summary to the criterion being tested."""
    mark = request.node.get_closest_marker("criterion")

    def note(text):
        _details.setdefault(mark.args[0], []).append(str(text))

    return note


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), status in sorted(_results.items()):
        extra = "; ".join(_details.get(number, []))
        line = f"criterion {number:>2} [{status}] {title}"
        terminalreporter.write_line(line + (f" :: {extra}" if extra else ""))
