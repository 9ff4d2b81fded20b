"""Collect acceptance outcomes and print one line per criterion at the end."""

import pytest

_outcomes: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(number, title): one acceptance criterion, summarized at the end"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    number, title = marker.args
    entry = _outcomes.setdefault(number, {"title": title, "passed": True, "seen": False})
    if report.when == "call" or report.failed:
        entry["seen"] = True
        if report.failed:
            entry["passed"] = False
        detail = getattr(item, "acceptance_detail", None)
        if detail:
            entry["detail"] = detail


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        e = _outcomes[number]
        status = "PASS" if e["passed"] and e["seen"] else "FAIL"
        line = f"criterion {number}: {status}  {e['title']}"
        if e.get("detail"):
            line += f"  [{e['detail']}]"
        terminalreporter.write_line(line)


@pytest.fixture
def detail(request):
    """Attach a short measurement string to the criterion's summary line."""

    def record(text: str):
        request.node.acceptance_detail = text

    return record
