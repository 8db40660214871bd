"""Collects acceptance-criterion outcomes and prints one line per criterion."""
from collections import defaultdict

import pytest

_outcomes = defaultdict(list)
_titles = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion check")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    _titles[number] = title
    details = [v for k, v in item.user_properties if k == "detail"]
    _outcomes[number].append((item.name, report.passed, details))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        checks = _outcomes[number]
        ok = all(passed for _, passed, _ in checks)
        failed = [name for name, passed, _ in checks if not passed]
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {_titles[number]}"
        if failed:
            line += f"  [failed: {', '.join(failed)}]"
        terminalreporter.write_line(line)
        for name, _, details in checks:
            for d in details:
                terminalreporter.write_line(f"    {name}: {d}")
