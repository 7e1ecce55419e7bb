import json
import re

import pytest

_REPORT_NAME = "conformance_report.json"


def _criterion(nodeid):
    m = re.search(r"::test_(ac\d+)", nodeid)
    return m.group(1).upper() if m else None


def pytest_configure(config):
    config._acceptance = {}


def pytest_report_teststatus(report, config):
    crit = _criterion(report.nodeid)
    if crit is None or "test_acceptance.py" not in report.nodeid:
        return None
    if report.when == "call" or report.failed:
        summary = dict(report.user_properties).get("summary", "")
        config._acceptance[crit] = ("PASS" if report.passed else "FAIL", summary)
    return None


def pytest_terminal_summary(terminalreporter, config):
    results = config._acceptance
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(results, key=lambda c: int(c[2:])):
        status, summary = results[crit]
        terminalreporter.write_line(f"{crit} {status}  {summary}".rstrip())


@pytest.fixture(scope="session")
def conformance(request):
    """Session-wide dict of acceptance measurements, written out as JSON at the end."""
    data = {}
    yield data
    if data:
        path = request.config.rootpath / _REPORT_NAME
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
