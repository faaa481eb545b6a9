import pytest

from qcprivacy import acceptance

_RESULTS = {}


@pytest.fixture(scope="session")
def acceptance_run():
    """Every acceptance criterion, computed once per session."""
    if not _RESULTS:
        out = acceptance.run("all")
        _RESULTS.update({r.number: r for r in out["results"]})
        _RESULTS["informational"] = out["informational"]
    return _RESULTS


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(k for k in _RESULTS if isinstance(k, int)):
        terminalreporter.write_line(acceptance.summary_line(_RESULTS[number]))
