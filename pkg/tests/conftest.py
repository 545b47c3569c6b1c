import pytest

ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the summary block."""
    key = request.node.get_closest_marker("criterion").args
    ACCEPTANCE[key[0]] = (key[1], "FAIL", "")

    def note(detail: str):
        ACCEPTANCE[key[0]] = (key[1], ACCEPTANCE[key[0]][1], detail)

    yield note


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when != "call":
        return
    num, title = marker.args
    detail = ACCEPTANCE.get(num, (title, "", ""))[2]
    ACCEPTANCE[num] = (title, "PASS" if rep.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, status, detail = ACCEPTANCE[num]
        line = f"[{status}] {num:2d}. {title}"
        terminalreporter.write_line(line + (f" -- {detail}" if detail else ""))
