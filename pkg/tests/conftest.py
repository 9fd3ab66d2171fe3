import pytest

_ACCEPTANCE: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    number, title = marker.args
    detail = "; ".join(v for k, v in item.user_properties if k == "detail")
    _ACCEPTANCE[str(number)] = {"title": title, "passed": rep.passed, "detail": detail}


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        r = _ACCEPTANCE[number]
        status = "PASS" if r["passed"] else "FAIL"
        line = f"[{status}] {number} {r['title']}"
        if r["detail"]:
            line += f"  ({r['detail']})"
        terminalreporter.write_line(line)
