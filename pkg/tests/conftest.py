import pytest

_RESULTS: dict[str, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion reported in the summary")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    outcome = "PASS" if report.passed else "FAIL"
    _RESULTS[props["criterion"]] = (outcome, props.get("title", ""), props.get("measured", ""))


@pytest.fixture(autouse=True)
def _criterion_tag(request):
    mark = request.node.get_closest_marker("criterion")
    if mark is not None:
        request.node.user_properties.append(("criterion", mark.args[0]))
        request.node.user_properties.append(("title", mark.args[1]))


@pytest.fixture
def measured(request):
    """Attach a measured-value string to the acceptance summary line."""

    def put(text: str) -> None:
        request.node.user_properties.append(("measured", text))

    return put


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_RESULTS, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        outcome, title, value = _RESULTS[key]
        line = f"{outcome} criterion {key}: {title}"
        if value:
            line += f"  [{value}]"
        terminalreporter.write_line(line)
