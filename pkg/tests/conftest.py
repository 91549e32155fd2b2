import re

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")
_outcomes: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    number, name = int(match.group(1)), match.group(2)
    failed = report.failed
    if report.when == "call" or failed:
        previous = _outcomes.get(number, ("PASS", name))[0]
        _outcomes[number] = ("FAIL" if failed or previous == "FAIL" else "PASS", name)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        verdict, name = _outcomes[number]
        terminalreporter.write_line(f"{verdict} criterion {number}: {name.replace('_', ' ')}")
