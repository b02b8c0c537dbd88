import pytest
from hypothesis import settings

from kgcomplete.observations import FrequencyHistogram

settings.register_profile("default", deadline=None)
settings.load_profile("default")

_ACCEPTANCE: dict[str, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): release criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    name = props.get("criterion")
    if name:
        entry = _ACCEPTANCE.setdefault(name, [True, []])
        entry[0] = entry[0] and report.outcome == "passed"
        if "detail" in props:
            entry[1].append(props["detail"])


@pytest.fixture(autouse=True)
def _tag_criterion(request):
    marker = request.node.get_closest_marker("acceptance")
    if marker:
        request.node.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, details) in _ACCEPTANCE.items():
        suffix = f"  [{'; '.join(details)}]" if details else ""
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}{suffix}")


@pytest.fixture
def small_hist():
    return FrequencyHistogram(k=2, n=4, D=3, f={1: 2, 2: 1})


@pytest.fixture
def skewed_hist():
    return FrequencyHistogram(k=3, n=12, D=8, f={1: 5, 2: 2, 3: 1})
