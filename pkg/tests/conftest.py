import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def gen():
    return np.random.default_rng(12345)


def crossing_pair():
    """mu = {(0,0), (1,10)}, nu = {(0,10), (1,0)}: the x-sorted pairing costs 100, the y-sorted one 1."""
    from dgswp.measures import make_uniform
    return make_uniform([[0.0, 0.0], [1.0, 10.0]]), make_uniform([[0.0, 10.0], [1.0, 0.0]])


_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    number, text = mark.args
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _criteria[number] = (rep.passed, text, detail)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        ok, text, detail = _criteria[number]
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {text}"
        terminalreporter.write_line(line + (f" [{detail}]" if detail else ""))
