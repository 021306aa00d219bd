import pytest

from ghostcam import ChannelSpec, PatternGridSpec, make_glyph_object

ACCEPTANCE_RESULTS = []


@pytest.fixture
def small_spec():
    return PatternGridSpec(width=6, height=5, fill_ratio=0.3, seed=11)


@pytest.fixture
def xjtu():
    return make_glyph_object("XJTU", 40, 40)


@pytest.fixture
def grid40_spec():
    return PatternGridSpec(width=40, height=40, fill_ratio=0.11, seed=7)


@pytest.fixture
def noiseless():
    return ChannelSpec()


@pytest.fixture
def record_criterion():
    def record(number, name, passed, detail):
        ACCEPTANCE_RESULTS.append((number, name, bool(passed), detail))
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {name} ({detail})")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {number}. {name}: {detail}")
