import pytest

from ftecsim import build_hex_color_code
from ftecsim.extraction import NoiseModel, compile_schedule
from ftecsim.recovery import build_table

_ACCEPTANCE_LINES: list[tuple[int, bool, str]] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    _ACCEPTANCE_LINES.append((number, ok, detail))


@pytest.fixture(scope="session")
def code3():
    return build_hex_color_code(3)


@pytest.fixture(scope="session")
def code5():
    return build_hex_color_code(5)


@pytest.fixture(scope="session")
def table3(code3):
    return build_table(code3, 2)


@pytest.fixture(scope="session")
def table5(code5):
    return build_table(code5, 3)


@pytest.fixture(scope="session")
def compiled3(code3):
    return compile_schedule(code3, NoiseModel(0.0))


@pytest.fixture(scope="session")
def compiled5(code5):
    return compile_schedule(code5, NoiseModel(0.0))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE_LINES):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {status} - {detail}")
