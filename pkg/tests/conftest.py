import pytest

from wpsystole.volumes import VolumeTable


@pytest.fixture(scope="session")
def table():
    return VolumeTable()


@pytest.fixture(scope="session")
def full_table():
    # every entry with 2g-2+n <= 14 plus the closed volumes up to genus 8
    t = VolumeTable()
    t.compute_all(14)
    return t


ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    def record(number, ok, detail):
        ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
