import pytest
from hypothesis import settings

# exact arithmetic and sympy make single examples slow but deterministic
settings.register_profile("biratlab", deadline=None, max_examples=40)
settings.load_profile("biratlab")

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("#")[1].split()[0])):
        terminalreporter.write_line(line)
