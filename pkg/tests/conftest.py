import pytest

from robustvb.forward_models.problems import build_problem


@pytest.fixture(scope="session")
def problems():
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = build_problem(name)
        return cache[name]

    return get


@pytest.fixture(scope="session")
def cauchy(problems):
    return problems("cauchy")


ACCEPTANCE_LINES = []


def record_criterion(number, title, passed, detail):
    line = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
