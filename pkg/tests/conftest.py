import os

import pytest
from hypothesis import HealthCheck, settings

from oligocat.groups import PermGroup
from oligocat.regcat import GSetCategory, OpFinSetCategory

settings.register_profile(
    "oligocat",
    max_examples=int(os.environ.get("OLIGOCAT_HYPOTHESIS_EXAMPLES", "40")),
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("oligocat")


@pytest.fixture(scope="session")
def finset():
    return GSetCategory(PermGroup.trivial())


@pytest.fixture(scope="session")
def z2():
    return GSetCategory(PermGroup.cyclic(2))


@pytest.fixture(scope="session")
def z3():
    return GSetCategory(PermGroup.cyclic(3))


@pytest.fixture(scope="session")
def s3():
    return GSetCategory(PermGroup.symmetric(3))


@pytest.fixture(scope="session")
def opfin():
    return OpFinSetCategory()


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def acceptance_log():
    def record(number, ok, seconds, detail):
        line = f"CRITERION {number:>2} {'PASS' if ok else 'FAIL'} ({seconds:.1f} s) {detail}"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
