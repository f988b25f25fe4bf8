import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from shiftconv.arith import sieve_d3  # noqa: E402
from shiftconv.coeffs import TAU_EXPONENT, build_tau_table, from_sieve, normalize  # noqa: E402

_ACCEPTANCE: dict[str, str] = {}


def record_acceptance(label: str, name: str, passed: bool, detail: str) -> None:
    line = f"[{label:>3}] {'PASS' if passed else 'FAIL'}  {name}: {detail}"
    _ACCEPTANCE[label] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE.values():
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def tau_exact_big():
    return build_tau_table(1 << 19)


@pytest.fixture(scope="session")
def tau_big(tau_exact_big):
    """Normalized tau(n), n <= 2^19."""
    return normalize(tau_exact_big, TAU_EXPONENT)


@pytest.fixture(scope="session")
def d3_big():
    return from_sieve("d3", sieve_d3(1 << 18).values)
