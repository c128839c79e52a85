import numpy as np
import pytest

from pentaspec.coeffs import CoefficientModel

CRITERIA = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(CRITERIA):
        ok, detail = CRITERIA[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def record_criterion():
    """Store the verdict for the terminal summary, print it, then assert it."""

    def record(number, checks, detail=""):
        ok = all(bool(v) for v in checks.values())
        failed = [k for k, v in checks.items() if not v]
        text = detail + (f"  failed: {', '.join(failed)}" if failed else "")
        CRITERIA[number] = (ok, text)
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {text}")
        assert ok, text

    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def free():
    return CoefficientModel.constant(0.0, 0.0, 1.0, 1.0)


@pytest.fixture
def single_site():
    return CoefficientModel.finite_support((0.0, 0.0, 1.0, 1.0), {"a": [(1, 3.0)]})
