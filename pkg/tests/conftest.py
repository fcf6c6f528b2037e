import itertools

import pytest

from applab.appell import PowerSeriesPair
from applab.kernel import KernelParams
from applab.operator import OperatorSpec

PAIRS = {
    "szasz": PowerSeriesPair((1.0,), ()),
    "a1_b05": PowerSeriesPair((1.0,), (0.5,)),
    "a12_b01": PowerSeriesPair((1.0, 2.0), (0.1,)),
}
RHOS = (0.5, 1.0, 2.0)
CS = (0, 1, 2)
MATRIX = list(itertools.product(PAIRS, RHOS, CS))


def matrix_spec(pair: str, rho: float, c: int, n: float = 1.0) -> OperatorSpec:
    return OperatorSpec(PAIRS[pair], KernelParams(n, rho, c))


@pytest.fixture(params=MATRIX, ids=lambda p: f"{p[0]}-rho{p[1]}-c{p[2]}")
def matrix_entry(request):
    return request.param


# One PASS/FAIL line per acceptance criterion, printed after the run.
ACCEPTANCE_DETAILS: dict = {}
_acceptance_outcomes: dict = {}


def record(criterion: int, detail: str) -> None:
    ACCEPTANCE_DETAILS[criterion] = detail


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        number = int(report.nodeid.split("test_criterion_")[1].split("_")[0])
        ok = _acceptance_outcomes.get(number, True) and report.outcome == "passed"
        _acceptance_outcomes[number] = ok


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance_outcomes):
        verdict = "PASS" if _acceptance_outcomes[number] else "FAIL"
        detail = ACCEPTANCE_DETAILS.get(number, "")
        terminalreporter.write_line(f"criterion {number:2d}: {verdict}  {detail}")
