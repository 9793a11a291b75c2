import sys

import pytest

from qeilab.minimal import MinimalSolution
from qeilab.models import ModelSpec
from qeilab.stress import FormFactorFP, PolynomialP


@pytest.fixture(scope="session")
def free_ev():
    return MinimalSolution(ModelSpec.free())


@pytest.fixture(scope="session")
def ising_ev():
    return MinimalSolution(ModelSpec.ising())


@pytest.fixture(scope="session")
def sg_ev():
    return MinimalSolution(ModelSpec.sinh_gordon(1.0))


@pytest.fixture(scope="session")
def free_ff(free_ev):
    return FormFactorFP(free_ev, PolynomialP.one())


@pytest.fixture(scope="session")
def ising_ff(ising_ev):
    return FormFactorFP(ising_ev, PolynomialP.one())


@pytest.fixture(scope="session")
def sg_ff(sg_ev):
    return FormFactorFP(sg_ev, PolynomialP.one())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    verdicts = getattr(mod, "VERDICTS", None)
    if not verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(verdicts):
        terminalreporter.write_line(verdicts[n])
