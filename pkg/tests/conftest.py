import pytest

from sygra.solver import Solver, SolverConfig


@pytest.fixture
def solver():
    s = Solver()
    yield s
    s.close()


@pytest.fixture(scope="session")
def shared_solver():
    """Builtin solver reused by read-only classification tests."""
    s = Solver()
    yield s
    s.close()


@pytest.fixture(scope="session")
def external_solver():
    """Solver that escalates undecided queries to an SMT subprocess."""
    s = Solver(SolverConfig(backend="external"))
    yield s
    s.close()
