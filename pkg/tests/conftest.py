import pytest
from hypothesis import settings

from xormodal.cnf import Clause, Cnf, lit
from xormodal.kripke import KripkeStructure

ACCEPTANCE_LINES: list[str] = []

# one CPU and large numpy setups: timing-based flakiness is not a useful signal here
settings.register_profile("repo", deadline=None)
settings.load_profile("repo")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def gadget_model():
    """Two worlds: w labelled {x}, v labelled {y, z}; R1 identity, R2 one class."""
    return KripkeStructure(
        ["w", "v"],
        {1: [("w", "w"), ("v", "v")], 2: [("w", "w"), ("v", "v"), ("w", "v"), ("v", "w")]},
        {"w": ["x"], "v": ["y", "z"]},
    )


@pytest.fixture
def example_cnf():
    """(a|b|c) & (~d|f|e) & (~e|f|g)"""
    return Cnf.from_clauses([
        Clause.of("a", "b", "c"),
        Clause.of("~d", "f", "e"),
        Clause.of("~e", "f", "g"),
    ])


def clause(*texts):
    return Clause(tuple(lit(t) for t in texts))
