import json

import pytest

from erlcg.model import parse_model
from erlcg.search import Solver, SolverConfig, parse_ext

# Six variables over 0..7, one weighted sum and two implications on x6.
EX1 = {
    "vars": [{"name": f"x{i}", "lb": 0, "ub": 7} for i in range(1, 7)],
    "constraints": [
        {"type": "linear_le", "coeffs": [1, 2, 3, 4, 4], "vars": ["x1", "x2", "x3", "x4", "x5"], "bound": 30},
        {"type": "implication", "if": {"var": "x4", "op": "<=", "val": 4}, "then": {"var": "x6", "op": "=", "val": 1}},
        {"type": "implication", "if": {"var": "x5", "op": "<=", "val": 4}, "then": {"var": "x6", "op": "=", "val": 0}},
    ],
    "search": {"heuristic": "fixed", "order": ["x1", "x2", "x3", "x4", "x5", "x6"]},
}


def model_of(doc):
    return parse_model(json.dumps(doc))


@pytest.fixture
def ex1():
    return model_of(EX1)


def scripted(m, decisions, ext="none", lift=True, **kw):
    """Solver that has made the scripted decisions and propagated after each.

    Returns (solver, conflict) where conflict is the body of the first failure
    (None when every decision propagated cleanly).
    """
    sv = Solver(m, SolverConfig(ext=parse_ext(ext), lift=lift, log_explanations=True, **kw))
    sv.script = list(decisions)
    s = sv.eng
    conflict = s.propagate()
    for _ in decisions:
        if conflict is not None:
            break
        s.decide(sv.next_decision())
        conflict = s.propagate()
    return sv, conflict


def clause_text(s, lits):
    """Nogood (list of clause literals) as 'body -> false' text."""
    return s.clause_str([l ^ 1 for l in lits])


_REPORT = []


@pytest.fixture
def report():
    """Record one acceptance line; all lines are printed after the run."""
    return _REPORT.append


def pytest_terminal_summary(terminalreporter):
    if _REPORT:
        terminalreporter.section("acceptance")
        for line in sorted(_REPORT):
            terminalreporter.write_line(line)
