import json
import logging

import pytest

from erlcg.model import (
    LinearC, ModelError, TableC, checkpoints, dump_model, normalize, parse_model,
)
from erlcg.verify import brute_force

from conftest import EX1, model_of


def _lin(coeffs, vars_, bound, rel="le", n=3, ub=7, **extra):
    doc = {"vars": [{"name": f"x{i}", "lb": 0, "ub": ub} for i in range(1, n + 1)],
           "constraints": [{"type": f"linear_{rel}", "coeffs": coeffs, "vars": vars_, "bound": bound, **extra}]}
    return model_of(doc)


def test_minimal_model():
    m = model_of({"vars": [{"name": "x", "lb": 0, "ub": 1}], "constraints": []})
    assert len(m.vars) == 1 and len(m.constraints) == 0


def test_example_model_has_three_constraints(ex1):
    assert len(ex1.vars) == 6
    assert len(ex1.constraints) == 3
    lin = ex1.constraints[0]
    assert lin.coeffs == (1, 2, 3, 4, 4) and lin.bound == 30 and lin.relation == "LE"


def test_negative_coefficient_rejected():
    with pytest.raises(ModelError, match="negative coefficient"):
        _lin([1, -2], ["x1", "x2"], 5)


@pytest.mark.parametrize("text, msg", [
    ('{"vars": [', "syntax error at line 1"),
    ('{"vars": [], "constraints": [{"type": "circuit"}]}', "unknown constraint type"),
    ('{"vars": [{"name": "x", "lb": 0, "ub": 1}], "constraints": '
     '[{"type": "linear_le", "coeffs": [1, 2], "vars": ["x"], "bound": 1}]}', "arity mismatch"),
    ('{"vars": [{"name": "x", "lb": 0, "ub": 1}], "constraints": [{"type": "alldiff", "vars": ["x", "y"]}]}',
     "undeclared variable"),
    ('{"vars": [{"name": "x", "lb": 2, "ub": 1}]}', "lb > ub"),
])
def test_parse_errors(text, msg):
    with pytest.raises(ModelError, match=msg):
        parse_model(text)


def test_overflow_guard():
    doc = {"vars": [{"name": "x", "lb": 0, "ub": 2 ** 40}],
           "constraints": [{"type": "linear_le", "coeffs": [2 ** 30], "vars": ["x"], "bound": 1}]}
    with pytest.raises(ModelError, match="overflow"):
        model_of(doc)


def test_merge_duplicate_terms():
    m = normalize(_lin([1, 2], ["x1", "x1"], 5))
    c = m.constraints[0]
    assert c.coeffs == (3,) and c.vars == (0,) and c.relation == "LE" and c.bound == 5


def test_zero_coefficient_dropped():
    c = normalize(_lin([1, 0, 2], ["x1", "x2", "x3"], 5)).constraints[0]
    assert c.coeffs == (1, 2) and c.vars == (0, 2)


def test_equality_split_keeps_term_order():
    m = normalize(_lin([3, 1, 2], ["x3", "x1", "x2"], 10, rel="eq"))
    le, ge = m.constraints
    assert (le.relation, ge.relation) == ("LE", "GE")
    assert le.vars == ge.vars == (2, 0, 1)
    assert le.coeffs == ge.coeffs == (3, 1, 2)
    assert le.bound == ge.bound == 10


def test_dead_table_row_dropped(caplog):
    doc = {"vars": [{"name": "a", "lb": 0, "ub": 7}, {"name": "b", "lb": 0, "ub": 7}],
           "constraints": [{"type": "table", "vars": ["a", "b"], "rows": [[1, 2], [9, 0], [3, 3]]}]}
    with caplog.at_level(logging.WARNING):
        t = normalize(model_of(doc)).constraints[0]
    assert isinstance(t, TableC)
    assert t.rows == ((1, 2), (3, 3))
    assert "dropping row" in caplog.text


def test_objective_becomes_variable_and_channel():
    doc = dict(EX1, objective={"sense": "max", "coeffs": [1, 1], "vars": ["x1", "x2"]})
    m = normalize(model_of(doc))
    assert m.vars[-1].name == "obj" and (m.vars[-1].lb, m.vars[-1].ub) == (0, 14)
    ch = m.constraints[-1]
    assert ch.rhs_var == m.objective.var and ch.relation == "GE"


@pytest.mark.parametrize("n, interval, expected", [(5, 1, [1, 2, 3, 4]), (12, 5, [5, 10]), (3, 50, [])])
def test_checkpoints(n, interval, expected):
    c = LinearC(0, (1,) * n, tuple(range(n)), "LE", 0, interval=interval)
    assert checkpoints(c) == expected


def test_normalize_idempotent():
    doc = dict(EX1)
    doc["constraints"] = EX1["constraints"] + [
        {"type": "linear_eq", "coeffs": [1, 1, 2], "vars": ["x1", "x1", "x2"], "bound": 6},
        {"type": "table", "vars": ["x1", "x2"], "rows": [[1, 2], [8, 1]]}]
    doc["objective"] = {"sense": "min", "coeffs": [1], "vars": ["x3"]}
    once = normalize(model_of(doc))
    assert normalize(once) == once


def test_normalize_preserves_solutions():
    doc = {"vars": [{"name": f"x{i}", "lb": 0, "ub": 4} for i in range(1, 5)],
           "constraints": [{"type": "linear_eq", "coeffs": [1, 1, 2], "vars": ["x1", "x2", "x1"], "bound": 7},
                           {"type": "alldiff", "vars": ["x2", "x3", "x4"]}],
           "objective": {"sense": "max", "coeffs": [1, 2, 3], "vars": ["x2", "x3", "x4"]}}
    m = model_of(doc)
    # 3*x1 + x2 = 7 gives (x1, x2) in {(1, 4), (2, 1)}; the best is x2=1, x3=3, x4=4
    r1, r2 = brute_force(m), brute_force(normalize(m))
    assert (r1.status, r1.best_objective) == (r2.status, r2.best_objective) == ("OPTIMAL", 19)


def test_dump_roundtrip(ex1):
    assert parse_model(dump_model(ex1)) == ex1
    assert json.loads(dump_model(ex1))["constraints"][1]["then"] == {"var": "x6", "op": "=", "val": 1}
