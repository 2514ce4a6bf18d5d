import pytest

from erlcg.engine import Engine, SolverError
from erlcg.search import Solver

from conftest import model_of, scripted


def _texts(s, lits):
    return sorted(s.lit_str(l) for l in lits)


def test_decide_raises_level_and_bound(ex1):
    sv, _ = scripted(ex1, ["x1>=1"])
    s = sv.eng
    assert s.level == 1 and s.lb[0] == 1


def test_decide_eq_fixes_variable(ex1):
    sv, _ = scripted(ex1, ["x2=3"])
    s = sv.eng
    assert s.lb[1] == s.ub[1] == 3
    assert s.value(s.ge_lit(1, 3)) == 1 and s.value(s.ge_lit(1, 4)) == -1
    assert s.value(s.eq_lit(1, 2)) == -1


def test_decide_on_assigned_literal_is_an_error(ex1):
    sv, _ = scripted(ex1, ["x2=3"])
    with pytest.raises(SolverError):
        sv.eng.decide(sv.lit("x2>=1"))


def test_example_trail_at_level_two(ex1):
    sv, conflict = scripted(ex1, ["x1>=1", "x2>=2"])
    s = sv.eng
    assert conflict is None
    assert [s.lit_str(l) for l in s.trail] == ["x1>=1", "x2>=2", "x4<=6", "x5<=6"]
    assert [s.tlevel[p] for p in range(4)] == [1, 2, 2, 2]
    # both bounds come from the linear constraint through deferred reasons
    assert all(type(s.reasons[p]) is tuple for p in (2, 3))


def test_enqueue_true_literal_is_noop(ex1):
    sv, _ = scripted(ex1, ["x1>=1"])
    s = sv.eng
    n = len(s.trail)
    assert s.enqueue(sv.lit("x1>=1"), None) is True
    assert s.enqueue(sv.lit("x1>=0"), None) is True
    assert len(s.trail) == n


def test_enqueue_false_literal_reports_conflict():
    m = model_of({"vars": [{"name": "x", "lb": 0, "ub": 3}, {"name": "y", "lb": 0, "ub": 1}],
                  "constraints": []})
    sv = Solver(m)
    s = sv.eng
    s.decide(sv.lit("y=1"))
    s.propagate()
    c = s.add_clause([sv.lit("y!=1"), sv.lit("x>=2")])
    s.decide(sv.lit("x<=1"))
    assert s.enqueue(sv.lit("x>=2"), c) is False
    assert _texts(s, s.conflict) == ["x<=1", "y=1"]


def test_example_conflict(ex1):
    sv, conflict = scripted(ex1, ["x1>=1", "x2>=2", "x3>=3"])
    s = sv.eng
    assert _texts(s, conflict) == ["x5<=4", "x6!=0"]
    # x6 != 0 is implied by the trailed x6 = 1 through domain arithmetic
    x6ne0 = sv.lit("x6!=0")
    assert _texts(s, s.antecedents(x6ne0)) == ["x6>=1"]
    assert _texts(s, s.antecedents(sv.lit("x6>=1"))) == ["x6=1"]
    assert s.lit_str(s.trail[-1]) == "x6=1"


def test_empty_model_propagates():
    sv = Solver(model_of({"vars": [], "constraints": []}))
    assert sv.eng.propagate() is None


def test_root_conflict():
    doc = {"vars": [{"name": "x", "lb": 0, "ub": 3}],
           "constraints": [{"type": "implication", "if": {"var": "x", "op": ">=", "val": 0},
                            "then": {"var": "x", "op": "<=", "val": 2}},
                           {"type": "linear_ge", "coeffs": [1], "vars": ["x"], "bound": 3}]}
    sv = Solver(model_of(doc))
    assert sv.eng.propagate() is not None
    assert sv.eng.level == 0


def test_backjump_restores_state(ex1):
    sv, _ = scripted(ex1, [])
    s = sv.eng
    sig0 = s.state_signature()
    for text in ["x1>=1", "x2>=2"]:
        s.decide(sv.lit(text))
        assert s.propagate() is None
    sig2 = s.state_signature()
    s.decide(sv.lit("x3>=3"))
    assert s.propagate() is not None
    s.backjump(2)
    assert s.state_signature() == sig2
    s.backjump(0)
    assert s.state_signature() == sig0


def test_backjump_to_assertion_level(ex1):
    sv, conflict = scripted(ex1, ["x1>=1", "x2>=2", "x3>=3"])
    an = sv.db.analyze(conflict)
    assert an.level == 2
    sv.db.learn(an)
    s = sv.eng
    assert s.level == 2
    assert s.lit_str(s.trail[-1]) == "x3<=2"


def test_backjump_at_root_is_an_error(ex1):
    sv, _ = scripted(ex1, [])
    with pytest.raises(SolverError):
        sv.eng.backjump(0)


def test_explain_weaker_bound(ex1):
    sv, _ = scripted(ex1, ["x1>=1", "x2>=2"])
    s = sv.eng
    assert _texts(s, s.explain_domain(sv.lit("x2>=1"))) == ["x2>=2"]


def test_explain_decision_is_an_error(ex1):
    sv, _ = scripted(ex1, ["x1>=1"])
    with pytest.raises(SolverError):
        sv.eng.explain_domain(sv.lit("x1>=1"))


def test_explain_removed_value_and_fixed_value():
    sv = Solver(model_of({"vars": [{"name": "x", "lb": 0, "ub": 7}], "constraints": []}))
    s = sv.eng
    s.decide(sv.lit("x>=4"))
    s.propagate()
    assert _texts(s, s.explain_domain(sv.lit("x!=3"))) == ["x>=4"]
    s.decide(sv.lit("x<=4"))
    s.propagate()
    assert _texts(s, s.explain_domain(sv.lit("x=4"))) == ["x<=4", "x>=4"]
    assert _texts(s, s.explain_domain(sv.lit("x!=5"))) == ["x<=4"]


def test_fixpoint_is_idempotent(ex1):
    sv, _ = scripted(ex1, ["x1>=1", "x2>=2"])
    s = sv.eng
    n = len(s.trail)
    assert s.propagate() is None
    assert len(s.trail) == n


def test_domain_faithfulness_at_fixpoint(ex1):
    sv, _ = scripted(ex1, ["x1>=1", "x2>=2"])
    s = sv.eng
    reg = s.reg
    for x, d in enumerate(reg.ge_atoms):
        for v, a in d.items():
            want = 1 if s.lb[x] >= v else (-1 if s.ub[x] < v else 0)
            assert s.truth[2 * a] == want


def test_trail_is_acyclic(ex1):
    sv, _ = scripted(ex1, ["x1>=1", "x2>=2", "x3>=3"], ext="linear")
    s = sv.eng
    s.begin_analysis()
    for p, lit in enumerate(s.trail):
        if s.reasons[p] is None:
            continue
        for b in s.trail_body(p):
            assert s.locate(b)[0] < (p, 0)


def test_trace_lines(ex1):
    sv, _ = scripted(ex1, ["x1>=1", "x2>=2"], trace=True)
    lines = sv.eng.trace
    assert lines[0] == "1\tx1>=1\tdecision"
    assert lines[2] == "2\tx4<=6\tprop:0"


def test_engine_without_solver():
    s = Engine([0, 0], [3, 3])
    s.decide(s.ge_lit(0, 2))
    assert s.propagate() is None
    assert (s.lb[0], s.ub[0]) == (2, 3)
