import pytest

from erlcg.atoms import BoundGeq, PsumGeq
from erlcg.bench import gen_alldiff_chain, gen_disjunctive, gen_knapsack
from erlcg.model import LinearC
from erlcg.search import SolverConfig, parse_ext, solve
from erlcg.verify import (
    GeneralityVerdict, GuardExceeded, brute_force, check_implied, implies, initial_domains, more_general,
)

from conftest import model_of

# x1 + 2x2 + 3x3 + 4x4 <= 30 over 0..7
LIN = LinearC(0, (1, 2, 3, 4), (0, 1, 2, 3), "LE", 30)
DOMS = {x: list(range(8)) for x in range(4)}


def ge(x, v):
    return (BoundGeq(x, v), True)


def le(x, v):
    return (BoundGeq(x, v + 1), False)


def test_check_implied_lifted_explanation():
    assert check_implied(LIN, [ge(1, 1), ge(2, 3)], le(3, 4), DOMS)


def test_check_implied_counterexample():
    # x = (0, 0, 3, 5): 9 + 20 = 29 <= 30 yet x4 > 4
    assert not check_implied(LIN, [ge(2, 3)], le(3, 4), DOMS)


def test_check_implied_tautology():
    assert check_implied(LIN, [ge(0, 3)], ge(0, 2), DOMS)


def test_check_implied_psum_literal():
    defs = {0: LIN}
    assert check_implied(LIN, [(PsumGeq(0, 3, 11), True)], le(3, 4), DOMS, defs)
    assert not check_implied(LIN, [(PsumGeq(0, 3, 10), True)], le(3, 4), DOMS, defs)


def test_guard_refuses_loudly():
    big = LinearC(0, (1,) * 8, tuple(range(8)), "LE", 30)
    doms = {x: list(range(20)) for x in range(8)}
    with pytest.raises(GuardExceeded):
        implies([(PsumGeq(0, 8, 3), True)], [ge(0, 1)], doms, {0: big}, guard=1000)


E_ALL = [ge(0, 1), ge(1, 2), ge(2, 3)]
E_LIFTED = [ge(1, 1), ge(2, 3)]
E_OTHER = [ge(0, 1), ge(1, 2), ge(2, 2)]
HEAD = le(3, 4)


def test_generality_strictly_more_general():
    v = more_general((E_ALL, HEAD), (E_LIFTED, HEAD), DOMS)
    assert v is GeneralityVerdict.E2_STRICTLY_MORE_GENERAL
    assert more_general((E_LIFTED, HEAD), (E_ALL, HEAD), DOMS) is GeneralityVerdict.E1_STRICTLY_MORE_GENERAL


def test_generality_equivalent():
    assert more_general((E_LIFTED, HEAD), (E_LIFTED, HEAD), DOMS) is GeneralityVerdict.EQUIVALENT


def test_generality_incomparable():
    assert more_general((E_LIFTED, HEAD), (E_OTHER, HEAD), DOMS) is GeneralityVerdict.INCOMPARABLE


def test_generality_needs_same_head():
    with pytest.raises(ValueError):
        more_general((E_LIFTED, HEAD), (E_LIFTED, le(3, 5)), DOMS)


def test_brute_force_chain():
    r = brute_force(gen_alldiff_chain(10))
    assert (r.status, r.best_objective) == ("OPTIMAL", 19)


def test_brute_force_empty_model():
    assert brute_force(model_of({"vars": [], "constraints": []})).status == "SAT"


def test_brute_force_unsat():
    doc = {"vars": [{"name": "x", "lb": 0, "ub": 1}],
           "constraints": [{"type": "linear_ge", "coeffs": [1], "vars": ["x"], "bound": 1},
                           {"type": "linear_le", "coeffs": [1], "vars": ["x"], "bound": 0}]}
    assert brute_force(model_of(doc)).status == "UNSAT"


def test_brute_force_guard():
    with pytest.raises(GuardExceeded):
        brute_force(gen_knapsack(30, 1), guard=1000)


def test_brute_force_knapsack_matches_enumeration():
    m = gen_knapsack(8, 2)
    lin = m.constraints[0]
    w = dict(zip(lin.vars, lin.coeffs))
    p = dict(zip(m.objective.vars, m.objective.coeffs))
    best = 0
    for mask in range(1 << 8):
        take = [x for x in range(8) if mask >> x & 1]
        if sum(w[x] for x in take) <= lin.bound:
            best = max(best, sum(p[x] for x in take))
    assert brute_force(m).best_objective == best


@pytest.mark.parametrize("ext", ["none", "all"])
def test_solver_matches_oracle_disjunctive(ext):
    m = gen_disjunctive(4, 2)
    r = solve(m, SolverConfig(ext=parse_ext(ext)))
    o = brute_force(m)
    assert (r.status, r.best_objective) == (o.status, o.best_objective)


def test_initial_domains(ex1):
    d = initial_domains(ex1)
    assert d[0] == list(range(8)) and len(d) == 6
