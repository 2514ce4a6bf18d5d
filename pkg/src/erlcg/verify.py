"""Independent oracles: brute-force solving, clause-implication checks and the
explanation-generality comparator.

Nothing here imports the engine or the propagators. Clauses are handled in
descriptor form: a literal is ``(desc, positive)`` with ``desc`` an atom
descriptor from :mod:`atoms` (``None`` for the constants).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .atoms import BoundGeq, CmpGeq, CmpGt, Eq, PsumGeq, Sched, Tuple, parse_clause
from .model import (
    AllDiffC, DisjunctiveC, ImplicationC, LexLessC, LinearC, ModelInstance, TableC, normalize,
)

MODEL_GUARD = 2 ** 20
CONSTRAINT_GUARD = 2 ** 24


class GuardExceeded(RuntimeError):
    """The enumeration would exceed its guard; the oracle refuses to answer."""


class GeneralityVerdict(enum.Enum):
    E2_STRICTLY_MORE_GENERAL = "E2_STRICTLY_MORE_GENERAL"
    E1_STRICTLY_MORE_GENERAL = "E1_STRICTLY_MORE_GENERAL"
    EQUIVALENT = "EQUIVALENT"
    INCOMPARABLE = "INCOMPARABLE"


@dataclass
class OracleResult:
    status: str
    best_objective: object = None
    best_assignment: object = None
    stats: dict = field(default_factory=dict)


# ----------------------------------------------------------------------------
# constraint semantics on complete assignments


def _unary_holds(u, asg):
    v = asg[u.var]
    return {"=": v == u.val, "!=": v != u.val, "<=": v <= u.val, ">=": v >= u.val}[u.op]


def constraint_holds(c, asg):
    """Whether constraint c holds under a complete {var: value} assignment."""
    if isinstance(c, LinearC):
        tot = sum(a * asg[x] for a, x in zip(c.coeffs, c.vars))
        rhs = c.bound + (asg[c.rhs_var] if c.rhs_var is not None else 0)
        if c.relation == "LE":
            return tot <= rhs
        if c.relation == "GE":
            return tot >= rhs
        return tot == rhs
    if isinstance(c, LexLessC):
        xs = [asg[x] for x in c.xs]
        ys = [asg[y] for y in c.ys]
        return xs < ys if c.strict else xs <= ys
    if isinstance(c, TableC):
        return tuple(asg[x] for x in c.vars) in set(c.rows)
    if isinstance(c, DisjunctiveC):
        n = len(c.starts)
        for i in range(n):
            for j in range(i + 1, n):
                si, sj = asg[c.starts[i]], asg[c.starts[j]]
                if not (si + c.durations[i] <= sj or sj + c.durations[j] <= si):
                    return False
        return True
    if isinstance(c, ImplicationC):
        return (not _unary_holds(c.antecedent, asg)) or _unary_holds(c.consequent, asg)
    if isinstance(c, AllDiffC):
        vals = [asg[x] for x in c.vars]
        return len(set(vals)) == len(vals)
    raise TypeError(f"unknown constraint {c!r}")


def violations(m: ModelInstance, asg):
    """Ids of constraints violated by a complete assignment (domains included)."""
    bad = []
    for v in m.vars:
        if not v.lb <= asg[v.id] <= v.ub:
            bad.append(f"domain:{v.name}")
    for c in m.constraints:
        if not constraint_holds(c, asg):
            bad.append(c.id)
    return bad


def scope(c):
    if isinstance(c, LinearC):
        return list(c.vars) + ([c.rhs_var] if c.rhs_var is not None else [])
    if isinstance(c, LexLessC):
        return list(c.xs) + list(c.ys)
    if isinstance(c, (TableC, AllDiffC)):
        return list(c.vars)
    if isinstance(c, DisjunctiveC):
        return list(c.starts)
    if isinstance(c, ImplicationC):
        return [c.antecedent.var, c.consequent.var]
    raise TypeError(c)


# ----------------------------------------------------------------------------
# literal semantics


def lit_vars(desc, defs):
    if isinstance(desc, (BoundGeq, Eq)):
        return [desc.var]
    if isinstance(desc, PsumGeq):
        return list(defs[desc.lin].vars[:desc.k])
    if isinstance(desc, (CmpGeq, CmpGt)):
        return [desc.x, desc.y]
    if isinstance(desc, Sched):
        c = defs[desc.disj]
        return [c.starts[desc.i], c.starts[desc.j]]
    if isinstance(desc, Tuple):
        return list(defs[desc.table].vars)
    return []


def desc_value(desc, val, defs):
    """Truth of an atom; ``val`` maps var id to a scalar or a numpy array."""
    if desc is None:
        return True
    if isinstance(desc, BoundGeq):
        return val[desc.var] >= desc.v
    if isinstance(desc, Eq):
        return val[desc.var] == desc.v
    if isinstance(desc, PsumGeq):
        c = defs[desc.lin]
        tot = 0
        for a, x in zip(c.coeffs[:desc.k], c.vars[:desc.k]):
            tot = tot + a * val[x]
        return tot >= desc.v
    if isinstance(desc, CmpGeq):
        return val[desc.x] >= val[desc.y]
    if isinstance(desc, CmpGt):
        return val[desc.x] > val[desc.y]
    if isinstance(desc, Sched):
        c = defs[desc.disj]
        return val[c.starts[desc.i]] + c.durations[desc.i] <= val[c.starts[desc.j]]
    if isinstance(desc, Tuple):
        c = defs[desc.table]
        out = True
        for x, v in zip(c.vars, c.rows[desc.row]):
            out = out & (val[x] == v)
        return out
    raise TypeError(desc)


def lit_value(lit, val, defs):
    desc, pos = lit
    if desc is None:
        return pos
    t = desc_value(desc, val, defs)
    return t if pos else ~t if isinstance(t, np.ndarray) else not t


def _restrict(domains, lits):
    """Apply the unary domain literals among ``lits`` (all required true) to
    a {var: sorted value list} map; returns the remaining non-unary literals."""
    doms = {x: list(vs) for x, vs in domains.items()}
    rest = []
    for desc, pos in lits:
        if desc is None:
            if not pos:
                return None, []
            continue
        if isinstance(desc, BoundGeq):
            keep = (lambda v, d=desc: v >= d.v) if pos else (lambda v, d=desc: v < d.v)
        elif isinstance(desc, Eq):
            keep = (lambda v, d=desc: v == d.v) if pos else (lambda v, d=desc: v != d.v)
        else:
            rest.append((desc, pos))
            continue
        doms[desc.var] = [v for v in doms[desc.var] if keep(v)]
    return doms, rest


def negated_clause(body, head):
    """Literals that must all hold for a counterexample of ``body -> head``."""
    hd, hp = head
    return list(body) + [(hd, not hp)]


# ----------------------------------------------------------------------------
# vectorized enumeration


def _enumerate(doms, order, chunk=1 << 18):
    sizes = [len(doms[x]) for x in order]
    total = math.prod(sizes) if sizes else 1
    arrs = [np.asarray(doms[x], dtype=np.int64) for x in order]
    for start in range(0, total, chunk):
        idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
        val = {}
        for x, arr, sz in zip(reversed(order), reversed(arrs), reversed(sizes)):
            val[x] = arr[idx % sz]
            idx = idx // sz
        yield val, len(val[order[0]]) if order else 1


def _constraint_vec(c, val):
    if isinstance(c, LinearC):
        tot = 0
        for a, x in zip(c.coeffs, c.vars):
            tot = tot + a * val[x]
        rhs = c.bound + (val[c.rhs_var] if c.rhs_var is not None else 0)
        if c.relation == "LE":
            return tot <= rhs
        if c.relation == "GE":
            return tot >= rhs
        return tot == rhs
    if isinstance(c, LexLessC):
        lt = False
        eq = True
        for x, y in zip(c.xs, c.ys):
            lt = lt | (eq & (val[x] < val[y]))
            eq = eq & (val[x] == val[y])
        return lt if c.strict else (lt | eq)
    if isinstance(c, TableC):
        ok = False
        for r in c.rows:
            m = True
            for x, v in zip(c.vars, r):
                m = m & (val[x] == v)
            ok = ok | m
        return ok
    if isinstance(c, DisjunctiveC):
        ok = True
        n = len(c.starts)
        for i in range(n):
            for j in range(i + 1, n):
                si, sj = val[c.starts[i]], val[c.starts[j]]
                ok = ok & ((si + c.durations[i] <= sj) | (sj + c.durations[j] <= si))
        return ok
    if isinstance(c, ImplicationC):
        a = _unary_vec(c.antecedent, val)
        return ~a | _unary_vec(c.consequent, val)
    if isinstance(c, AllDiffC):
        ok = True
        for i, x in enumerate(c.vars):
            for y in c.vars[i + 1:]:
                ok = ok & (val[x] != val[y])
        return ok
    raise TypeError(c)


def _unary_vec(u, val):
    v = val[u.var]
    return {"=": v == u.val, "!=": v != u.val, "<=": v <= u.val, ">=": v >= u.val}[u.op]


def _exists(constraints, lits, domains, defs, guard):
    """Is there an assignment (within ``domains``) satisfying every constraint
    and every literal? Exhaustive over the variables that matter."""
    doms, rest = _restrict(domains, lits)
    if doms is None or any(not vs for vs in doms.values()):
        return False
    vs = set()
    for c in constraints:
        vs.update(scope(c))
    for desc, _ in rest:
        vs.update(lit_vars(desc, defs))
    order = sorted(vs)
    if any(not doms[x] for x in order):
        return False
    total = math.prod(len(doms[x]) for x in order) if order else 1
    if total > guard:
        raise GuardExceeded(f"{total} assignments exceed the guard {guard}")
    for val, n in _enumerate(doms, order):
        ok = np.ones(n, dtype=bool)
        for c in constraints:
            ok &= np.asarray(_constraint_vec(c, val), dtype=bool)
        for lit in rest:
            ok &= np.asarray(lit_value(lit, val, defs), dtype=bool)
        if ok.any():
            return True
    return False


# ----------------------------------------------------------------------------
# exact special cases (single linear, single lex, single table)


def _linear_exists(c, lits, domains, defs):
    """Exact satisfiability of one linear plus literals, by prefix-sum sets.

    Partial-sum literals over this linear constrain its prefix sums at their
    checkpoints; any other literal must only mention the linear's variables
    through domain literals (handled by ``_restrict``).
    """
    doms, rest = _restrict(domains, lits)
    if doms is None:
        return False
    conds = {}
    for desc, pos in rest:
        if not (isinstance(desc, PsumGeq) and desc.lin == c.id):
            return None
        conds.setdefault(desc.k, []).append((desc.v, pos))
    sums = {0}
    for k, (a, x) in enumerate(zip(c.coeffs, c.vars), start=1):
        if not doms[x]:
            return False
        sums = {p + a * v for p in sums for v in doms[x]}
        for v, pos in conds.get(k, ()):
            sums = {p for p in sums if (p >= v) == pos}
        if not sums:
            return False
    lo, hi = min(sums), max(sums)
    if c.rhs_var is None:
        rlo = rhi = c.bound
    else:
        d = doms[c.rhs_var]
        if not d:
            return False
        rlo, rhi = min(d) + c.bound, max(d) + c.bound
    if c.relation == "LE":
        return lo <= rhi
    if c.relation == "GE":
        return hi >= rlo
    return any(rlo <= p <= rhi and (c.rhs_var is None or (p - c.bound) in set(doms[c.rhs_var])) for p in sums)


def _lex_exists(c, lits, domains, defs):
    doms, rest = _restrict(domains, lits)
    if doms is None:
        return False
    pos_of = {}
    for i, (x, y) in enumerate(zip(c.xs, c.ys)):
        pos_of[(x, y)] = i
    per = {}
    for desc, pos in rest:
        if isinstance(desc, (CmpGeq, CmpGt)) and (desc.x, desc.y) in pos_of:
            per.setdefault(pos_of[(desc.x, desc.y)], []).append((desc, pos))
        else:
            return None
    if len(set(c.xs) | set(c.ys)) != 2 * len(c.xs):
        return None
    eq, lt = True, False
    for i, (x, y) in enumerate(zip(c.xs, c.ys)):
        pairs = [(u, v) for u in doms[x] for v in doms[y]
                 if all(desc_value(d, {x: u, y: v}, defs) == p for d, p in per.get(i, ()))]
        if not pairs:
            return False
        can_lt = any(u < v for u, v in pairs)
        can_eq = any(u == v for u, v in pairs)
        lt, eq = lt or (eq and can_lt), eq and can_eq
        if not (lt or eq):
            return False
    return lt or (eq and not c.strict)


def _table_exists(c, lits, domains, defs):
    doms, rest = _restrict(domains, lits)
    if doms is None:
        return False
    if len(set(c.vars)) != len(c.vars):
        return None
    for desc, _ in rest:
        if not (isinstance(desc, Tuple) and desc.table == c.id):
            return None
    for t, r in enumerate(c.rows):
        if all(v in doms[x] for x, v in zip(c.vars, r)):
            val = dict(zip(c.vars, r))
            if all(desc_value(d, val, defs) == p for d, p in rest):
                return True
    return False


def _weak_scope(c, lits, defs):
    """Pairwise relaxation of disjunctive/alldiff restricted to the variables a
    clause mentions, used when the full scope is too large to enumerate.
    Implication by the relaxation implies implication by c."""
    vs = set()
    for desc, _ in lits:
        if desc is not None:
            vs.update(lit_vars(desc, defs))
    if isinstance(c, DisjunctiveC):
        idx = [i for i, x in enumerate(c.starts) if x in vs]
        if len(idx) < 2:
            return []
        return [DisjunctiveC(c.id, tuple(c.starts[i] for i in idx), tuple(c.durations[i] for i in idx))]
    if isinstance(c, AllDiffC):
        keep = tuple(x for x in c.vars if x in vs)
        return [AllDiffC(c.id, keep)] if len(keep) >= 2 else []
    return [c]


def check_implied(constraint, body, head, domains, defs=None, guard=CONSTRAINT_GUARD):
    """True iff ``constraint`` (over ``domains``) implies ``body -> head``.

    ``domains`` maps var id to its value list; ``defs`` maps constraint id to
    constraint for expanding extension atoms. Raises GuardExceeded on refusal.
    """
    defs = defs or {}
    lits = negated_clause(body, head)
    if isinstance(constraint, LinearC):
        r = _linear_exists(constraint, lits, domains, defs)
        if r is not None:
            return not r
    elif isinstance(constraint, LexLessC):
        r = _lex_exists(constraint, lits, domains, defs)
        if r is not None:
            return not r
    elif isinstance(constraint, TableC):
        r = _table_exists(constraint, lits, domains, defs)
        if r is not None:
            return not r
    try:
        return not _exists([constraint], lits, domains, defs, guard)
    except GuardExceeded:
        cons = _weak_scope(constraint, lits, defs)
        if cons == [constraint]:
            raise
    return not _exists(cons, lits, domains, defs, guard)


def initial_domains(m: ModelInstance):
    return {v.id: list(range(v.lb, v.ub + 1)) for v in m.vars}


def implies(body1, body2, domains, defs=None, guard=CONSTRAINT_GUARD):
    """Does the conjunction body1 imply every literal of body2 over the domains?"""
    for lit in body2:
        if _exists([], list(body1) + [(lit[0], not lit[1])], domains, defs or {}, guard):
            return False
    return True


def more_general(e1, e2, domains, defs=None, guard=CONSTRAINT_GUARD):
    """Compare explanations ``(body, head)`` by generality of their bodies."""
    (b1, h1), (b2, h2) = e1, e2
    if h1 != h2:
        raise ValueError("explanations must share the same head")
    one_two = implies(b1, b2, domains, defs, guard)
    two_one = implies(b2, b1, domains, defs, guard)
    if one_two and two_one:
        return GeneralityVerdict.EQUIVALENT
    if one_two:
        return GeneralityVerdict.E2_STRICTLY_MORE_GENERAL
    if two_one:
        return GeneralityVerdict.E1_STRICTLY_MORE_GENERAL
    return GeneralityVerdict.INCOMPARABLE


def _ge(x, v):
    return (BoundGeq(x, v), True)


# Explanations of x4 <= 4 from x1 + 2x2 + 3x3 + 4x4 <= 30 over 0..7 (variables 0..3),
# as (body1, body2, verdict) with the shared head HEAD_X4_LE_4.
HEAD_X4_LE_4 = (BoundGeq(3, 5), False)
GENERALITY_EXAMPLES = [
    ([_ge(0, 1), _ge(1, 2), _ge(2, 3)], [_ge(1, 1), _ge(2, 3)], GeneralityVerdict.E2_STRICTLY_MORE_GENERAL),
    ([_ge(1, 1), _ge(2, 3)], [_ge(1, 1), _ge(2, 3)], GeneralityVerdict.EQUIVALENT),
    ([_ge(1, 1), _ge(2, 3)], [_ge(0, 1), _ge(1, 2), _ge(2, 2)], GeneralityVerdict.INCOMPARABLE),
]


# ----------------------------------------------------------------------------
# depth-first search over a whole model


class _Search:
    """Exhaustive DFS over the non-objective variables.

    A constraint is checked in full once its last variable is assigned; before
    that, linear constraints are checked against the best case of their
    unassigned terms, and pairwise constraints (disjunctive, alldiff) as soon
    as both members are assigned. These checks only reject assignments that no
    completion could repair, so the enumeration stays exact.
    """

    def __init__(self, m, domains, extra_lits=(), defs=None, obj_mode="expr"):
        self.m = m
        defs = defs or {c.id: c for c in m.constraints}
        self.defs = defs
        obj = m.objective
        self.objv = obj.var if obj is not None else None
        self.obj = obj
        doms, rest = _restrict(domains, extra_lits)
        self.dead = doms is None or any(not doms[x] for x in doms)
        self.doms = doms
        self.rest = rest
        self.obj_mode = obj_mode
        self.vars = [v.id for v in m.vars if v.id != self.objv]
        self.pos = {x: i for i, x in enumerate(self.vars)}
        self.checks = [[] for _ in self.vars]
        self.leaf = []
        self.nodes = 0
        if self.dead:
            return
        self._plan_all()

    def _plan_all(self):
        defs = self.defs
        for c in self.m.constraints:
            if isinstance(c, LinearC) and c.rhs_var is not None:
                if self.obj_mode == "expr":
                    continue
            self._plan(c)
        for lit in self.rest:
            vs = [x for x in lit_vars(lit[0], defs) if x != self.objv]
            if self.objv in lit_vars(lit[0], defs):
                self.leaf.append(lambda val, l=lit: lit_value(l, val, self.defs))
                continue
            d = max(self.pos[x] for x in vs) if vs else 0
            self.checks[d].append(lambda val, l=lit: lit_value(l, val, self.defs))

    def _plan(self, c):
        if isinstance(c, LinearC):
            self._plan_linear(c)
            return
        if isinstance(c, (DisjunctiveC, AllDiffC)):
            xs = list(c.starts) if isinstance(c, DisjunctiveC) else list(c.vars)
            ds = list(c.durations) if isinstance(c, DisjunctiveC) else None
            for i in range(len(xs)):
                for j in range(i + 1, len(xs)):
                    d = max(self.pos[xs[i]], self.pos[xs[j]])
                    if ds is None:
                        f = (lambda val, a=xs[i], b=xs[j]: val[a] != val[b])
                    else:
                        f = (lambda val, a=xs[i], b=xs[j], da=ds[i], db=ds[j]:
                             val[a] + da <= val[b] or val[b] + db <= val[a])
                    self.checks[d].append(f)
            return
        vs = [x for x in scope(c) if x != self.objv]
        if self.objv in scope(c):
            self.leaf.append(lambda val, c=c: constraint_holds(c, val))
            return
        d = max(self.pos[x] for x in vs)
        self.checks[d].append(lambda val, c=c: constraint_holds(c, val))

    def _plan_linear(self, c):
        terms = list(zip(c.coeffs, c.vars))
        if c.rhs_var is not None:
            terms.append((-1, c.rhs_var))
        sign = {"LE": [1], "GE": [-1], "EQ": [1, -1]}[c.relation]
        for sg in sign:
            # sg * (sum - rhs) <= sg * bound
            tt = [(sg * a, x) for a, x in terms]
            self._plan_le(tt, sg * c.bound)

    def _plan_le(self, terms, bound):
        """Checks for sum(a*x) <= bound at every depth where a term var is set."""
        objterm = [(a, x) for a, x in terms if x == self.objv]
        terms = [(a, x) for a, x in terms if x != self.objv]
        if objterm:
            a, x = objterm[0]
            dom = self.doms[x]
            best_obj = min(a * v for v in dom)  # most favourable value of the objective term
        else:
            best_obj = 0
        depths = sorted({self.pos[x] for _, x in terms})
        for d in depths:
            assigned = [(a, x) for a, x in terms if self.pos[x] <= d]
            free = [(a, x) for a, x in terms if self.pos[x] > d]
            slack = bound - best_obj - sum(min(a * v for v in self.doms[x]) for a, x in free)
            self.checks[d].append(
                lambda val, t=assigned, s=slack: sum(a * val[x] for a, x in t) <= s)

    def add_objective_window(self, lo, hi):
        """Require lo <= g <= hi, where g is the objective oriented for
        maximization (the negated expression when minimizing)."""
        o = self.obj
        sg = 1 if o.sense == "max" else -1
        terms = [(sg * a, x) for a, x in zip(o.coeffs, o.vars)]
        if len(terms) == 1 and terms[0][1] in self.pos:
            # a single-variable objective becomes a domain restriction, which
            # the partial linear checks planned afterwards take into account
            a, x = terms[0]
            self.doms[x] = [v for v in self.doms[x] if lo <= a * v <= hi]
            if not self.doms[x]:
                self.dead = True
                return
            self.checks = [[] for _ in self.vars]
            self.leaf = []
            self._plan_all()
        self._plan_le([(-a, x) for a, x in terms], -lo)
        self._plan_le(terms, hi)

    def run(self, want_opt=False, first_only=False, guard=MODEL_GUARD, on_leaf=None):
        if self.dead:
            return
        vals = {}
        if self.objv is not None:
            vals[self.objv] = None
        order = self.vars
        n = len(order)
        doms = [self.doms[x] for x in order]
        if self.obj is not None and want_opt:
            coef = dict(zip(self.obj.vars, self.obj.coeffs))
            for i, x in enumerate(order):
                a = coef.get(x, 0)
                rev = (a > 0) == (self.obj.sense == "max") and a != 0
                doms[i] = sorted(doms[i], reverse=rev)
        checks = self.checks
        leaf = self.leaf
        stop = [False]

        def rec(i):
            if stop[0]:
                return
            if i == n:
                if all(f(vals) for f in leaf):
                    if on_leaf(vals):
                        stop[0] = True
                return
            x = order[i]
            for v in doms[i]:
                self.nodes += 1
                if self.nodes > guard:
                    raise GuardExceeded(f"search passed {guard} nodes")
                vals[x] = v
                ok = True
                for f in checks[i]:
                    if not f(vals):
                        ok = False
                        break
                if ok:
                    rec(i + 1)
                    if stop[0]:
                        return
            del vals[x]

        rec(0)


def brute_force(model: ModelInstance, guard=MODEL_GUARD):
    """Exact status/optimum by exhaustive enumeration.

    ``guard`` caps the search nodes visited; GuardExceeded is raised past it.
    """
    m = normalize(model)
    srch = _Search(m, initial_domains(m))
    obj = m.objective
    box = {"best": None, "asg": None, "sols": 0}

    if obj is None:
        def on_leaf(vals):
            box["asg"] = dict(vals)
            return True
        srch.run(guard=guard, on_leaf=on_leaf)
        status = "SAT" if box["asg"] is not None else "UNSAT"
        return OracleResult(status, None, _named(m, box["asg"]), {"nodes": srch.nodes})

    # bisection on the objective: the first solution gives a lower bound and
    # each pass asks for a solution in the upper half of the open range
    sg = 1 if obj.sense == "max" else -1
    doms = initial_domains(m)
    hi = sum(max(sg * a * v for v in doms[x]) for a, x in zip(obj.coeffs, obj.vars))
    used = 0
    lo = None
    while True:
        found = {}

        def on_leaf(vals):
            found["v"] = m.objective_value(vals)
            found["asg"] = dict(vals)
            return True

        srch = _Search(m, initial_domains(m))
        if lo is not None:
            if lo >= hi:
                break
            mid = (lo + hi + 1) // 2
            srch.add_objective_window(mid, hi)
        srch.run(want_opt=True, guard=guard - used, on_leaf=on_leaf)
        used += srch.nodes
        if found:
            box["best"], box["asg"] = found["v"], found["asg"]
            lo = sg * found["v"]
        elif lo is None:
            break
        else:
            hi = mid - 1
    status = "OPTIMAL" if box["asg"] is not None else "UNSAT"
    return OracleResult(status, box["best"], _named(m, box["asg"]), {"nodes": used})


def _named(m, asg):
    if asg is None:
        return None
    objv = m.objective.var if m.objective else None
    return {m.vars[x].name: v for x, v in asg.items() if x != objv and v is not None}


def check_nogood(m: ModelInstance, nogood, cut=None, guard=MODEL_GUARD):
    """Does the (prepared, normalized) model imply the nogood?

    ``nogood`` is the list of clause literals in descriptor form; ``cut`` is the
    incumbent objective at learning time (the branch-and-bound bound that was
    in force). The search looks for a model solution that falsifies every
    literal of the nogood.
    """
    lits = [(d, not p) for d, p in nogood]
    doms = initial_domains(m)
    if cut is not None and m.objective is not None:
        x = m.objective.var
        if m.objective.sense == "max":
            doms[x] = [v for v in doms[x] if v >= cut + 1]
        else:
            doms[x] = [v for v in doms[x] if v <= cut - 1]
    srch = _Search(m, doms, lits, obj_mode="channel")
    if srch.dead:
        return True
    objv = srch.objv
    # objective-dependent checks run once a value for obj is chosen
    leaf_checks, srch.leaf = srch.leaf, []
    chans = [c for c in m.constraints if isinstance(c, LinearC) and c.rhs_var is not None]
    found = []

    def on_leaf(vals):
        cands = [None] if objv is None else _obj_candidates(srch.doms[objv])
        for v in cands:
            if objv is not None:
                vals[objv] = v
            if all(constraint_holds(c, vals) for c in chans) and all(f(vals) for f in leaf_checks):
                found.append(1)
                return True
        if objv is not None:
            vals[objv] = None
        return False

    srch.run(guard=guard, on_leaf=on_leaf)
    return not found


def _obj_candidates(dom):
    """The channel bounds obj on one side only, so an extreme admissible
    value is feasible whenever any is."""
    if len(dom) <= 2:
        return dom
    return [dom[0], dom[-1]]


# ----------------------------------------------------------------------------
# logs and traces


def verify_explanations(m: ModelInstance, log, guard=CONSTRAINT_GUARD):
    """Check every logged explanation against its own constraint."""
    defs = {c.id: c for c in m.constraints}
    doms = initial_domains(m)
    rep = {"checked": 0, "passed": 0, "failed": 0, "refused": 0, "failures": []}
    for cid, body, head in log:
        rep["checked"] += 1
        try:
            ok = check_implied(defs[cid], body, head, doms, defs, guard)
        except GuardExceeded:
            rep["refused"] += 1
            continue
        if ok:
            rep["passed"] += 1
        else:
            rep["failed"] += 1
            rep["failures"].append((cid, body, head))
    return rep


def verify_nogoods(m: ModelInstance, log, guard=MODEL_GUARD):
    rep = {"checked": 0, "passed": 0, "failed": 0, "refused": 0, "failures": []}
    for lits, cut in log:
        rep["checked"] += 1
        try:
            ok = check_nogood(m, lits, cut, guard)
        except GuardExceeded:
            rep["refused"] += 1
            continue
        if ok:
            rep["passed"] += 1
        else:
            rep["failed"] += 1
            rep["failures"].append((lits, cut))
    return rep


def read_trace(m: ModelInstance, path):
    """Explanations (``E`` lines) and nogoods (``NG`` lines) of a run trace."""
    ids = {v.name: v.id for v in m.vars}
    expl, ngs = [], []
    cut = None
    with open(path) as f:
        for line in f:
            line = line.rstrip("\n")
            if line.startswith("E\t"):
                _, cid, cl = line.split("\t", 2)
                body, head = parse_clause(cl, ids)
                expl.append((int(cid), body, head))
            elif line.startswith("solution\t"):
                cut = int(line.split("\t")[1])
            elif line.startswith("NG "):
                ng = line.split("=>", 1)[1].rsplit("@", 1)[0]
                body, _ = parse_clause(ng, ids)
                ngs.append(([(d, not p) for d, p in body], cut))
    return expl, ngs
