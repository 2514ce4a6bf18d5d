"""Model file parsing, validation and normalization.

A model is a JSON document with ``vars``, ``constraints`` and optional
``objective`` / ``search`` sections. Constraints refer to variables by name;
after parsing every reference is a dense integer id.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Union

log = logging.getLogger(__name__)

INT_LIMIT = 2 ** 62
OPS = ("=", "!=", "<=", ">=")


class ModelError(ValueError):
    """Raised for any malformed or invalid model; the whole model is rejected."""


@dataclass(frozen=True)
class VarDecl:
    id: int
    name: str
    lb: int
    ub: int


@dataclass(frozen=True)
class LinearC:
    id: int
    coeffs: tuple
    vars: tuple
    relation: str  # "LE", "GE" or "EQ" (EQ only before normalization)
    bound: int
    interval: int = 1
    psum_enabled: bool = True
    # Objective channel: sum(terms) REL rhs_var + bound.
    rhs_var: Optional[int] = None

    @property
    def n(self):
        return len(self.vars)


@dataclass(frozen=True)
class LexLessC:
    id: int
    xs: tuple
    ys: tuple
    strict: bool = True


@dataclass(frozen=True)
class TableC:
    id: int
    vars: tuple
    rows: tuple


@dataclass(frozen=True)
class DisjunctiveC:
    id: int
    starts: tuple
    durations: tuple


class UnaryAtom(NamedTuple):
    var: int
    op: str
    val: int


@dataclass(frozen=True)
class ImplicationC:
    id: int
    antecedent: UnaryAtom
    consequent: UnaryAtom


@dataclass(frozen=True)
class AllDiffC:
    id: int
    vars: tuple


Constraint = Union[LinearC, LexLessC, TableC, DisjunctiveC, ImplicationC, AllDiffC]


@dataclass(frozen=True)
class Objective:
    sense: str  # "min" or "max"
    coeffs: tuple
    vars: tuple
    var: Optional[int] = None  # set by normalize()


@dataclass(frozen=True)
class SearchSpec:
    heuristic: str = "fixed"
    order: tuple = ()
    value_choice: Optional[str] = None


@dataclass(frozen=True)
class ModelInstance:
    vars: tuple
    constraints: tuple = ()
    objective: Optional[Objective] = None
    search: SearchSpec = field(default_factory=SearchSpec)

    def var_id(self, name):
        for v in self.vars:
            if v.name == name:
                return v.id
        raise KeyError(name)

    @property
    def names(self):
        return [v.name for v in self.vars]

    def value_choice(self):
        if self.search.value_choice:
            return self.search.value_choice
        if self.objective is not None and self.objective.sense == "max":
            return "max"
        return "min"

    def objective_value(self, assignment):
        """Objective expression evaluated on a {var id: value} assignment."""
        if self.objective is None:
            return None
        o = self.objective
        return sum(a * assignment[x] for a, x in zip(o.coeffs, o.vars))


def checkpoints(c: LinearC):
    """Prefix lengths at which partial-sum atoms may exist for ``c``."""
    if not c.psum_enabled or c.interval < 1:
        return []
    return list(range(c.interval, c.n, c.interval))


# --------------------------------------------------------------------------
# parsing


def _expect(cond, msg):
    if not cond:
        raise ModelError(msg)


def _int(v, what):
    _expect(isinstance(v, int) and not isinstance(v, bool), f"{what}: expected integer, got {v!r}")
    _expect(-INT_LIMIT < v < INT_LIMIT, f"{what}: integer out of 64-bit range")
    return v


def _intlist(v, what):
    _expect(isinstance(v, list), f"{what}: expected a list")
    return tuple(_int(x, what) for x in v)


def parse_model(text: str) -> ModelInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelError(f"syntax error at line {e.lineno}, column {e.colno}: {e.msg}") from None
    _expect(isinstance(doc, dict), "model must be a JSON object")
    unknown = set(doc) - {"vars", "constraints", "objective", "search"}
    _expect(not unknown, f"unknown top-level keys: {sorted(unknown)}")

    raw_vars = doc.get("vars")
    _expect(isinstance(raw_vars, list), "'vars' must be a list")
    vars_ = []
    ids = {}
    for i, rv in enumerate(raw_vars):
        _expect(isinstance(rv, dict), f"vars[{i}]: expected object")
        name = rv.get("name")
        _expect(isinstance(name, str) and name.isidentifier(), f"vars[{i}]: bad name {name!r}")
        _expect(name not in ids, f"duplicate variable name {name!r}")
        lb, ub = _int(rv.get("lb"), f"{name}.lb"), _int(rv.get("ub"), f"{name}.ub")
        _expect(lb <= ub, f"variable {name}: lb > ub")
        ids[name] = i
        vars_.append(VarDecl(i, name, lb, ub))

    def ref(name, what):
        _expect(isinstance(name, str), f"{what}: expected variable name, got {name!r}")
        _expect(name in ids, f"{what}: undeclared variable {name!r}")
        return ids[name]

    def refs(names, what):
        _expect(isinstance(names, list), f"{what}: expected list of variable names")
        return tuple(ref(n, what) for n in names)

    def unary(d, what):
        _expect(isinstance(d, dict), f"{what}: expected object")
        op = d.get("op")
        _expect(op in OPS, f"{what}: unknown operator {op!r}")
        return UnaryAtom(ref(d.get("var"), what), op, _int(d.get("val"), what))

    cons = []
    raw_cons = doc.get("constraints", [])
    _expect(isinstance(raw_cons, list), "'constraints' must be a list")
    for cid, rc in enumerate(raw_cons):
        _expect(isinstance(rc, dict) and "type" in rc, f"constraints[{cid}]: missing 'type'")
        kind = rc["type"]
        what = f"constraints[{cid}] ({kind})"
        if kind in ("linear_le", "linear_ge", "linear_eq"):
            coeffs = _intlist(rc.get("coeffs"), what)
            vs = refs(rc.get("vars"), what)
            _expect(len(coeffs) == len(vs), f"{what}: arity mismatch between coeffs and vars")
            _expect(all(a >= 0 for a in coeffs), f"{what}: negative coefficient")
            interval = rc.get("interval", 1)
            _int(interval, what)
            _expect(interval >= 1, f"{what}: interval must be positive")
            cons.append(LinearC(cid, coeffs, vs, kind[-2:].upper(), _int(rc.get("bound"), what),
                                interval=interval, psum_enabled=bool(rc.get("psum", True))))
        elif kind == "lex_less":
            xs, ys = refs(rc.get("xs"), what), refs(rc.get("ys"), what)
            _expect(len(xs) == len(ys) and xs, f"{what}: arity mismatch")
            cons.append(LexLessC(cid, xs, ys, bool(rc.get("strict", True))))
        elif kind == "table":
            vs = refs(rc.get("vars"), what)
            rows = rc.get("rows")
            _expect(isinstance(rows, list), f"{what}: 'rows' must be a list")
            rows = tuple(_intlist(r, what) for r in rows)
            _expect(all(len(r) == len(vs) for r in rows), f"{what}: arity mismatch in rows")
            cons.append(TableC(cid, vs, rows))
        elif kind == "disjunctive":
            ss = refs(rc.get("starts"), what)
            ds = _intlist(rc.get("durations"), what)
            _expect(len(ss) == len(ds) and len(ss) >= 2, f"{what}: arity mismatch")
            _expect(all(d > 0 for d in ds), f"{what}: durations must be positive")
            cons.append(DisjunctiveC(cid, ss, ds))
        elif kind == "implication":
            cons.append(ImplicationC(cid, unary(rc.get("if"), what), unary(rc.get("then"), what)))
        elif kind == "alldiff":
            vs = refs(rc.get("vars"), what)
            _expect(len(vs) >= 2, f"{what}: needs at least two variables")
            cons.append(AllDiffC(cid, vs))
        else:
            raise ModelError(f"{what}: unknown constraint type {kind!r}")

    objective = None
    if "objective" in doc:
        ro = doc["objective"]
        _expect(isinstance(ro, dict), "objective: expected object")
        sense = ro.get("sense")
        _expect(sense in ("min", "max"), f"objective: bad sense {sense!r}")
        coeffs = _intlist(ro.get("coeffs"), "objective")
        vs = refs(ro.get("vars"), "objective")
        _expect(len(coeffs) == len(vs), "objective: arity mismatch")
        _expect(all(a >= 0 for a in coeffs), "objective: negative coefficient")
        objective = Objective(sense, coeffs, vs)

    search = SearchSpec()
    if "search" in doc:
        rs = doc["search"]
        _expect(isinstance(rs, dict), "search: expected object")
        heur = rs.get("heuristic", "fixed")
        _expect(heur in ("fixed", "vsids"), f"search: unknown heuristic {heur!r}")
        order = refs(rs.get("order", []), "search.order")
        vc = rs.get("value_choice")
        _expect(vc in (None, "min", "max"), f"search: bad value_choice {vc!r}")
        search = SearchSpec(heur, order, vc)

    m = ModelInstance(tuple(vars_), tuple(cons), objective, search)
    validate(m)
    return m


def validate(m: ModelInstance):
    n = len(m.vars)
    for i, v in enumerate(m.vars):
        _expect(v.id == i, "variable ids must be contiguous")
    o = m.search.order
    if o:
        _expect(len(set(o)) == len(o), "search.order has duplicates")
    if m.search.heuristic == "fixed" and o:
        structural = set(range(n)) - ({m.objective.var} if m.objective and m.objective.var is not None else set())
        _expect(set(o) == structural, "search.order must be a permutation of the variables")
    for c in m.constraints:
        if isinstance(c, LinearC):
            big = max(max(abs(m.vars[x].lb), abs(m.vars[x].ub)) for x in c.vars) if c.vars else 0
            _expect(sum(abs(a) for a in c.coeffs) * max(big, 1) < INT_LIMIT,
                    f"linear {c.id}: coefficients may overflow 64-bit prefix sums")


# --------------------------------------------------------------------------
# normalization


def _norm_linear(c: LinearC, cid):
    merged = {}
    order = []
    for a, x in zip(c.coeffs, c.vars):
        if x not in merged:
            merged[x] = 0
            order.append(x)
        merged[x] += a
    terms = [(merged[x], x) for x in order if merged[x] != 0]
    if any(a < 0 for a, _ in terms):
        raise ModelError(f"linear {c.id}: merged coefficient is not positive")
    coeffs = tuple(a for a, _ in terms)
    vs = tuple(x for _, x in terms)
    if c.relation == "EQ":
        return [replace(c, id=cid, coeffs=coeffs, vars=vs, relation="LE"),
                replace(c, id=cid + 1, coeffs=coeffs, vars=vs, relation="GE")]
    return [replace(c, id=cid, coeffs=coeffs, vars=vs)]


def normalize(m: ModelInstance) -> ModelInstance:
    """Canonical form consumed by the solver. Idempotent."""
    out = []
    vars_ = list(m.vars)
    for c in m.constraints:
        cid = len(out)
        if isinstance(c, LinearC):
            out.extend(_norm_linear(c, cid))
        elif isinstance(c, TableC):
            keep = []
            seen = set()
            for r in c.rows:
                if not all(vars_[x].lb <= v <= vars_[x].ub for x, v in zip(c.vars, r)):
                    log.warning("table %d: dropping row %s outside the initial domains", c.id, list(r))
                    continue
                if r not in seen:
                    seen.add(r)
                    keep.append(r)
            out.append(replace(c, id=cid, rows=tuple(keep)))
        else:
            out.append(replace(c, id=cid))

    obj = m.objective
    if obj is not None and obj.var is None:
        lo = sum(a * vars_[x].lb for a, x in zip(obj.coeffs, obj.vars))
        hi = sum(a * vars_[x].ub for a, x in zip(obj.coeffs, obj.vars))
        taken = {v.name for v in vars_}
        name = "obj"
        while name in taken:
            name = "_" + name
        ov = VarDecl(len(vars_), name, lo, hi)
        vars_.append(ov)
        terms = [(a, x) for a, x in zip(obj.coeffs, obj.vars) if a != 0]
        # maximize: sum >= obj ; minimize: sum <= obj
        rel = "GE" if obj.sense == "max" else "LE"
        out.append(LinearC(len(out), tuple(a for a, _ in terms), tuple(x for _, x in terms), rel, 0,
                           rhs_var=ov.id))
        obj = replace(obj, var=ov.id)
    return ModelInstance(tuple(vars_), tuple(out), obj, m.search)


# --------------------------------------------------------------------------
# serialization


def _unary_json(m, u):
    return {"var": m.vars[u.var].name, "op": u.op, "val": u.val}


def model_to_dict(m: ModelInstance) -> dict:
    """Inverse of parse_model for un-normalized instances."""
    nm = [v.name for v in m.vars]
    cons = []
    for c in m.constraints:
        if isinstance(c, LinearC):
            if c.rhs_var is not None:
                continue
            d = {"type": "linear_" + c.relation.lower(), "coeffs": list(c.coeffs),
                 "vars": [nm[x] for x in c.vars], "bound": c.bound}
            if c.interval != 1:
                d["interval"] = c.interval
            if not c.psum_enabled:
                d["psum"] = False
        elif isinstance(c, LexLessC):
            d = {"type": "lex_less", "xs": [nm[x] for x in c.xs], "ys": [nm[x] for x in c.ys]}
            if not c.strict:
                d["strict"] = False
        elif isinstance(c, TableC):
            d = {"type": "table", "vars": [nm[x] for x in c.vars], "rows": [list(r) for r in c.rows]}
        elif isinstance(c, DisjunctiveC):
            d = {"type": "disjunctive", "starts": [nm[x] for x in c.starts], "durations": list(c.durations)}
        elif isinstance(c, ImplicationC):
            d = {"type": "implication", "if": _unary_json(m, c.antecedent), "then": _unary_json(m, c.consequent)}
        else:
            d = {"type": "alldiff", "vars": [nm[x] for x in c.vars]}
        cons.append(d)
    objv = m.objective.var if m.objective else None
    doc = {"vars": [{"name": v.name, "lb": v.lb, "ub": v.ub} for v in m.vars if v.id != objv],
           "constraints": cons}
    if m.objective is not None:
        o = m.objective
        doc["objective"] = {"sense": o.sense, "coeffs": list(o.coeffs), "vars": [nm[x] for x in o.vars]}
    s = m.search
    if s.order or s.heuristic != "fixed" or s.value_choice:
        d = {"heuristic": s.heuristic, "order": [nm[x] for x in s.order]}
        if s.value_choice:
            d["value_choice"] = s.value_choice
        doc["search"] = d
    return doc


def dump_model(m: ModelInstance) -> str:
    return json.dumps(model_to_dict(m), indent=1, sort_keys=False) + "\n"


def load_model(path) -> ModelInstance:
    with open(path) as f:
        return parse_model(f.read())
