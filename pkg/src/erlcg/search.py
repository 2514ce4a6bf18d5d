"""CDCL search loop: branching, restarts and branch-and-bound."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field, replace
from heapq import heapify, heappop, heappush
from typing import Optional

from .atoms import EQ, FALSE_LIT, GE, clause_str, parse_lit
from .engine import Engine, SolverError
from .learning import NogoodDB
from .model import (
    AllDiffC, DisjunctiveC, ImplicationC, LexLessC, LinearC, ModelInstance, TableC,
    checkpoints, normalize,
)
from .propagators import AllDiffProp, DisjunctiveProp, LexProp, LinearProp, TableProp, unary_lit

FAMILIES = ("linear", "lex", "table", "disj")


@dataclass
class SolverConfig:
    ext: frozenset = frozenset(FAMILIES)
    psum_interval: Optional[int] = None  # None keeps each linear's own interval
    psum_order: str = "struct"
    heuristic: Optional[str] = None  # None keeps the model's search annotation
    seed: int = 0
    max_conflicts: Optional[int] = None
    timeout_ms: Optional[int] = None
    trace: bool = False
    log_explanations: bool = False
    log_nogoods: bool = False
    luby_base: int = 100
    db_cap: int = 2000
    lift: bool = True  # weaken linear explanations to maximally general ones


@dataclass
class SolveResult:
    status: str  # OPTIMAL, SAT, UNSAT, UNKNOWN
    best_objective: Optional[int] = None
    best_assignment: Optional[dict] = None
    stats: dict = field(default_factory=dict)


def parse_ext(text):
    """``none``, ``all`` or a comma list of families."""
    text = (text or "all").strip()
    if text == "none":
        return frozenset()
    if text == "all":
        return frozenset(FAMILIES)
    out = set()
    for t in text.split(","):
        t = t.strip()
        if t == "disjunctive":
            t = "disj"
        if t not in FAMILIES:
            raise ValueError(f"unknown extension family {t!r}")
        out.add(t)
    return frozenset(out)


def luby(i):
    """i-th element (0-based) of the Luby sequence 1 1 2 1 1 2 4 ..."""
    k = 1
    while (1 << k) - 1 < i + 1:
        k += 1
    while True:
        if i + 1 == (1 << k) - 1:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i + 1:
            k += 1


def reorder_terms(c, order, seed):
    if order == "struct" or c.n <= 1:
        return c
    idx = list(range(c.n))
    if order == "random":
        rng = random.Random(f"{seed}:{c.id}")
        rng.shuffle(idx)
    elif order == "coeff":
        idx.sort(key=lambda i: (-c.coeffs[i], i))
    else:
        raise ValueError(f"unknown psum order {order!r}")
    return replace(c, coeffs=tuple(c.coeffs[i] for i in idx), vars=tuple(c.vars[i] for i in idx))


def prepare(model: ModelInstance, cfg: SolverConfig) -> ModelInstance:
    """Normalized model with the run's checkpoint interval and term order applied."""
    m = normalize(model)
    cons = []
    for c in m.constraints:
        if isinstance(c, LinearC):
            c = reorder_terms(c, cfg.psum_order, cfg.seed)
            if cfg.psum_interval is not None:
                c = replace(c, interval=cfg.psum_interval)
            if "linear" not in cfg.ext:
                c = replace(c, psum_enabled=False)
        cons.append(c)
    search = m.search
    if cfg.heuristic is not None:
        search = replace(search, heuristic=cfg.heuristic)
    return replace(m, constraints=tuple(cons), search=search)


class Solver:
    def __init__(self, model: ModelInstance, cfg: SolverConfig = None, prepared=False):
        self.cfg = cfg = cfg or SolverConfig()
        self.model = m = model if prepared else prepare(model, cfg)
        cps = {c.id: set(checkpoints(c)) for c in m.constraints if isinstance(c, LinearC)}
        self.eng = s = Engine([v.lb for v in m.vars], [v.ub for v in m.vars], cps, m.names)
        if cfg.trace:
            s.trace = []
        if cfg.log_explanations:
            s.expl_log = []
        self.heuristic = m.search.heuristic
        self.db = NogoodDB(s, cap=cfg.db_cap, bump=self._on_bump if self.heuristic == "vsids" else None,
                           record_resolution=cfg.trace)
        self.nogood_log = [] if cfg.log_nogoods else None
        self.script = []
        self.root_failed = False
        ext = cfg.ext
        for c in m.constraints:
            if isinstance(c, LinearC):
                p = LinearProp(s, c, ext="linear" in ext, lift=cfg.lift)
                self._add(p, list(c.vars) + ([c.rhs_var] if c.rhs_var is not None else []))
            elif isinstance(c, LexLessC):
                self._add(LexProp(s, c, ext="lex" in ext), list(c.xs) + list(c.ys))
            elif isinstance(c, TableC):
                self._add(TableProp(s, c, ext="table" in ext), c.vars)
            elif isinstance(c, DisjunctiveC):
                self._add(DisjunctiveProp(s, c, ext="disj" in ext), c.starts)
            elif isinstance(c, AllDiffC):
                self._add(AllDiffProp(s, c), c.vars)
            elif isinstance(c, ImplicationC):
                cl = [unary_lit(s, c.antecedent) ^ 1, unary_lit(s, c.consequent)]
                if s.add_clause(cl) is False:
                    self.root_failed = True
            else:
                raise SolverError(f"unsupported constraint {c!r}")
        obj = m.objective
        self.obj_var = obj.var if obj is not None else None
        self.sense = obj.sense if obj is not None else None
        order = list(m.search.order) or [v.id for v in m.vars if v.id != self.obj_var]
        rest = [v.id for v in m.vars if v.id not in set(order)]
        self.order = order + rest
        self.value_choice = m.value_choice()
        self.phase = {}
        self.heap = []
        self.heap_n = 0
        if self.heuristic == "vsids":
            s.on_unassign = self._on_unassign
        self.best = None
        self.best_assignment = None
        self.stats = dict(fails=0, decisions=0, restarts=0, solutions=0)
        self.status = None

    def _add(self, prop, watched):
        prop.pid = self.eng.add_propagator(prop, watched)

    # -- heuristics ------------------------------------------------------------

    def _on_bump(self, a):
        reg = self.eng.reg
        if reg.kind[a] in (GE, EQ) and reg.truth[2 * a] == 0:
            heappush(self.heap, (-reg.activity[a], a))

    def _on_unassign(self, a):
        reg = self.eng.reg
        self.phase[a] = reg.truth[2 * a]
        if reg.kind[a] in (GE, EQ):
            heappush(self.heap, (-reg.activity[a], a))

    def _vsids(self):
        s = self.eng
        reg = s.reg
        heap = self.heap
        kind = reg.kind
        for a in range(self.heap_n, len(kind)):
            if kind[a] in (GE, EQ):
                heappush(heap, (-reg.activity[a], a))
        self.heap_n = len(kind)
        if len(heap) > 8 * len(kind) + 1000:
            best = {}
            for act, a in heap:
                best[a] = min(best.get(a, 0.0), act)
            self.heap = heap = [(act, a) for a, act in best.items()]
            heapify(heap)
        act = reg.activity
        while heap:
            na, a = heappop(heap)
            if reg.truth[2 * a] == 0 and -na == act[a] and kind[a] in (GE, EQ):
                return 2 * a if self.phase.get(a, -1) == 1 else 2 * a + 1
        for x in range(s.nvars):
            if s.lb[x] < s.ub[x]:
                return s.ge_lit(x, s.lb[x] + 1) ^ 1
        return None

    def _fixed(self):
        s = self.eng
        for x in self.order:
            if s.lb[x] < s.ub[x]:
                if x == self.obj_var:
                    v = s.ub[x] if self.sense == "max" else s.lb[x]
                else:
                    v = s.ub[x] if self.value_choice == "max" else s.lb[x]
                return s.eq_lit(x, v)
        return None

    def next_decision(self):
        while self.script:
            lit = self.script.pop(0)
            if isinstance(lit, str):
                lit = self.lit(lit)
            if self.eng.truth[lit] == 0:
                return lit
        if self.heuristic == "vsids":
            return self._vsids()
        return self._fixed()

    def lit(self, text):
        """Literal from its text form, e.g. ``x1>=1``."""
        s = self.eng
        ids = {n: i for i, n in enumerate(s.names)}
        desc, pos = parse_lit(text, ids)
        if desc is None:
            return 0 if pos else 1
        if type(desc).__name__ == "BoundGeq":
            l = s.ge_lit(desc.var, desc.v)
        elif type(desc).__name__ == "Eq":
            l = s.eq_lit(desc.var, desc.v)
        else:
            l = 2 * s._intern(desc)
        return l if pos else l ^ 1

    # -- main loop ---------------------------------------------------------------

    def assignment(self):
        s = self.eng
        return {x: s.lb[x] for x in range(s.nvars)}

    def on_solution(self):
        """Record the incumbent; returns False when search is over."""
        from .verify import violations
        s = self.eng
        asg = self.assignment()
        bad = violations(self.model, asg)
        if bad:
            raise SolverError(f"solution violates constraint(s) {bad}")
        self.stats["solutions"] += 1
        self.best_assignment = {s.names[x]: v for x, v in asg.items() if x != self.obj_var}
        if self.obj_var is None:
            self.status = "SAT"
            return False
        self.best = self.model.objective_value(asg)
        if s.lvl > 0:
            s.backjump(0)
        x = self.obj_var
        cut = s.ge_lit(x, self.best + 1) if self.sense == "max" else s.le_lit(x, self.best - 1)
        if s.trace is not None:
            s.trace.append(f"solution\t{self.best}\t{s.lit_str(cut)}")
        if s.add_clause([cut]) is False:
            self.status = "OPTIMAL"
            return False
        return True

    def solve(self, max_conflicts=None, timeout_ms=None):
        cfg = self.cfg
        max_conflicts = max_conflicts if max_conflicts is not None else cfg.max_conflicts
        timeout_ms = timeout_ms if timeout_ms is not None else cfg.timeout_ms
        s = self.eng
        db = self.db
        st = self.stats
        t0 = time.perf_counter()
        deadline = t0 + timeout_ms / 1000.0 if timeout_ms else None
        restart_idx = 0
        next_restart = luby(0) * cfg.luby_base
        since_restart = 0
        if self.root_failed:
            self.status = "UNSAT"
        while self.status is None:
            confl = s.propagate()
            if confl is not None:
                st["fails"] += 1
                if s.trace is not None:
                    s.trace.append(f"conflict\t{s.clause_str(confl)}")
                an = db.analyze(confl) if s.lvl > 0 else None
                if an is None:
                    self.status = "UNSAT" if self.best is None else "OPTIMAL"
                    if self.obj_var is None and self.best_assignment is not None:
                        self.status = "SAT"
                    break
                if self.nogood_log is not None:
                    d = s.reg.lit_desc
                    self.nogood_log.append(([d(l) for l in an.lits], self.best))
                if s.trace is not None:
                    self._trace_nogood(an)
                db.learn(an)
                db.decay_all()
                db.reduce_db()
                since_restart += 1
                if max_conflicts is not None and st["fails"] >= max_conflicts:
                    self.status = "UNKNOWN"
                    break
                if deadline is not None and st["fails"] % 64 == 0 and time.perf_counter() > deadline:
                    self.status = "UNKNOWN"
                    break
                if self.heuristic == "vsids" and since_restart >= next_restart and s.lvl > 0:
                    s.backjump(0)
                    st["restarts"] += 1
                    restart_idx += 1
                    next_restart = luby(restart_idx) * cfg.luby_base
                    since_restart = 0
                continue
            lit = self.next_decision()
            if lit is None:
                if not self.on_solution():
                    break
                continue
            st["decisions"] += 1
            s.decide(lit)
        return self._result(time.perf_counter() - t0)

    def _trace_nogood(self, an):
        s = self.eng
        parts = []
        for body, head in an.resolved or []:
            parts.append(s.clause_str(body, head))
        conf = parts[0] if parts else ""
        res = "".join(f" res {p}" for p in parts[1:])
        ng = s.clause_str([l ^ 1 for l in an.lits], FALSE_LIT)
        s.trace.append(f"NG {self.db.n_learned} : {conf}{res} => {ng} @{an.level}")

    def _result(self, secs):
        s = self.eng
        reg = s.reg
        st = dict(
            status=self.status,
            best_objective=self.best,
            fails=self.stats["fails"],
            decisions=self.stats["decisions"],
            propagations=s.n_props,
            restarts=self.stats["restarts"],
            psum_created=reg.n_psum_created,
            psum_collected=reg.n_psum_collected,
            ext_created=reg.n_ext_created,
            ext_collected=reg.n_ext_collected,
            nogoods_learned=self.db.n_learned,
            nogoods_deleted=self.db.n_deleted,
            wall_ms=round(secs * 1000.0, 3),
        )
        return SolveResult(self.status, self.best, self.best_assignment, st)


def solve(model: ModelInstance, cfg: SolverConfig = None, **kw) -> SolveResult:
    return Solver(model, cfg).solve(**kw)
