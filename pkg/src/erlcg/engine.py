"""Domains, trail, clause propagation and backjumping.

Domain literals are never materialized eagerly. Each variable keeps a history
of its lower and upper bounds (value, trail position) plus the positions at
which values were removed; a literal such as ``x>=3`` that was never trailed
itself is located in the implication graph by looking up the trail entry that
first implied it (``locate``). Such derived literals sit at virtual positions
``(p, s)`` right after their antecedents, which keeps 1UIP resolution in a
valid topological order without touching the trail.
"""

from __future__ import annotations

from bisect import bisect_left
from heapq import heappop, heappush

from .atoms import (
    CONST, EQ, FALSE_LIT, GE, TRUE_LIT, AtomRegistry, BoundGeq, Eq, clause_str,
)


class SolverError(RuntimeError):
    """Internal invariant violation (search or propagator bug)."""


class Clause:
    __slots__ = ("lits", "learnt", "activity", "lbd", "locked", "id", "deleted")

    def __init__(self, lits, learnt=False, cid=-1):
        self.lits = lits
        self.learnt = learnt
        self.activity = 0.0
        self.lbd = 0
        self.locked = 0
        self.id = cid
        self.deleted = False

    def __repr__(self):
        return f"Clause({self.id}, {self.lits})"


ROOT_POS = (-1, 0)


class Engine:
    """Single-threaded propagation engine over integer variables and atoms."""

    def __init__(self, lbs, ubs, checkpoints=None, names=None):
        n = len(lbs)
        self.nvars = n
        self.names = list(names) if names else [f"v{i}" for i in range(n)]
        self.init_lb = list(lbs)
        self.init_ub = list(ubs)
        self.lb = list(lbs)
        self.ub = list(ubs)
        self.lbh_val = [[v] for v in lbs]
        self.lbh_pos = [[-1] for _ in lbs]
        self.ubh_nval = [[-v] for v in ubs]  # negated so that bisect works on increasing lists
        self.ubh_pos = [[-1] for _ in ubs]
        self.ne_pos = [dict() for _ in range(n)]

        self.reg = AtomRegistry(n, checkpoints)
        self.truth = self.reg.truth
        self.watches = [[], []]

        self.trail = []
        self.reasons = []
        self.tlevel = []
        self.undo = []
        self.expl_cache = []
        self.lim = [0]
        self.lvl = 0
        self.level_atoms = [[]]

        self.pending = []
        self.qhead = 0
        self.props = []
        self.var_props = [[] for _ in range(n)]
        self.dirty = []
        self.dirty_heap = []
        self.conflict = None

        self.clauses = []
        self.learnts = []
        self.next_clause_id = 0
        self.n_props = 0
        self.expl_log = None  # list of (constraint id, body, head) when enabled
        self.trace = None  # list of text lines when enabled
        self.virt_new = []
        self.on_unassign = None
        self._loc_cache = {}
        self.expl_epoch = 0

    # ------------------------------------------------------------------
    # literal construction

    def _intern(self, desc, owner=-1):
        reg = self.reg
        a = reg.intern(desc, owner)
        w = self.watches
        while len(w) < 2 * len(reg.kind):
            w.append([])
        return a

    def ge_lit(self, x, v):
        """Literal for x >= v."""
        if v <= self.init_lb[x]:
            return TRUE_LIT
        if v > self.init_ub[x]:
            return FALSE_LIT
        a = self.reg.ge_atoms[x].get(v)
        if a is None:
            a = self._intern(BoundGeq(x, v))
            self._init_dom_truth(a)
        return a << 1

    def le_lit(self, x, v):
        return self.ge_lit(x, v + 1) ^ 1

    def eq_lit(self, x, v):
        if v < self.init_lb[x] or v > self.init_ub[x]:
            return FALSE_LIT
        if self.init_lb[x] == self.init_ub[x]:
            return TRUE_LIT
        a = self.reg.eq_atoms[x].get(v)
        if a is None:
            a = self._intern(Eq(x, v))
            self._init_dom_truth(a)
        return a << 1

    def ne_lit(self, x, v):
        return self.eq_lit(x, v) ^ 1

    def _lb_level(self, x, v):
        """Decision level at which lb(x) first reached v (lb(x) >= v now)."""
        p = self.lbh_pos[x][bisect_left(self.lbh_val[x], v)]
        return self.tlevel[p] if p >= 0 else 0

    def _ub_level(self, x, v):
        p = self.ubh_pos[x][bisect_left(self.ubh_nval[x], -v)]
        return self.tlevel[p] if p >= 0 else 0

    def _init_dom_truth(self, a):
        reg = self.reg
        x, v = reg.var[a], reg.val[a]
        lb, ub = self.lb[x], self.ub[x]
        if reg.kind[a] == GE:
            if lb >= v:
                self._assign(a, 1, self._lb_level(x, v), queue=False)
            elif ub < v:
                self._assign(a, -1, self._ub_level(x, v - 1), queue=False)
        else:
            if lb == ub == v:
                self._assign(a, 1, max(self._lb_level(x, v), self._ub_level(x, v)), queue=False)
            elif v < lb or v > ub or v in self.ne_pos[x]:
                levels = []
                if v < lb:
                    levels.append(self._lb_level(x, v + 1))
                if v > ub:
                    levels.append(self._ub_level(x, v - 1))
                p = self.ne_pos[x].get(v)
                if p is not None:
                    levels.append(self.tlevel[p])
                self._assign(a, -1, min(levels), queue=False)

    def _assign(self, a, t, level, queue=True):
        tr = self.truth
        tr[2 * a] = t
        tr[2 * a + 1] = -t
        self.reg.level[a] = level
        self.level_atoms[level].append(a)
        if queue:
            self.pending.append(2 * a if t == 1 else 2 * a + 1)

    def value(self, lit):
        return self.truth[lit]

    def is_fixed(self, x):
        return self.lb[x] == self.ub[x]

    def in_domain(self, x, v):
        return self.lb[x] <= v <= self.ub[x] and v not in self.ne_pos[x]

    def domain(self, x):
        ne = self.ne_pos[x]
        return [v for v in range(self.lb[x], self.ub[x] + 1) if v not in ne]

    # ------------------------------------------------------------------
    # propagator registry

    def add_propagator(self, prop, watched_vars):
        pid = len(self.props)
        self.props.append(prop)
        self.dirty.append(False)
        for x in set(watched_vars):
            self.var_props[x].append(pid)
        self.wake(pid)
        return pid

    def wake(self, pid):
        if not self.dirty[pid]:
            self.dirty[pid] = True
            heappush(self.dirty_heap, pid)

    def _wake_var(self, x):
        d = self.dirty
        for pid in self.var_props[x]:
            if not d[pid]:
                d[pid] = True
                heappush(self.dirty_heap, pid)

    # ------------------------------------------------------------------
    # trail

    @property
    def level(self):
        return self.lvl

    def _push(self, lit, reason):
        p = len(self.trail)
        self.trail.append(lit)
        self.reasons.append(reason)
        self.tlevel.append(self.lvl)
        self.expl_cache.append(None)
        if reason is not None:
            self.n_props += 1
            if type(reason) is Clause:
                reason.locked += 1
        if self.trace is not None:
            self.trace.append(f"{self.lvl}\t{self.lit_str(lit)}\t{self._reason_tag(reason)}")
        return p

    def _reason_tag(self, reason):
        if reason is None:
            return "decision"
        if type(reason) is Clause:
            return f"clause:{reason.id}"
        return f"prop:{self.props[reason[0]].cid}"

    def decide(self, lit):
        if self.truth[lit] != 0:
            raise SolverError(f"decision on assigned literal {self.lit_str(lit)}")
        if self.qhead < len(self.pending) or self.dirty_heap:
            raise SolverError("decision with pending propagation")
        self.lvl += 1
        self.lim.append(len(self.trail))
        self.level_atoms.append([])
        self.set_lit(lit, None)

    def enqueue(self, lit, reason):
        """Make ``lit`` true; returns False (and sets ``conflict``) if it is false."""
        return self.set_lit(lit, reason)

    def set_lit(self, lit, reason):
        t = self.truth[lit]
        if t == 1:
            return True
        if t == -1:
            if reason is None:
                raise SolverError(f"decision on false literal {self.lit_str(lit)}")
            body = self.reason_body(lit, reason, len(self.trail))
            body.append(lit ^ 1)
            self.conflict = body
            return False
        a = lit >> 1
        reg = self.reg
        k = reg.kind[a]
        p = self._push(lit, reason)
        if k == GE:
            x = reg.var[a]
            if lit & 1:
                self._lower_ub(x, reg.val[a] - 1, p, 0)
            else:
                self._raise_lb(x, reg.val[a], p, 0)
        elif k == EQ:
            x = reg.var[a]
            if lit & 1:
                self._remove(x, reg.val[a], p)
            else:
                self._fix(x, reg.val[a], p)
        else:
            self.undo.append((-1, 0, 0))
            reg.tpos[a] = p
            self._assign(a, -1 if lit & 1 else 1, self.lvl)
            o = reg.owner[a]
            if o >= 0:
                if type(reason) is not tuple or reason[0] != o:
                    self.touch(a)
                else:
                    self.wake(o)
        return True

    def touch(self, a):
        """Tell the owner of extension atom a that it was assigned from outside."""
        o = self.reg.owner[a]
        if o >= 0:
            notes = self.props[o].notes
            if notes is not None:
                notes.append(a)
            self.wake(o)

    def _raise_lb(self, x, v, p, code):
        old = self.lb[x]
        ne = self.ne_pos[x]
        while v in ne:
            v += 1
        self.lbh_val[x].append(v)
        self.lbh_pos[x].append(p)
        self.lb[x] = v
        if code >= 0:
            self.undo.append((x, code | 1, 0))
        lvl = self.lvl
        tr = self.truth
        ge = self.reg.ge_atoms[x]
        if ge:
            if v - old <= len(ge):
                for w in range(old + 1, v + 1):
                    a = ge.get(w)
                    if a is not None and tr[2 * a] == 0:
                        self._assign(a, 1, lvl)
            else:
                for w, a in ge.items():
                    if old < w <= v and tr[2 * a] == 0:
                        self._assign(a, 1, lvl)
        eq = self.reg.eq_atoms[x]
        if eq:
            if v - old <= len(eq):
                for w in range(old, v):
                    a = eq.get(w)
                    if a is not None and tr[2 * a] == 0:
                        self._assign(a, -1, lvl)
            else:
                for w, a in eq.items():
                    if old <= w < v and tr[2 * a] == 0:
                        self._assign(a, -1, lvl)
            if v == self.ub[x]:
                a = eq.get(v)
                if a is not None and tr[2 * a] == 0:
                    self._assign(a, 1, lvl)
        self._wake_var(x)

    def _lower_ub(self, x, v, p, code):
        old = self.ub[x]
        ne = self.ne_pos[x]
        while v in ne:
            v -= 1
        self.ubh_nval[x].append(-v)
        self.ubh_pos[x].append(p)
        self.ub[x] = v
        if code >= 0:
            self.undo.append((x, code | 2, 0))
        lvl = self.lvl
        tr = self.truth
        ge = self.reg.ge_atoms[x]
        if ge:
            if old - v <= len(ge):
                for w in range(v + 1, old + 1):
                    a = ge.get(w)
                    if a is not None and tr[2 * a] == 0:
                        self._assign(a, -1, lvl)
            else:
                for w, a in ge.items():
                    if v < w <= old and tr[2 * a] == 0:
                        self._assign(a, -1, lvl)
        eq = self.reg.eq_atoms[x]
        if eq:
            if old - v <= len(eq):
                for w in range(v + 1, old + 1):
                    a = eq.get(w)
                    if a is not None and tr[2 * a] == 0:
                        self._assign(a, -1, lvl)
            else:
                for w, a in eq.items():
                    if v < w <= old and tr[2 * a] == 0:
                        self._assign(a, -1, lvl)
            if v == self.lb[x]:
                a = eq.get(v)
                if a is not None and tr[2 * a] == 0:
                    self._assign(a, 1, lvl)
        self._wake_var(x)

    def _fix(self, x, v, p):
        code = 0
        if v > self.lb[x]:
            self._raise_lb(x, v, p, -1)
            code |= 1
        if v < self.ub[x]:
            self._lower_ub(x, v, p, -1)
            code |= 2
        self.undo.append((x, code, 0))

    def _remove(self, x, v, p):
        self.ne_pos[x][v] = p
        a = self.reg.eq_atoms[x].get(v)
        if a is not None and self.truth[2 * a] == 0:
            self._assign(a, -1, self.lvl)
        if v == self.lb[x]:
            self._raise_lb(x, v + 1, p, -1)
            self.undo.append((x, 4 | 1, v))
        elif v == self.ub[x]:
            self._lower_ub(x, v - 1, p, -1)
            self.undo.append((x, 4 | 2, v))
        else:
            self.undo.append((x, 4, v))
            self._wake_var(x)

    def backjump(self, target):
        if target >= self.lvl:
            raise SolverError(f"backjump to {target} from level {self.lvl}")
        if target < 0:
            raise SolverError("negative backjump target")
        stop = self.lim[target + 1] if target + 1 < len(self.lim) else len(self.trail)
        reg = self.reg
        for p in range(len(self.trail) - 1, stop - 1, -1):
            x, code, v = self.undo[p]
            if x >= 0:
                if code & 1:
                    self.lbh_val[x].pop()
                    self.lbh_pos[x].pop()
                    self.lb[x] = self.lbh_val[x][-1]
                if code & 2:
                    self.ubh_nval[x].pop()
                    self.ubh_pos[x].pop()
                    self.ub[x] = -self.ubh_nval[x][-1]
                if code & 4:
                    del self.ne_pos[x][v]
            else:
                reg.tpos[self.trail[p] >> 1] = -1
            r = self.reasons[p]
            if type(r) is Clause:
                r.locked -= 1
        del self.trail[stop:]
        del self.reasons[stop:]
        del self.tlevel[stop:]
        del self.undo[stop:]
        del self.expl_cache[stop:]
        tr = self.truth
        cb = self.on_unassign
        for lvl in range(self.lvl, target, -1):
            for a in self.level_atoms[lvl]:
                if cb is not None:
                    cb(a)
                tr[2 * a] = 0
                tr[2 * a + 1] = 0
                reg.level[a] = -1
                reg.virtual.pop(a, None)
            self.level_atoms.pop()
        del self.lim[target + 1:]
        self.lvl = target
        self.pending = []
        self.qhead = 0
        self._loc_cache = {}
        self.expl_epoch += 1
        for pid in self.dirty_heap:
            self.dirty[pid] = False
        self.dirty_heap = []
        self.conflict = None

    # ------------------------------------------------------------------
    # clauses

    def add_clause(self, lits, learnt=False):
        """Attach a clause. At level 0 the clause is simplified first.

        Returns the Clause (or None if it was satisfied / absorbed); sets
        ``conflict`` and returns False if it is falsified at the root.
        """
        tr = self.truth
        if self.lvl == 0 and not learnt:
            out = []
            for l in lits:
                if tr[l] == 1:
                    return None
                if tr[l] == 0 and l not in out:
                    out.append(l)
            lits = out
            if not lits:
                self.conflict = []
                return False
        c = Clause(list(lits), learnt, self.next_clause_id)
        self.next_clause_id += 1
        if len(c.lits) >= 2:
            self.watches[c.lits[0]].append(c)
            self.watches[c.lits[1]].append(c)
        (self.learnts if learnt else self.clauses).append(c)
        if len(c.lits) == 1 and not learnt:
            if not self.set_lit(c.lits[0], c):
                return False
        return c

    def _prop_clauses(self, f):
        """Visit clauses watching the now-false literal ``f``."""
        ws = self.watches[f]
        tr = self.truth
        watches = self.watches
        i = j = 0
        n = len(ws)
        while i < n:
            c = ws[i]
            i += 1
            if c.deleted:
                continue
            lits = c.lits
            if lits[0] == f:
                lits[0] = lits[1]
                lits[1] = f
            first = lits[0]
            if tr[first] == 1:
                ws[j] = c
                j += 1
                continue
            for k in range(2, len(lits)):
                l = lits[k]
                if tr[l] != -1:
                    lits[1] = l
                    lits[k] = f
                    watches[l].append(c)
                    break
            else:
                ws[j] = c
                j += 1
                if tr[first] == -1:
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    self.conflict = [l ^ 1 for l in lits]
                    return False
                self.set_lit(first, c)
        del ws[j:]
        return True

    # ------------------------------------------------------------------
    # propagation

    def infer(self, lit, pid, payload):
        if self.truth[lit] == 1:
            return True
        return self.set_lit(lit, (pid, payload))

    def fail(self, pid, payload):
        self.conflict = self.reason_body(FALSE_LIT, (pid, payload), len(self.trail))
        return False

    def propagate(self):
        """Run clauses and propagators to a joint fixpoint; returns the conflict body or None."""
        props = self.props
        while True:
            pend = self.pending
            while self.qhead < len(pend):
                t = pend[self.qhead]
                self.qhead += 1
                if not self._prop_clauses(t ^ 1):
                    return self.conflict
            if not self.dirty_heap:
                self.pending = []
                self.qhead = 0
                return None
            pid = heappop(self.dirty_heap)
            self.dirty[pid] = False
            if not props[pid].propagate(self):
                return self.conflict

    # ------------------------------------------------------------------
    # explanations and implication-graph lookups

    def reason_body(self, lit, reason, q):
        """Antecedents (true literals) of ``lit`` for a materialized reason at time q."""
        if type(reason) is Clause:
            return [l ^ 1 for l in reason.lits if l != lit]
        pid, payload = reason
        prop = self.props[pid]
        body = [b for b in prop.explain(self, payload, lit, q) if b != TRUE_LIT]
        if self.expl_log is not None:
            self.log_expl(prop.cid, body, lit)
        return body

    def log_expl(self, cid, body, head):
        d = self.reg.lit_desc
        self.expl_log.append((cid, [d(b) for b in body], d(head)))

    def trail_body(self, p):
        """Materialized antecedents of the trail entry at position p."""
        body = self.expl_cache[p]
        if body is None:
            r = self.reasons[p]
            if r is None:
                raise SolverError("decision literals have no explanation")
            body = self.reason_body(self.trail[p], r, p)
            self.expl_cache[p] = body
        return body

    def begin_analysis(self):
        self._loc_cache = {}

    def locate(self, lit):
        """``(position, level, source)`` for a true literal.

        ``source`` is ``("trail", p)`` for trailed literals or ``("body", lits)``
        for literals derived from their antecedents.
        """
        r = self._loc_cache.get(lit)
        if r is None:
            r = self._locate(lit)
            self._loc_cache[lit] = r
        return r

    def _derived(self, body):
        body = [b for b in body if b != TRUE_LIT]
        best = ROOT_POS
        for b in body:
            pos = self.locate(b)[0]
            if pos > best:
                best = pos
        pos = (best[0], best[1] + 1)
        level = self.tlevel[best[0]] if best[0] >= 0 else 0
        return pos, level, ("body", body)

    def _direct(self, p):
        return (p, 0), self.tlevel[p], ("trail", p)

    def _locate(self, lit):
        if self.truth[lit] != 1:
            raise SolverError(f"locate on non-true literal {self.lit_str(lit)}")
        reg = self.reg
        a = lit >> 1
        k = reg.kind[a]
        if k == CONST:
            return ROOT_POS, 0, ("body", [])
        if k == GE:
            x, v = reg.var[a], reg.val[a]
            if lit & 1:
                return self._locate_ub(x, v - 1, lit)
            return self._locate_lb(x, v, lit)
        if k == EQ:
            x, v = reg.var[a], reg.val[a]
            if lit & 1:
                return self._locate_ne(x, v)
            return self._locate_eq(x, v, lit)
        p = reg.tpos[a]
        if p >= 0:
            return self._direct(p)
        pos, body = reg.virtual[a]
        return pos, (self.tlevel[pos[0]] if pos[0] >= 0 else 0), ("body", body)

    def _locate_lb(self, x, w, lit):
        i = bisect_left(self.lbh_val[x], w)
        p = self.lbh_pos[x][i]
        if p < 0:
            return ROOT_POS, 0, ("body", [])
        cause = self.trail[p]
        if cause == lit:
            return self._direct(p)
        reg = self.reg
        ca = cause >> 1
        if reg.kind[ca] == GE and not cause & 1:
            v = reg.val[ca]
            if v >= w:
                return self._derived([cause])
            return self._derived([cause] + [self.ne_lit(x, u) for u in range(v, w)])
        if not cause & 1:  # x = u
            return self._derived([cause])
        u = reg.val[ca]  # x != u removed the old lower bound u
        return self._derived([self.ge_lit(x, u), cause] + [self.ne_lit(x, t) for t in range(u + 1, w)])

    def _locate_ub(self, x, w, lit):
        i = bisect_left(self.ubh_nval[x], -w)
        p = self.ubh_pos[x][i]
        if p < 0:
            return ROOT_POS, 0, ("body", [])
        cause = self.trail[p]
        if cause == lit:
            return self._direct(p)
        reg = self.reg
        ca = cause >> 1
        if reg.kind[ca] == GE:  # x <= v
            v = reg.val[ca] - 1
            if v <= w:
                return self._derived([cause])
            return self._derived([cause] + [self.ne_lit(x, u) for u in range(w + 1, v + 1)])
        if not cause & 1:
            return self._derived([cause])
        u = reg.val[ca]
        return self._derived([self.le_lit(x, u), cause] + [self.ne_lit(x, t) for t in range(w + 1, u)])

    def _locate_eq(self, x, v, lit):
        pl = self.lbh_pos[x][bisect_left(self.lbh_val[x], v)]
        pu = self.ubh_pos[x][bisect_left(self.ubh_nval[x], -v)]
        for p in (pl, pu):
            if p >= 0 and self.trail[p] == lit:
                return self._direct(p)
        return self._derived([self.ge_lit(x, v), self.le_lit(x, v)])

    def _locate_ne(self, x, v):
        best = None
        pn = self.ne_pos[x].get(v)
        if pn is not None:
            best = (pn, 0)
        i = bisect_left(self.lbh_val[x], v + 1)
        if i < len(self.lbh_val[x]):
            pl = self.lbh_pos[x][i]
            if best is None or pl < best[0]:
                best = (pl, 1)
        j = bisect_left(self.ubh_nval[x], -(v - 1))
        if j < len(self.ubh_nval[x]):
            pu = self.ubh_pos[x][j]
            if best is None or pu < best[0]:
                best = (pu, 2)
        if best is None:
            raise SolverError("value not removed")
        if best[1] == 0:
            return self._direct(pn)
        if best[1] == 1:
            return self._derived([self.ge_lit(x, v + 1)])
        return self._derived([self.le_lit(x, v - 1)])

    def explain_domain(self, lit):
        """Single-step channel explanation of a domain literal made true by
        domain arithmetic; returns the antecedent list."""
        pos, level, src = self.locate(lit)
        if src[0] == "trail":
            p = src[1]
            if self.reasons[p] is None:
                raise SolverError("decision literals have no domain explanation")
            raise SolverError("literal was enqueued directly; use its reason")
        return src[1]

    def antecedents(self, lit):
        pos, level, src = self.locate(lit)
        if src[0] == "trail":
            return self.trail_body(src[1])
        return src[1]

    def true_before(self, lit, q):
        """Whether ``lit`` held at trail time q (strictly before position q)."""
        if self.truth[lit] != 1:
            return False
        return self.locate(lit)[0] < (q, 0)

    def lb_at(self, x, q):
        hp = self.lbh_pos[x]
        if hp[-1] < q:
            return self.lbh_val[x][-1]
        return self.lbh_val[x][bisect_left(hp, q) - 1]

    def ub_at(self, x, q):
        hp = self.ubh_pos[x]
        if hp[-1] < q:
            return -self.ubh_nval[x][-1]
        return -self.ubh_nval[x][bisect_left(hp, q) - 1]

    def make_virtual(self, a, t, body):
        """Assign a lazily created atom true (t=1) or false (t=-1), slotted
        just after its antecedents."""
        pos, level, _ = self._derived(body)
        body = [b for b in body if b != TRUE_LIT]
        self._assign(a, t, level, queue=False)
        self.reg.virtual[a] = (pos, body)
        self.reg.tpos[a] = -1
        lit = 2 * a if t == 1 else 2 * a + 1
        self._loc_cache[lit] = (pos, level, ("body", body))
        self.virt_new.append(lit)
        return lit

    # ------------------------------------------------------------------
    # diagnostics

    def lit_str(self, lit):
        from .atoms import lit_str
        return lit_str(self.reg, lit, self.names)

    def clause_str(self, body, head=FALSE_LIT):
        return clause_str(self.reg, body, head, self.names)

    def dump_atoms(self):
        """Registry dump with each assigned atom's trail position (its slot
        for atoms implied by domain arithmetic or slotted virtually)."""
        def position(a):
            t = self.truth[2 * a]
            if t == 0:
                return -1
            return self.locate(2 * a if t == 1 else 2 * a + 1)[0][0]
        return self.reg.dump(self.names, position)

    def state_signature(self):
        return (tuple(self.lb), tuple(self.ub), tuple(tuple(sorted(d)) for d in self.ne_pos),
                tuple(i for i, t in enumerate(self.truth) if t == 1), len(self.trail))
