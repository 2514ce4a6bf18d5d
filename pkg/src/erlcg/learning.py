"""1UIP conflict analysis and the learned-nogood database."""

from __future__ import annotations

from dataclasses import dataclass
from heapq import heappop, heappush

from .atoms import FALSE_LIT, TRUE_LIT
from .engine import Clause, SolverError

RESCALE = 1e100


@dataclass
class Analysis:
    lits: list  # learned clause, asserting literal first
    level: int  # assertion (backjump) level
    lbd: int
    resolved: list  # (antecedents, literal) operands, in resolution order


class NogoodDB:
    def __init__(self, eng, cap=2000, decay=0.999, bump=None, record_resolution=False):
        self.eng = eng
        self.cap = cap
        self.decay = decay
        self.var_inc = 1.0
        self.cla_inc = 1.0
        self.bump_hook = bump
        self.record_resolution = record_resolution
        self.n_learned = 0
        self.n_deleted = 0
        self.n_reductions = 0

    # -- analysis ------------------------------------------------------------

    def bump_atom(self, a):
        act = self.eng.reg.activity
        act[a] += self.var_inc
        if act[a] > RESCALE:
            for i in range(len(act)):
                act[i] *= 1.0 / RESCALE
            self.var_inc /= RESCALE
        if self.bump_hook is not None:
            self.bump_hook(a)

    def analyze(self, conflict):
        """Resolve the conflict (a list of true literals) back to its 1UIP.

        Returns an ``Analysis``, or None when the conflict does not depend on
        any decision (unsatisfiable under the root facts).
        """
        s = self.eng
        s.begin_analysis()
        while True:
            res = self._analyze_at(conflict)
            if res is not None:
                return res
            # no literal from the current level: the conflict already held lower down
            top = 0
            for l in conflict:
                if l != TRUE_LIT:
                    top = max(top, s.locate(l)[1])
            if top == 0:
                return None
            s.backjump(top)
            s.begin_analysis()

    def _analyze_at(self, conflict):
        s = self.eng
        lvl = s.lvl
        if lvl == 0:
            return None
        seen = set()
        heap = []
        out = []
        resolved = [] if self.record_resolution else None

        def add(l):
            if l == TRUE_LIT or l in seen:
                return
            if l == FALSE_LIT:
                raise SolverError("FALSE literal in an antecedent set")
            seen.add(l)
            pos, lv, _ = s.locate(l)
            if lv == 0:
                return
            self.bump_atom(l >> 1)
            if lv == lvl:
                heappush(heap, (-pos[0], -pos[1], l))
            else:
                out.append((lv, l))

        for l in conflict:
            add(l)
        if not heap:
            return None
        if resolved is not None:
            resolved.append((list(conflict), FALSE_LIT))
        while len(heap) > 1:
            _, _, l = heappop(heap)
            src = s.locate(l)[2]
            if src[0] == "trail":
                r = s.reasons[src[1]]
                if type(r) is Clause and r.learnt:
                    r.activity += self.cla_inc
            body = s.antecedents(l)
            if resolved is not None:
                resolved.append((list(body), l))
            for b in body:
                add(b)
        uip = heap[0][2]
        out.sort(key=lambda t: -t[0])
        lits = [uip ^ 1] + [l ^ 1 for _, l in out]
        level = out[0][0] if out else 0
        lbd = len({lv for lv, _ in out}) + 1
        return Analysis(lits, level, lbd, resolved)

    # -- database ------------------------------------------------------------

    def learn(self, an):
        """Backjump, attach the nogood and assert its first literal."""
        s = self.eng
        if an.level < s.lvl:
            s.backjump(an.level)
        c = s.add_clause(an.lits, learnt=True)
        c.lbd = an.lbd
        c.activity = self.cla_inc
        occ = s.reg.occ
        owner = s.reg.owner
        for a in {l >> 1 for l in an.lits}:
            occ[a] += 1
            if occ[a] == 1 and owner[a] >= 0:
                s.props[owner[a]].on_use(s, a)
        self.n_learned += 1
        # atoms created during this analysis that remain assigned become
        # visible to clauses and their channelers
        tr = s.truth
        for lit in s.virt_new:
            if tr[lit] == 1:
                s.pending.append(lit)
                s.touch(lit >> 1)
        s.virt_new = []
        if not s.set_lit(an.lits[0], c):
            raise SolverError("asserting literal is false after backjump")
        return c

    def decay_all(self):
        self.var_inc /= self.decay
        self.cla_inc /= self.decay
        if self.cla_inc > RESCALE:
            for c in self.eng.learnts:
                c.activity /= RESCALE
            self.cla_inc /= RESCALE

    def bump_clause(self, c):
        c.activity += self.cla_inc

    def reduce_db(self, force=False):
        """Drop the less useful half of the learned nogoods, then collect
        extension atoms that no longer occur in any nogood."""
        s = self.eng
        if len(s.learnts) <= self.cap and not force:
            return 0, 0
        keep = []
        cand = []
        for c in s.learnts:
            if c.locked > 0 or len(c.lits) <= 2:
                keep.append(c)
            else:
                cand.append(c)
        cand.sort(key=lambda c: (c.lbd, -c.activity, c.id))
        half = len(cand) // 2
        keep.extend(cand[:len(cand) - half])
        dropped = cand[len(cand) - half:]
        occ = s.reg.occ
        touched = set()
        for c in dropped:
            c.deleted = True
            for a in {l >> 1 for l in c.lits}:
                occ[a] -= 1
            touched.add(c.lits[0])
            touched.add(c.lits[1])
        for l in touched:
            s.watches[l] = [c for c in s.watches[l] if not c.deleted]
        keep.sort(key=lambda c: c.id)
        s.learnts = keep
        self.n_deleted += len(dropped)
        self.n_reductions += 1
        self.cap = int(self.cap * 1.5)
        released = {a for c in dropped for l in c.lits if occ[(a := l >> 1)] == 0}
        removed = s.reg.gc_unused()
        owners = {s.reg.owner[a] for a in removed} | {s.reg.owner[a] for a in released}
        for o in sorted(owners):
            if o >= 0:
                s.props[o].on_gc(s)
        return len(dropped), len(removed)
