"""Explaining propagators.

Every inference carries a ``(pid, payload)`` reason; ``explain(s, payload,
head, q)`` turns it into a list of antecedent literals that were true before
trail position ``q``. Explanations are computed on demand and only look at
the trail prefix, so materializing the same payload twice gives the same
clause.

Linear constraints are handled in a single "LE view": a GE row is negated so
that every linear reads ``sum c_i x_i <= B`` with signed ``c_i``. Prefix sums
of the view (``Q_k``) map onto partial-sum atoms of the original row: for LE
``Q_k >= w`` is ``P_k >= w``, for GE it is ``not P_k >= 1 - w``.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort

from .atoms import DEAD, AtomError, FALSE_LIT, TRUE_LIT, CmpGeq, CmpGt, PsumGeq, Sched, Tuple
from .engine import SolverError
from .model import checkpoints

INF = float("inf")


def head_bound(s, head, x, upper):
    """Bound value h carried by a head literal on variable x.

    ``upper`` heads are ``x <= h``, otherwise ``x >= h``. A constant FALSE head
    (the bound fell outside the initial domain) maps to the first impossible value.
    """
    if head == FALSE_LIT:
        return s.init_lb[x] - 1 if upper else s.init_ub[x] + 1
    v = s.reg.val[head >> 1]
    return v - 1 if upper else v


class Propagator:
    pid = -1
    cid = -1
    con = None
    notes = None  # owned atoms assigned from outside, when the propagator asks for them

    def propagate(self, s):
        return True

    def explain(self, s, payload, head, q):
        raise NotImplementedError

    def on_gc(self, s):
        pass

    def on_use(self, s, a):
        pass

    def _log(self, s, body, head):
        if s.expl_log is not None:
            s.log_expl(self.cid, body, head)


# ----------------------------------------------------------------------------
# linear


class LinearProp(Propagator):
    def __init__(self, s, c, ext=True, lift=True):
        self.con = c
        self.lift = lift
        self.cid = c.id
        sg = 1 if c.relation == "LE" else -1
        self.sgn = sg
        self.cs = [sg * a for a in c.coeffs]
        self.xs = list(c.vars)
        self.B = sg * c.bound
        if c.rhs_var is not None:
            self.cs.append(-sg)
            self.xs.append(c.rhs_var)
        N = len(self.cs)
        self.N = N
        cps = checkpoints(c) if ext else []
        self.cps = cps
        self.bnd = [0] + cps + [N]
        m = len(cps)
        self.m = m
        self.seg = []
        for j in range(1, m + 2):
            self.seg.extend([j] * (self.bnd[j] - self.bnd[j - 1]))
        self.lo0 = [0] * (m + 1)
        self.hi0 = [0] * (m + 1)
        for j in range(1, m + 1):
            lo = hi = 0
            for t in range(self.bnd[j]):
                c_, x = self.cs[t], self.xs[t]
                a, b = c_ * s.init_lb[x], c_ * s.init_ub[x]
                lo += min(a, b)
                hi += max(a, b)
            self.lo0[j], self.hi0[j] = lo, hi
        self.facts = [[] for _ in range(m + 1)]  # (w, lit for "Q_j >= w") sorted by w
        # facts that occur in some nogood; only these can be set from outside
        # the constraint, so only these are channeled
        self.live = [[] for _ in range(m + 1)]
        self.jof = {k: j for j, k in enumerate(self.bnd)}
        # after a full pass the live facts of each prefix are true up to some
        # value and false above another; backjumps, new live facts and
        # collection break that shape, outside assignments only locally
        self.full = True
        self.epoch = -1
        self.notes = []

    # -- atoms ---------------------------------------------------------------

    def view_lit(self, s, j, w):
        """Literal for ``Q_j >= w`` (interning the psum atom if needed)."""
        v = w if self.sgn == 1 else 1 - w
        desc = PsumGeq(self.cid, self.bnd[j], v)
        a = s.reg.lookup(desc)
        if a is None:
            a = s._intern(desc, self.pid)
            lit = 2 * a if self.sgn == 1 else 2 * a + 1
            insort(self.facts[j], (w, lit))
            return lit
        return 2 * a if self.sgn == 1 else 2 * a + 1

    def on_use(self, s, a):
        """Atom a entered its first nogood: start channeling it."""
        d = s.reg.descs[a]
        j = self.jof[d.k]
        if self.sgn == 1:
            insort(self.live[j], (d.v, 2 * a))
        else:
            insort(self.live[j], (1 - d.v, 2 * a + 1))
        self.full = True
        s.wake(self.pid)

    def on_gc(self, s):
        kind, occ = s.reg.kind, s.reg.occ
        self.facts = [[f for f in lst if kind[f[1] >> 1] != DEAD] for lst in self.facts]
        self.live = [[f for f in lst if occ[f[1] >> 1] > 0] for lst in self.facts]
        self.full = True

    # -- propagation ---------------------------------------------------------

    def _terms(self, s):
        lb, ub = s.lb, s.ub
        tl = []
        tu = []
        for c, x in zip(self.cs, self.xs):
            if c > 0:
                tl.append(c * lb[x])
                tu.append(c * ub[x])
            else:
                tl.append(c * ub[x])
                tu.append(c * lb[x])
        return tl, tu

    def register_psum(self, s, k, v):
        """Intern the literal for "prefix of length k >= v" and settle its truth.

        Returns ``(lit, truth, position)``: truth is 1, -1 or 0 and position
        is the trail slot the literal occupies (None while unknown).  A newly
        implied atom is slotted right after its own explanation.
        """
        if k not in self.jof or self.jof[k] in (0, self.m + 1):
            raise AtomError(f"linear {self.cid}: prefix {k} is not a checkpoint")
        j = self.jof[k]
        # in the constraint's own orientation the literal reads Q_j >= w
        w = v if self.sgn == 1 else 1 - v
        L = self.view_lit(s, j, w)
        lit = L if self.sgn == 1 else L ^ 1
        s.begin_analysis()
        if s.truth[lit] == 0:
            tl, tu = self._terms(s)
            st = self._bounds(s, tl, tu, None)[0]
            q = len(s.trail)
            head = None
            if st.FL[j] >= w:
                head, body = L, self.explain_lower(s, q, st, j, w, None)
            elif min(st.FU[j], st.BU[j]) < w:
                head, body = L ^ 1, self.explain_upper(s, q, st, j, w - 1, None, "any")
            if head is not None:
                s.make_virtual(head >> 1, -1 if head & 1 else 1, body)
                self._log(s, body, head)
        t = s.truth[lit]
        return lit, t, (s.locate(lit if t == 1 else lit ^ 1)[0] if t else None)

    def propagate(self, s):
        tl, tu = self._terms(s)
        pid = self.pid
        B = self.B
        m = self.m
        if m == 0:
            total = sum(tl)
            if total > B:
                return s.fail(pid, ("F", None))
            slack = B - total
            for t in range(self.N):
                if tu[t] - tl[t] > slack:
                    if not self._tighten(s, t, slack + tl[t], None):
                        return False
            return True

        if self.full or self.epoch != s.expl_epoch:
            self.full = False
            self.epoch = s.expl_epoch
            dirty = None
        else:
            jof, descs = self.jof, s.reg.descs
            dirty = {jof[descs[a].k] for a in self.notes}
        self.notes.clear()
        st, nt, nf = self._bounds(s, tl, tu, dirty)
        truth = s.truth
        live = self.live
        bnd = self.bnd
        segl, FL, FU, BU = st.segl, st.FL, st.FU, st.BU
        if FL[m] + segl[m + 1] > B:
            return s.fail(pid, ("F", st))

        for j in range(1, m + 1):
            lst = live[j]
            if dirty is None or j in dirty:
                rng = range(len(lst))
            else:
                rng = range(nt[j], bisect_right(lst, (FL[j], INF)))
            for i in rng:
                w, L = lst[i]
                if w > FL[j]:
                    break
                if truth[L] != 1 and not s.infer(L, pid, ("L", st, j, w)):
                    return False
        phases = [(j, FU[j]) for j in range(1, m + 1)] + [(j, BU[j]) for j in range(m, 0, -1)]
        for j, U in phases:
            lst = live[j]
            if dirty is None or j in dirty:
                rng = range(len(lst) - 1, -1, -1)
            else:
                rng = range(nf[j] - 1, bisect_right(lst, (U, INF)) - 1, -1)
            for i in rng:
                w, L = lst[i]
                if w <= U:
                    break
                if truth[L] != -1 and not s.infer(L ^ 1, pid, ("U", st, j, w - 1)):
                    return False
        for j in range(1, m + 2):
            slack = BU[j] - FL[j - 1] - segl[j]
            for t in range(bnd[j - 1], bnd[j]):
                if tu[t] - tl[t] > slack:
                    if not self._tighten(s, t, slack + tl[t], st):
                        return False
        return True

    def _bounds(self, s, tl, tu, dirty):
        """Prefix-sum bounds from term bounds and the live facts.

        Segments outside ``dirty`` (all of them when it is None) are read
        with binary searches, relying on their monotone truth pattern.
        """
        m = self.m
        truth = s.truth
        live = self.live
        bnd = self.bnd
        segl = [0] * (m + 2)
        segu = [0] * (m + 2)
        for j in range(1, m + 2):
            segl[j] = sum(tl[bnd[j - 1]:bnd[j]])
            segu[j] = sum(tu[bnd[j - 1]:bnd[j]])
        fL = [-INF] * (m + 1)
        fU = [INF] * (m + 1)
        nt = [0] * (m + 1)  # length of the true prefix (monotone segments)
        nf = [0] * (m + 1)  # start of the false suffix
        for j in range(1, m + 1):
            lst = live[j]
            n = len(lst)
            if dirty is None or j in dirty:
                for i in range(n - 1, -1, -1):
                    if truth[lst[i][1]] == 1:
                        fL[j] = lst[i][0]
                        break
                for w, L in lst:
                    if truth[L] == -1:
                        fU[j] = w - 1
                        break
                continue
            lo, hi = 0, n
            while lo < hi:
                mid = (lo + hi) >> 1
                if truth[lst[mid][1]] == 1:
                    lo = mid + 1
                else:
                    hi = mid
            nt[j] = lo
            if lo:
                fL[j] = lst[lo - 1][0]
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if truth[lst[mid][1]] == -1:
                    hi = mid
                else:
                    lo = mid + 1
            nf[j] = lo
            if lo < n:
                fU[j] = lst[lo][0] - 1
        FL = [0] * (m + 1)
        FU = [0] * (m + 1)
        for j in range(1, m + 1):
            FL[j] = max(FL[j - 1] + segl[j], fL[j])
            FU[j] = min(FU[j - 1] + segu[j], fU[j])
        BU = [0] * (m + 2)
        BU[m + 1] = self.B
        for j in range(m, 0, -1):
            BU[j] = min(fU[j], BU[j + 1] - segl[j + 1])
        st = _Snap(tl, tu, segl, segu, fL, fU, FL, FU, BU)
        return st, nt, nf

    def _tighten(self, s, t, M, st):
        """Enforce c_t * x_t <= M."""
        c, x = self.cs[t], self.xs[t]
        if c > 0:
            h = M // c
            if h < s.ub[x]:
                return s.infer(s.le_lit(x, h), self.pid, ("T", st, t))
        else:
            h = -(M // -c)
            if h > s.lb[x]:
                return s.infer(s.ge_lit(x, h), self.pid, ("T", st, t))
        return True

    # -- explanation helpers -------------------------------------------------

    def _lift_terms(self, s, q, st, idxs, slack, body, upper=False):
        """Weaken the bound literals of terms ``idxs`` (index order) using ``slack``."""
        for t in idxs:
            c, x = self.cs[t], self.xs[t]
            ac = (c if c > 0 else -c) if self.lift else slack + 1
            if (c > 0) != upper:  # the term's view bound is lb(x): lower it
                v = s.lb_at(x, q) if st is None else (st.tu if upper else st.tl)[t] // c
                r = min(slack // ac, v - s.init_lb[x])
                slack -= r * ac
                lit = s.ge_lit(x, v - r)
            else:  # view bound is ub(x): raise it
                v = s.ub_at(x, q) if st is None else (st.tu if upper else st.tl)[t] // c
                r = min(slack // ac, s.init_ub[x] - v)
                slack -= r * ac
                lit = s.le_lit(x, v + r)
            if lit != TRUE_LIT:
                body.append(lit)
        return slack

    def _lower_fact(self, s, q, st, j, w, slack, body):
        """Add ``Q_j >= w - slack`` (weakened as far as possible); returns slack left."""
        if j == 0:
            return slack
        lo = self.lo0[j]
        if w - slack <= lo:
            return slack - (w - lo)
        body.extend(self._fact_lit(s, q, st, j, "L", w - slack, "any"))
        return 0

    def _upper_fact(self, s, q, st, j, u, slack, body, mode):
        if j == 0 or j > self.m:
            return slack
        hi = self.hi0[j]
        if u + slack >= hi:
            return slack - (hi - u)
        body.extend(self._fact_lit(s, q, st, j, "U", u + slack, mode))
        return 0

    def _fact_lit(self, s, q, st, j, kind, val, mode):
        """Literals establishing ``Q_j >= val`` (kind L) or ``Q_j <= val`` (kind U) at time q.

        Reuses a registered psum atom when one held before q; otherwise the
        atom is created on demand, slotted after its own explanation.
        """
        if kind == "L":
            lit = self.view_lit(s, j, val)
        else:
            lit = self.view_lit(s, j, val + 1) ^ 1
        t = s.truth[lit]
        if t == 1 and s.true_before(lit, q):
            return [lit]
        if kind == "L":
            body = self.explain_lower(s, q, st, j, val, None)
        else:
            body = self.explain_upper(s, q, st, j, val, None, mode)
        if t == 0:
            s.make_virtual(lit >> 1, -1 if lit & 1 else 1, body)
            self._log(s, body, lit)
            return [lit]
        return body

    # -- explanations ----------------------------------------------------------

    def explain(self, s, payload, head, q):
        tag, st = payload[0], payload[1]
        if tag == "T":
            return self._explain_term(s, q, st, payload[2], head)
        if tag == "F":
            return self._explain_fail(s, q, st)
        if tag == "L":
            return self.explain_lower(s, q, st, payload[2], payload[3], head)
        return self.explain_upper(s, q, st, payload[2], payload[3], head, "any")

    def _term_lbs(self, s, q, idxs):
        tot = 0
        for t in idxs:
            c, x = self.cs[t], self.xs[t]
            tot += c * (s.lb_at(x, q) if c > 0 else s.ub_at(x, q))
        return tot

    def _explain_fail(self, s, q, st):
        body = []
        m = self.m
        if st is None:
            idxs = range(self.N)
            slack = self._term_lbs(s, q, idxs) - (self.B + 1)
            self._lift_terms(s, q, st, idxs, slack, body)
            return body
        lo = st.FL[m]
        slack = lo + st.segl[m + 1] - (self.B + 1)
        if slack < 0:
            raise SolverError(f"linear {self.cid}: failure not entailed at {q}")
        slack = self._lower_fact(s, q, st, m, lo, slack, body)
        self._lift_terms(s, q, st, range(self.bnd[m], self.N), slack, body)
        return body

    def _explain_term(self, s, q, st, t, head):
        c, x = self.cs[t], self.xs[t]
        h = head_bound(s, head, x, c > 0)
        mmax = c * h + abs(c) - 1
        body = []
        if st is None:
            idxs = [i for i in range(self.N) if i != t]
            slack = self._term_lbs(s, q, idxs) - (self.B - mmax)
            if slack < 0:
                raise SolverError(f"linear {self.cid}: bound on term {t} not entailed at {q}")
            self._lift_terms(s, q, st, idxs, slack, body)
            return body
        j = self.seg[t]
        m = self.m
        tl, segl, fU = st.tl, st.segl, st.fU
        lo = st.FL[j - 1]
        acc = segl[j] - tl[t]
        r = j
        while r <= m:
            if lo + acc >= fU[r] - mmax:
                break
            r += 1
            acc += segl[r]
        U = fU[r] if r <= m else self.B
        slack = lo + acc - (U - mmax)
        if slack < 0:
            raise SolverError(f"linear {self.cid}: bound on term {t} not entailed at {q}")
        slack = self._lower_fact(s, q, st, j - 1, lo, slack, body)
        idxs = [i for i in range(self.bnd[j - 1], self.bnd[r]) if i != t]
        slack = self._lift_terms(s, q, st, idxs, slack, body)
        self._upper_fact(s, q, st, r, U, slack, body, "B")
        return body

    def explain_lower(self, s, q, st, j, w, exclude):
        """Antecedents of ``Q_j >= w`` at time q."""
        L = self._ge_fact(s, q, st, j, w, exclude)
        if L is not None:
            return [L]
        lo = st.FL[j - 1]
        slack = lo + st.segl[j] - w
        if slack < 0:
            raise SolverError(f"linear {self.cid}: prefix bound Q_{j} >= {w} not entailed at {q}")
        body = []
        slack = self._lower_fact(s, q, st, j - 1, lo, slack, body)
        self._lift_terms(s, q, st, range(self.bnd[j - 1], self.bnd[j]), slack, body)
        return body

    def explain_upper(self, s, q, st, j, u, exclude, mode):
        """Antecedents of ``Q_j <= u`` at time q (mode restricts the direction)."""
        L = self._le_fact(s, q, st, j, u, exclude)
        if L is not None:
            return [L]
        m = self.m
        segl, fU = st.segl, st.fU
        body = []
        if mode != "F":
            acc = segl[j + 1]
            r = j + 1
            while r <= m and fU[r] - acc > u:
                r += 1
                acc += segl[r]
            U = fU[r] if r <= m else self.B
            if U - acc <= u:
                slack = u - (U - acc)
                slack = self._upper_fact(s, q, st, r, U, slack, body, "B")
                self._lift_terms(s, q, st, range(self.bnd[j], self.bnd[r]), slack, body)
                return body
        hi = st.FU[j - 1]
        slack = u - (hi + st.segu[j])
        if slack < 0:
            raise SolverError(f"linear {self.cid}: prefix bound Q_{j} <= {u} not entailed at {q}")
        slack = self._upper_fact(s, q, st, j - 1, hi, slack, body, "F")
        self._lift_terms(s, q, st, range(self.bnd[j - 1], self.bnd[j]), slack, body, upper=True)
        return body

    def _ge_fact(self, s, q, st, j, w, exclude):
        """Literal of the weakest registered fact Q_j >= w' (w' >= w) true before q."""
        if j == 0 or st.FL[j] < w:
            return None
        truth = s.truth
        facts = self.facts[j]
        top = st.FL[j]
        for i in range(bisect_left(facts, (w, -1)), len(facts)):
            if facts[i][0] > top:
                break
            L = facts[i][1]
            if L != exclude and truth[L] == 1 and s.true_before(L, q):
                return L
        return None

    def _le_fact(self, s, q, st, j, u, exclude):
        """Literal of the weakest registered fact Q_j <= u' (u' <= u) true before q."""
        if j == 0 or j > self.m:
            return None
        truth = s.truth
        facts = self.facts[j]
        bot = min(st.FU[j], st.BU[j]) + 1
        for i in range(bisect_left(facts, (u + 2, -1)) - 1, -1, -1):
            if facts[i][0] < bot:
                break
            L = facts[i][1] ^ 1
            if L != exclude and truth[L] == 1 and s.true_before(L, q):
                return L
        return None


class _Snap:
    """Bounds of a linear's terms and prefix sums when a propagation ran.

    Every inference of that run is explained from these values: they all
    held before anything the run derived.
    """

    __slots__ = ("tl", "tu", "segl", "segu", "fL", "fU", "FL", "FU", "BU")

    def __init__(self, tl, tu, segl, segu, fL, fU, FL, FU, BU):
        self.tl, self.tu, self.segl, self.segu = tl, tu, segl, segu
        self.fL, self.fU, self.FL, self.FU, self.BU = fL, fU, FL, FU, BU


# ----------------------------------------------------------------------------
# lexicographic ordering


class LexProp(Propagator):
    def __init__(self, s, c, ext=True):
        self.con = c
        self.cid = c.id
        self.xs = list(c.xs)
        self.ys = list(c.ys)
        self.strict = c.strict
        self.n = len(self.xs)
        self.ext = ext
        self.cmp = {}  # atom -> (offset, position)

    def _cmp_atom(self, s, j, off):
        cls = CmpGeq if off == 0 else CmpGt
        desc = cls(self.xs[j], self.ys[j])
        a = s.reg.lookup(desc)
        if a is None:
            a = s._intern(desc, self.pid)
        self.cmp[a] = (off, j)
        return a

    def _ge_known(self, s, j):
        x, y = self.xs[j], self.ys[j]
        if s.lb[x] >= s.ub[y]:
            return True
        if self.ext:
            a = s.reg.lookup(CmpGeq(x, y))
            if a is not None and a in self.cmp and s.truth[2 * a] == 1:
                return True
        return False

    def _gt_known(self, s, j):
        x, y = self.xs[j], self.ys[j]
        if s.lb[x] > s.ub[y]:
            return True
        if self.ext:
            a = s.reg.lookup(CmpGt(x, y))
            if a is not None and a in self.cmp and s.truth[2 * a] == 1:
                return True
        return False

    def on_gc(self, s):
        kind = s.reg.kind
        self.cmp = {a: v for a, v in self.cmp.items() if kind[a] != DEAD}

    def propagate(self, s):
        pid = self.pid
        lb, ub = s.lb, s.ub
        truth = s.truth
        for a, (off, j) in list(self.cmp.items()):
            x, y = self.xs[j], self.ys[j]
            t = truth[2 * a]
            if t == 0:
                if lb[x] >= ub[y] + off:
                    if not s.infer(2 * a, pid, ("c", a)):
                        return False
                elif ub[x] < lb[y] + off:
                    if not s.infer(2 * a + 1, pid, ("c", a)):
                        return False
                continue
            if t == 1:
                if lb[x] < lb[y] + off and not s.infer(s.ge_lit(x, lb[y] + off), pid, ("m", a, 0)):
                    return False
                if ub[y] > ub[x] - off and not s.infer(s.le_lit(y, ub[x] - off), pid, ("m", a, 1)):
                    return False
            else:
                if ub[x] > ub[y] + off - 1 and not s.infer(s.le_lit(x, ub[y] + off - 1), pid, ("m", a, 0)):
                    return False
                if lb[y] < lb[x] - off + 1 and not s.infer(s.ge_lit(y, lb[x] - off + 1), pid, ("m", a, 1)):
                    return False

        n = self.n
        alpha = 0
        while alpha < n and self._ge_known(s, alpha):
            alpha += 1
        if alpha == n and self.strict:
            return s.fail(pid, ("A",))
        for i in range(min(alpha + 1, n)):
            why = None
            if i == alpha:
                beta = alpha + 1
                while beta < n and self._ge_known(s, beta):
                    beta += 1
                if beta == n:
                    if self.strict:
                        why = ("E",)
                elif self._gt_known(s, beta):
                    why = ("G", beta)
            d = 1 if why else 0
            x, y = self.xs[i], self.ys[i]
            if ub[x] > ub[y] - d:
                if not s.infer(s.le_lit(x, ub[y] - d), pid, ("x", i, why)):
                    return False
            if lb[y] < lb[x] + d:
                if not s.infer(s.ge_lit(y, lb[x] + d), pid, ("y", i, why)):
                    return False
        return True

    def _ge_lits(self, s, q, j):
        x, y = self.xs[j], self.ys[j]
        lx, uy = s.lb_at(x, q), s.ub_at(y, q)
        if self.ext:
            return self._cmp_lits(s, q, j, 0)
        if lx >= uy:
            if s.ub_at(x, q) == lx and s.lb_at(y, q) == uy:
                return [s.eq_lit(x, lx), s.eq_lit(y, uy)]
            return [s.ge_lit(x, uy), s.le_lit(y, uy)]
        raise SolverError(f"lex {self.cid}: position {j} not ordered at {q}")

    def _gt_lits(self, s, q, j):
        if self.ext:
            return self._cmp_lits(s, q, j, 1)
        x, y = self.xs[j], self.ys[j]
        uy = s.ub_at(y, q)
        return [s.ge_lit(x, uy + 1), s.le_lit(y, uy)]

    def _cmp_lits(self, s, q, j, off):
        a = self._cmp_atom(s, j, off)
        lit = 2 * a
        t = s.truth[lit]
        if t == 1 and s.true_before(lit, q):
            return [lit]
        x, y = self.xs[j], self.ys[j]
        uy = s.ub_at(y, q)
        if s.lb_at(x, q) < uy + off:
            raise SolverError(f"lex {self.cid}: comparison at {j} not entailed at {q}")
        body = [b for b in (s.ge_lit(x, uy + off), s.le_lit(y, uy)) if b != TRUE_LIT]
        if t == 0:
            s.make_virtual(a, 1, body)
            self._log(s, body, lit)
            return [lit]
        return body

    def explain(self, s, payload, head, q):
        tag = payload[0]
        if tag == "c":
            a = payload[1]
            off, j = self.cmp[a]
            x, y = self.xs[j], self.ys[j]
            if head == 2 * a:
                v = s.ub_at(y, q)
                return [s.ge_lit(x, v + off), s.le_lit(y, v)]
            v = s.lb_at(y, q)
            return [s.le_lit(x, v + off - 1), s.ge_lit(y, v)]
        if tag == "m":
            a, which = payload[1], payload[2]
            off, j = self.cmp[a]
            x, y = self.xs[j], self.ys[j]
            if s.truth[2 * a] == 1:
                if which == 0:
                    return [2 * a, s.ge_lit(y, head_bound(s, head, x, False) - off)]
                return [2 * a, s.le_lit(x, head_bound(s, head, y, True) + off)]
            if which == 0:
                return [2 * a + 1, s.le_lit(y, head_bound(s, head, x, True) - off + 1)]
            return [2 * a + 1, s.ge_lit(x, head_bound(s, head, y, False) + off - 1)]
        if tag == "A":
            body = []
            for j in range(self.n):
                body.extend(self._ge_lits(s, q, j))
            return body
        which, i, why = payload
        body = []
        for j in range(i):
            body.extend(self._ge_lits(s, q, j))
        d = 1 if why else 0
        x, y = self.xs[i], self.ys[i]
        if which == "x":
            body.append(s.le_lit(y, head_bound(s, head, x, True) + d))
        else:
            body.append(s.ge_lit(x, head_bound(s, head, y, False) - d))
        if why:
            end = self.n if why[0] == "E" else why[1]
            for j in range(i + 1, end):
                body.extend(self._ge_lits(s, q, j))
            if why[0] == "G":
                body.extend(self._gt_lits(s, q, why[1]))
        return body


# ----------------------------------------------------------------------------
# table


class TableProp(Propagator):
    def __init__(self, s, c, ext=True):
        self.con = c
        self.cid = c.id
        self.xs = list(c.vars)
        self.rows = [tuple(r) for r in c.rows]
        self.ext = ext
        self.atom = {}  # row -> atom id of Tuple(table, row)

    def _row_atom(self, s, t):
        a = self.atom.get(t)
        if a is None or s.reg.kind[a] == DEAD:
            a = s._intern(Tuple(self.cid, t), self.pid)
            self.atom[t] = a
        return a

    def on_gc(self, s):
        kind = s.reg.kind
        self.atom = {t: a for t, a in self.atom.items() if kind[a] != DEAD}

    def propagate(self, s):
        pid = self.pid
        xs = self.xs
        truth = s.truth
        live = []
        dead = []
        for t, row in enumerate(self.rows):
            a = self.atom.get(t)
            if a is not None and truth[2 * a] == -1:
                dead.append(t)
                continue
            if all(s.in_domain(x, v) for x, v in zip(xs, row)):
                live.append(t)
            else:
                dead.append(t)
        if not live:
            return s.fail(pid, ("F",))
        if self.ext:
            for t in dead:
                a = self.atom.get(t)
                if a is not None and truth[2 * a] != -1 and not s.infer(2 * a + 1, pid, ("R", t)):
                    return False
            for t in live:
                a = self.atom.get(t)
                if a is not None and truth[2 * a] == 1:
                    for p, x in enumerate(xs):
                        if not s.infer(s.eq_lit(x, self.rows[t][p]), pid, ("C", t)):
                            return False
        for p, x in enumerate(xs):
            sup = {self.rows[t][p] for t in live}
            for v in s.domain(x):
                if v not in sup and not s.infer(s.ne_lit(x, v), pid, ("S", p, v)):
                    return False
        return True

    def _cell_lit(self, s, q, t):
        """Earliest-falsified cell of row t at time q."""
        best = None
        for x, v in zip(self.xs, self.rows[t]):
            lit = s.ne_lit(x, v)
            if s.true_before(lit, q):
                pos = s.locate(lit)[0]
                if best is None or pos < best[0]:
                    best = (pos, lit)
        if best is None:
            raise SolverError(f"table {self.cid}: row {t} alive at {q}")
        return best[1]

    def _dead_lits(self, s, q, t):
        if not self.ext:
            return [self._cell_lit(s, q, t)]
        a = self._row_atom(s, t)
        lit = 2 * a + 1
        tv = s.truth[lit]
        if tv == 1 and s.true_before(lit, q):
            return [lit]
        body = [self._cell_lit(s, q, t)]
        if tv == 0:
            s.make_virtual(a, -1, body)
            self._log(s, body, lit)
            return [lit]
        return body

    def _collect(self, s, q, rows):
        body = []
        for t in rows:
            for l in self._dead_lits(s, q, t):
                if l not in body:
                    body.append(l)
        return body

    def explain(self, s, payload, head, q):
        tag = payload[0]
        if tag == "S":
            p, v = payload[1], payload[2]
            return self._collect(s, q, [t for t, r in enumerate(self.rows) if r[p] == v])
        if tag == "F":
            return self._collect(s, q, range(len(self.rows)))
        if tag == "R":
            return [self._cell_lit(s, q, payload[1])]
        return [2 * self.atom[payload[1]]]


# ----------------------------------------------------------------------------
# disjunctive (pairwise)


class DisjunctiveProp(Propagator):
    def __init__(self, s, c, ext=True):
        self.con = c
        self.cid = c.id
        self.st = list(c.starts)
        self.d = list(c.durations)
        self.ext = ext
        self.atoms = {}  # (i, j) with i < j -> atom

    def _atom(self, s, i, j):
        a = self.atoms.get((i, j))
        if a is None or s.reg.kind[a] == DEAD:
            a = s._intern(Sched(self.cid, i, j), self.pid)
            self.atoms[(i, j)] = a
        return a

    def on_gc(self, s):
        kind = s.reg.kind
        self.atoms = {k: a for k, a in self.atoms.items() if kind[a] != DEAD}

    def _order(self, s, a, b, tag):
        """Post s_a + d_a <= s_b."""
        sa, sb, da = self.st[a], self.st[b], self.d[a]
        pid = self.pid
        if s.lb[sb] < s.lb[sa] + da and not s.infer(s.ge_lit(sb, s.lb[sa] + da), pid, (tag, a, b, 0)):
            return False
        if s.ub[sa] > s.ub[sb] - da and not s.infer(s.le_lit(sa, s.ub[sb] - da), pid, (tag, a, b, 1)):
            return False
        return True

    def propagate(self, s):
        lb, ub = s.lb, s.ub
        st, d = self.st, self.d
        n = len(st)
        truth = s.truth
        for i in range(n):
            for j in range(i + 1, n):
                if self.ext:
                    a = self.atoms.get((i, j))
                    t = truth[2 * a] if a is not None else 0
                    if t == 0:
                        if lb[st[i]] + d[i] > ub[st[j]]:
                            a = self._atom(s, i, j)
                            if not s.infer(2 * a + 1, self.pid, ("d", i, j)):
                                return False
                            t = -1
                        elif lb[st[j]] + d[j] > ub[st[i]]:
                            a = self._atom(s, i, j)
                            if not s.infer(2 * a, self.pid, ("d", i, j)):
                                return False
                            t = 1
                    if t == 1 and not self._order(s, i, j, "c"):
                        return False
                    if t == -1 and not self._order(s, j, i, "c"):
                        return False
                else:
                    if lb[st[i]] + d[i] > ub[st[j]] and not self._order(s, j, i, "b"):
                        return False
                    if lb[st[j]] + d[j] > ub[st[i]] and not self._order(s, i, j, "b"):
                        return False
        return True

    def _detect(self, s, q, a, b):
        """Bounds (at q) showing b cannot precede a, hence a precedes b."""
        ua = s.ub_at(self.st[a], q)
        return [l for l in (s.ge_lit(self.st[b], ua - self.d[b] + 1), s.le_lit(self.st[a], ua)) if l != TRUE_LIT]

    def explain(self, s, payload, head, q):
        tag = payload[0]
        if tag == "d":
            i, j = payload[1], payload[2]
            a = self.atoms[(i, j)]
            if head == 2 * a:  # i before j
                return self._detect(s, q, i, j)
            return self._detect(s, q, j, i)
        _, a, b, which = payload
        sa, sb, da = self.st[a], self.st[b], self.d[a]
        if tag == "c":
            i, j = min(a, b), max(a, b)
            at = self.atoms[(i, j)]
            pre = [2 * at if a == i else 2 * at + 1]
        else:
            pre = self._detect(s, q, a, b)
        if which == 0:
            return pre + [s.ge_lit(sa, head_bound(s, head, sb, False) - da)]
        return pre + [s.le_lit(sb, head_bound(s, head, sa, True) + da)]


# ----------------------------------------------------------------------------
# pairwise disequality


class AllDiffProp(Propagator):
    def __init__(self, s, c, ext=True):
        self.con = c
        self.cid = c.id
        self.xs = list(c.vars)

    def propagate(self, s):
        lb, ub = s.lb, s.ub
        for x in self.xs:
            if lb[x] == ub[x]:
                v = lb[x]
                for y in self.xs:
                    if y != x and s.in_domain(y, v):
                        if not s.infer(s.ne_lit(y, v), self.pid, ("n", x, v)):
                            return False
        return True

    def explain(self, s, payload, head, q):
        return [s.eq_lit(payload[1], payload[2])]


def unary_lit(s, u):
    if u.op == "=":
        return s.eq_lit(u.var, u.val)
    if u.op == "!=":
        return s.ne_lit(u.var, u.val)
    if u.op == "<=":
        return s.le_lit(u.var, u.val)
    return s.ge_lit(u.var, u.val)
