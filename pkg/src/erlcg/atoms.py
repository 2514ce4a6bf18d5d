"""Atoms and literals: the language of resolution.

Literals are plain ints: ``2*atom`` is the positive literal and ``2*atom+1``
its negation, so ``lit ^ 1`` negates. Atom 0 is the constant TRUE.
"""

from __future__ import annotations

import re
from typing import NamedTuple

TRUE_LIT = 0
FALSE_LIT = 1

CONST, GE, EQ, PSUM, CMPGE, CMPGT, SCHED, TUPLE = range(8)
DEAD = -1
EXTENSION_KINDS = (PSUM, CMPGE, CMPGT, SCHED, TUPLE)


class BoundGeq(NamedTuple):
    var: int
    v: int


class Eq(NamedTuple):
    var: int
    v: int


class PsumGeq(NamedTuple):
    lin: int  # constraint id of the linear
    k: int  # prefix length (a checkpoint)
    v: int


class CmpGeq(NamedTuple):
    x: int
    y: int


class CmpGt(NamedTuple):
    x: int
    y: int


class Sched(NamedTuple):
    disj: int
    i: int  # task index, i < j; true means task i runs before task j
    j: int


class Tuple(NamedTuple):
    table: int
    row: int


_KIND = {BoundGeq: GE, Eq: EQ, PsumGeq: PSUM, CmpGeq: CMPGE, CmpGt: CMPGT, Sched: SCHED, Tuple: TUPLE}


def negate(lit):
    return lit ^ 1


def atom_of(lit):
    return lit >> 1


def pos_lit(atom):
    return atom << 1


class AtomError(ValueError):
    pass


class AtomRegistry:
    """Interning table plus per-atom bookkeeping.

    Truth values are stored per literal (1 true, -1 false, 0 unknown) so a
    lookup is a single list index. The owning solver keeps them consistent
    with the domains.
    """

    def __init__(self, nvars=0, checkpoints=None):
        self.descs = [None]
        self.index = {}
        self.kind = [CONST]
        self.var = [-1]
        self.val = [0]
        self.truth = [1, -1]
        self.level = [0]  # level the atom was assigned at, -1 if unassigned
        self.tpos = [-1]  # real trail position when assigned through the trail
        self.occ = [0]
        self.activity = [0.0]
        self.owner = [-1]
        self.ge_atoms = [dict() for _ in range(nvars)]
        self.eq_atoms = [dict() for _ in range(nvars)]
        # linear id -> set of legal prefix lengths
        self.checkpoints = checkpoints if checkpoints is not None else {}
        self.virtual = {}  # atom -> (position tuple, body lits)
        self.n_ext_created = 0
        self.n_ext_collected = 0
        self.n_psum_created = 0
        self.n_psum_collected = 0

    def __len__(self):
        return len(self.kind)

    def lookup(self, desc):
        return self.index.get((type(desc), desc))

    def intern(self, desc, owner=-1):
        """Atom id for ``desc``; creates it (unassigned) on first use."""
        a = self.index.get((type(desc), desc))
        if a is not None:
            return a
        kind = _KIND[type(desc)]
        if kind == PSUM and desc.k not in self.checkpoints.get(desc.lin, ()):
            raise AtomError(f"prefix length {desc.k} is not a checkpoint of linear {desc.lin}")
        if kind == SCHED and not desc.i < desc.j:
            raise AtomError("sched atoms are interned with i < j")
        a = len(self.kind)
        self.descs.append(desc)
        self.index[(type(desc), desc)] = a
        self.kind.append(kind)
        if kind in (GE, EQ):
            self.var.append(desc.var)
            self.val.append(desc.v)
            (self.ge_atoms if kind == GE else self.eq_atoms)[desc.var][desc.v] = a
        else:
            self.var.append(-1)
            self.val.append(desc.v if kind == PSUM else 0)
            self.n_ext_created += 1
            self.n_psum_created += kind == PSUM
        self.truth.append(0)
        self.truth.append(0)
        self.level.append(-1)
        self.tpos.append(-1)
        self.occ.append(0)
        self.activity.append(0.0)
        self.owner.append(owner)
        return a

    def value(self, lit):
        return self.truth[lit]

    def lit_desc(self, lit):
        """``(desc, positive)`` for a literal; desc is None for the constants."""
        a = lit >> 1
        return (self.descs[a], not lit & 1) if a else (None, lit == TRUE_LIT)

    def is_extension(self, a):
        return self.kind[a] in EXTENSION_KINDS

    def gc_unused(self):
        """Deregister extension atoms that are unassigned and in no live nogood."""
        removed = []
        for a in range(1, len(self.kind)):
            if self.kind[a] in EXTENSION_KINDS and self.occ[a] == 0 and self.truth[2 * a] == 0:
                removed.append(a)
        for a in removed:
            d = self.descs[a]
            del self.index[(type(d), d)]
            self.n_psum_collected += self.kind[a] == PSUM
            self.kind[a] = DEAD
            self.virtual.pop(a, None)
        self.n_ext_collected += len(removed)
        return removed

    def recount(self, clauses):
        """Occurrence counts recomputed from scratch (used to audit the incremental ones)."""
        occ = [0] * len(self.kind)
        for c in clauses:
            for a in {lit >> 1 for lit in c}:
                occ[a] += 1
        return occ

    def dump(self, names=None, position=None):
        """One line per live atom: id, description, truth, position, occurrences."""
        out = []
        for a in range(1, len(self.kind)):
            if self.kind[a] == DEAD:
                continue
            t = {1: "true", -1: "false", 0: "unknown"}[self.truth[2 * a]]
            pos = position(a) if position else self.tpos[a]
            out.append(f"{a}\t{desc_str(self.descs[a], names)}\t{t}\t{pos}\t{self.occ[a]}")
        return "\n".join(out)


# --------------------------------------------------------------------------
# textual form, shared by traces, logs and the verifier


def _nm(names, x):
    return names[x] if names else f"v{x}"


def desc_str(d, names=None):
    if isinstance(d, BoundGeq):
        return f"{_nm(names, d.var)}>={d.v}"
    if isinstance(d, Eq):
        return f"{_nm(names, d.var)}={d.v}"
    if isinstance(d, PsumGeq):
        return f"P[c{d.lin}:{d.k}]>={d.v}"
    if isinstance(d, CmpGeq):
        return f"C[{_nm(names, d.x)}>={_nm(names, d.y)}]"
    if isinstance(d, CmpGt):
        return f"C[{_nm(names, d.x)}>{_nm(names, d.y)}]"
    if isinstance(d, Sched):
        return f"S[d{d.disj}:{d.i}<{d.j}]"
    if isinstance(d, Tuple):
        return f"T[t{d.table}:{d.row}]"
    return "true"


def lit_str(reg, lit, names=None):
    a = lit >> 1
    if a == 0:
        return "false" if lit & 1 else "true"
    d = reg.descs[a]
    if lit & 1:
        if isinstance(d, BoundGeq):
            return f"{_nm(names, d.var)}<={d.v - 1}"
        if isinstance(d, Eq):
            return f"{_nm(names, d.var)}!={d.v}"
        return "~" + desc_str(d, names)
    return desc_str(d, names)


def desc_lit_str(d, pos, names=None):
    """Text of the literal ``(d, pos)`` in descriptor form."""
    if d is None:
        return "true" if pos else "false"
    if not pos:
        if isinstance(d, BoundGeq):
            return f"{_nm(names, d.var)}<={d.v - 1}"
        if isinstance(d, Eq):
            return f"{_nm(names, d.var)}!={d.v}"
        return "~" + desc_str(d, names)
    return desc_str(d, names)


def clause_str(reg, body, head, names=None):
    """``l1 & l2 -> head`` with body literals in the given order."""
    lhs = " & ".join(lit_str(reg, b, names) for b in body) or "true"
    return f"{lhs} -> {lit_str(reg, head, names)}"


_DOM = re.compile(r"^([A-Za-z_]\w*)(>=|<=|!=|=)(-?\d+)$")
_PS = re.compile(r"^P\[c(\d+):(\d+)\]>=(-?\d+)$")
_CMP = re.compile(r"^C\[([A-Za-z_]\w*)(>=|>)([A-Za-z_]\w*)\]$")
_SCH = re.compile(r"^S\[d(\d+):(\d+)<(\d+)\]$")
_TUP = re.compile(r"^T\[t(\d+):(\d+)\]$")


def parse_lit(text, ids):
    """Parse a literal into ``(desc, positive)``; ``desc`` None means a constant.

    ``ids`` maps variable names to ids. ``x<=v`` and ``x!=v`` come back as the
    negations of ``x>=v+1`` and ``x=v``.
    """
    s = text.strip()
    if s in ("true", "false"):
        return None, s == "true"
    neg = s.startswith("~")
    if neg:
        s = s[1:]
    m = _DOM.match(s)
    if m:
        x, op, v = ids[m.group(1)], m.group(2), int(m.group(3))
        if op == ">=":
            return BoundGeq(x, v), not neg
        if op == "<=":
            return BoundGeq(x, v + 1), neg
        if op == "=":
            return Eq(x, v), not neg
        return Eq(x, v), neg
    m = _PS.match(s)
    if m:
        return PsumGeq(int(m.group(1)), int(m.group(2)), int(m.group(3))), not neg
    m = _CMP.match(s)
    if m:
        cls = CmpGeq if m.group(2) == ">=" else CmpGt
        return cls(ids[m.group(1)], ids[m.group(3)]), not neg
    m = _SCH.match(s)
    if m:
        return Sched(int(m.group(1)), int(m.group(2)), int(m.group(3))), not neg
    m = _TUP.match(s)
    if m:
        return Tuple(int(m.group(1)), int(m.group(2))), not neg
    raise ValueError(f"cannot parse literal {text!r}")


def parse_clause(text, ids):
    """Inverse of clause_str: returns (body, head) as lists of (desc, positive)."""
    lhs, rhs = text.split("->")
    body = [] if lhs.strip() == "true" else [parse_lit(t, ids) for t in lhs.split("&")]
    return body, parse_lit(rhs, ids)
