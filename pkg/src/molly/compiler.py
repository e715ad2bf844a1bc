"""Role to proc compilation: initialization, the main loop, and saturation."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

from .errors import Violation
from .proc_ir import (
    Bind, Chash, Ckypr, Comm, Cquot, Csame, Csrt, DecrE, EncrE, Evnt, Expr, Frst, Genr,
    HashE, Loc, PairE, Param, Proc, PubOf, QuotE, Read, Scnd, Stmt, UnionFind, trace,
)
from .terms import (
    Act, Ak, En, Hs, Ik, Mg, Polarity, Pr, Prm, Qt, Rcv, Ret, Role, Snd, Sort, Term,
    inverse, is_elementary, map_rel, polarities, show_term, size, sort_of, subterms,
)


class CompileError(Exception):
    def __init__(self, term: Term, detail: str = ""):
        self.term = term
        self.detail = detail
        super().__init__(f"{type(self).__name__} {show_term(term)}" + (f": {detail}" if detail else ""))


class NotJustifiedEncryption(CompileError):
    """A received encryption whose decryption key is never available."""

    def __init__(self, term: Term, missing: Term):
        self.missing = missing
        super().__init__(term, f"decryption key {show_term(missing)} is not available")


class NotJustifiedHash(CompileError):
    """A received hash whose body is never available."""

    def __init__(self, term: Term, missing: Term):
        self.missing = missing
        super().__init__(term, f"hash body {show_term(missing)} is not available")


class UnsupportedGeneric(CompileError):
    pass


class UnboundChannel(CompileError):
    pass


class UnboundTerm(CompileError):
    pass


def universe(rl: Role) -> set[Term]:
    out: set[Term] = set()
    for a in rl:
        for x in a.payloads():
            out |= subterms(x)
    return out


# ---- proc index used by the rules ------------------------------------------

class _Index:
    """Incrementally maintained view of a proc under construction."""

    def __init__(self, stmts: list[Stmt]):
        self.stmts: list[Stmt] = []
        self.binds: list[Bind] = []
        self.by_term: dict[Term, list[Loc]] = {}
        self.at: dict[Loc, Bind] = {}
        self.checks: set[Stmt] = set()
        self.derived: set[tuple] = set()  # (term, kind, source loc) for Frst/Scnd/Decr
        self.top = 0
        for s in stmts:
            self.add(s)

    def add(self, s: Stmt) -> None:
        self.stmts.append(s)
        if isinstance(s, Bind):
            self.binds.append(s)
            self.by_term.setdefault(s.t, []).append(s.v)
            self.by_term[s.t].sort()
            self.at[s.v] = s
            self.top = max(self.top, s.v.index)
            e = s.e
            if isinstance(e, Frst):
                self.derived.add((s.t, "frst", e.l))
            elif isinstance(e, Scnd):
                self.derived.add((s.t, "scnd", e.l))
            elif isinstance(e, DecrE):
                self.derived.add((s.t, "decr", e.le))
        elif isinstance(s, Evnt):
            for l in s.a.payloads():
                self.top = max(self.top, l.index)
        elif not isinstance(s, Comm):
            self.checks.add(s)

    def first(self, t: Term) -> Loc | None:
        locs = self.by_term.get(t)
        return locs[0] if locs else None

    def bound(self, t: Term) -> bool:
        return t in self.by_term

    def bound_to(self, l: Loc, t: Term) -> bool:
        b = self.at.get(l)
        return b is not None and b.t == t

    def pair_expr_for(self, e: Expr, t: Term) -> bool:
        return (isinstance(e, PairE) and isinstance(t, Pr)
                and self.bound_to(e.l1, t.a) and self.bound_to(e.l2, t.b))

    def encr_expr_for(self, e: Expr, t: Term) -> bool:
        return (isinstance(e, EncrE) and isinstance(t, En)
                and self.bound_to(e.lp, t.p) and self.bound_to(e.lk, t.k))

    def hash_expr_for(self, e: Expr, t: Term) -> bool:
        return isinstance(e, HashE) and isinstance(t, Hs) and self.bound_to(e.l, t.t)

    def has_chash_for(self, vh: Loc, body: Term) -> bool:
        return any(self.bound_to(vt, body) for vt in self.by_term.get(body, ()) if Chash(vh, vt) in self.checks)


# ---- the rules ----------------------------------------------------------------
# Each elimination/check rule yields (active premise, conclusion) for every
# binding that is currently a redex, in proc order. Introduction rules yield
# (term, conclusion factory) for terms of the universe, in term order.

def _pair_elim_l(ix: _Index):
    for b in ix.binds:
        if isinstance(b.t, Pr) and not ix.pair_expr_for(b.e, b.t) and (b.t.a, "frst", b.v) not in ix.derived:
            yield b, lambda v, b=b: Bind(b.t.a, v, Frst(b.v))


def _pair_elim_r(ix: _Index):
    for b in ix.binds:
        if isinstance(b.t, Pr) and not ix.pair_expr_for(b.e, b.t) and (b.t.b, "scnd", b.v) not in ix.derived:
            yield b, lambda v, b=b: Bind(b.t.b, v, Scnd(b.v))


def _decryption(ix: _Index):
    for b in ix.binds:
        if isinstance(b.t, En) and not ix.encr_expr_for(b.e, b.t) and (b.t.p, "decr", b.v) not in ix.derived:
            kd = ix.first(inverse(b.t.k))
            if kd is not None:
                yield b, lambda v, b=b, kd=kd: Bind(b.t.p, v, DecrE(b.v, kd))


def _check_quote(ix: _Index):
    for b in ix.binds:
        if isinstance(b.t, Qt) and Cquot(b.v, b.t.s) not in ix.checks:
            yield b, Cquot(b.v, b.t.s)


def _check_sort(ix: _Index):
    for b in ix.binds:
        if is_elementary(b.t) and ix.first(b.t) == b.v and Csrt(b.v, sort_of(b.t)) not in ix.checks:
            yield b, Csrt(b.v, sort_of(b.t))


def _check_same(ix: _Index):
    for b in ix.binds:
        if is_elementary(b.t):
            vf = ix.first(b.t)
            if vf < b.v and Csame(b.v, vf) not in ix.checks:
                yield b, Csame(b.v, vf)


def _check_hash(ix: _Index):
    for b in ix.binds:
        if isinstance(b.t, Hs) and not ix.hash_expr_for(b.e, b.t):
            vt = ix.first(b.t.t)
            if vt is not None and not ix.has_chash_for(b.v, b.t.t):
                yield b, Chash(b.v, vt)


def _check_key_pair(ix: _Index):
    for b in ix.binds:
        if isinstance(b.t, Ak) and ix.first(b.t) == b.v:
            v1 = ix.first(Ik(b.t.n))
            if v1 is not None and Ckypr(v1, b.v) not in ix.checks:
                yield b, Ckypr(v1, b.v)


ELIM_RULES: dict[str, Callable] = {
    "PairElimL": _pair_elim_l,
    "PairElimR": _pair_elim_r,
    "Decryption": _decryption,
}
CHECK_RULES: dict[str, Callable] = {
    "CheckQuote": _check_quote,
    "CheckSort": _check_sort,
    "CheckSame": _check_same,
    "CheckHash": _check_hash,
    "CheckKeyPair": _check_key_pair,
}


def _pair_intro(ix: _Index, t: Term):
    if isinstance(t, Pr) and ix.bound(t.a) and ix.bound(t.b):
        return lambda v: Bind(t, v, PairE(ix.first(t.a), ix.first(t.b)))


def _encr_intro(ix: _Index, t: Term):
    if isinstance(t, En) and ix.bound(t.p) and ix.bound(t.k):
        return lambda v: Bind(t, v, EncrE(ix.first(t.p), ix.first(t.k)))


def _hash_intro(ix: _Index, t: Term):
    if isinstance(t, Hs) and ix.bound(t.t):
        return lambda v: Bind(t, v, HashE(ix.first(t.t)))


def _quote_intro(ix: _Index, t: Term):
    if isinstance(t, Qt):
        return lambda v: Bind(t, v, QuotE(t.s))


def _pubkey_intro(ix: _Index, t: Term):
    if isinstance(t, Ak) and ix.bound(Ik(t.n)):
        return lambda v: Bind(t, v, PubOf(ix.first(Ik(t.n))))


INTRO_RULES: dict[str, Callable] = {
    "PairIntro": _pair_intro,
    "EncrIntro": _encr_intro,
    "HashIntro": _hash_intro,
    "QuoteIntro": _quote_intro,
    "PubKeyIntro": _pubkey_intro,
}

RULE_ORDER = [
    "PairElimL", "PairElimR", "Decryption",
    "PairIntro", "EncrIntro", "HashIntro", "QuoteIntro", "PubKeyIntro",
    "CheckQuote", "CheckSort", "CheckSame", "CheckHash", "CheckKeyPair",
]


def _redex_counts(ix: _Index) -> dict[Loc, int]:
    counts: dict[Loc, int] = {}
    for rule in list(ELIM_RULES.values()) + list(CHECK_RULES.values()):
        for b, _ in rule(ix):
            counts[b.v] = counts.get(b.v, 0) + 1
    return counts


def _weight(ix: _Index) -> int:
    return sum(n * size(ix.at[v].t) for v, n in _redex_counts(ix).items())


def weight(p: Proc, U: set[Term] | None = None) -> int:
    """Sum over bindings of (rules it is an active redex for) times the size of its term."""
    return _weight(_Index(list(p.stmts)))


@dataclass(frozen=True)
class Firing:
    rule: str
    term: Term
    weight_before: int
    weight_after: int

    @property
    def is_intro(self) -> bool:
        return self.rule in INTRO_RULES


@dataclass
class SaturationLog:
    """Records rule firings together with the termination weight around each."""

    firings: list[Firing] = field(default_factory=list)
    universe_size: int = 0

    def weight_violations(self) -> list[Firing]:
        return [f for f in self.firings if not f.is_intro and not f.weight_after < f.weight_before]

    def intro_count(self) -> int:
        return sum(f.is_intro for f in self.firings)


def _fire_once(ix: _Index, U_sorted: list[Term]) -> tuple[str, Term, Stmt] | None:
    for name in RULE_ORDER:
        if name in INTRO_RULES:
            rule = INTRO_RULES[name]
            for t in U_sorted:
                if ix.bound(t):
                    continue
                make = rule(ix, t)
                if make is not None:
                    return name, t, make(Loc(ix.top + 1))
            continue
        rule = ELIM_RULES.get(name) or CHECK_RULES[name]
        for b, concl in rule(ix):
            if callable(concl):
                concl = concl(Loc(ix.top + 1))
            return name, b.t, concl
    return None


def _saturate_index(ix: _Index, U: set[Term], log: SaturationLog | None) -> None:
    U_sorted = sorted(U)
    if log is not None:
        log.universe_size = max(log.universe_size, len(U))
    while True:
        before = _weight(ix) if log is not None else 0
        step = _fire_once(ix, U_sorted)
        if step is None:
            break
        name, t, stmt = step
        ix.add(stmt)
        if log is not None:
            log.firings.append(Firing(name, t, before, _weight(ix)))
    bad = _justification_failures(ix)
    if bad:
        raise bad[0]


def saturate(p: Proc, U: set[Term], log: SaturationLog | None = None) -> Proc:
    ix = _Index(list(p.stmts))
    _saturate_index(ix, U, log)
    return Proc(tuple(ix.stmts))


# ---- conditions -----------------------------------------------------------------

def _justification_failures(ix: _Index) -> list[CompileError]:
    out: list[CompileError] = []
    for b in ix.binds:
        if isinstance(b.t, En) and not ix.encr_expr_for(b.e, b.t) and not ix.bound(inverse(b.t.k)):
            out.append(NotJustifiedEncryption(b.t, inverse(b.t.k)))
        elif isinstance(b.t, Hs) and not ix.hash_expr_for(b.e, b.t) and not ix.bound(b.t.t):
            out.append(NotJustifiedHash(b.t, b.t.t))
    return out


def check_justified(p: Proc) -> list[Violation]:
    out = []
    for err in _justification_failures(_Index(list(p.stmts))):
        kind = "Encryption" if isinstance(err, NotJustifiedEncryption) else "Hash"
        out.append(Violation(kind, f"{show_term(err.term)} needs {show_term(err.missing)}"))
    return out


def check_closed(p: Proc, U: set[Term]) -> list[Violation]:
    """Checks the nine closure conditions. Each violation names its condition."""
    ix = _Index(list(p.stmts))
    uf = UnionFind(ix.at)
    for s in ix.checks:
        if isinstance(s, Csame):
            uf.union(s.v1, s.v2)
    out: list[Violation] = []

    def v(rule: str, what: str) -> None:
        out.append(Violation(rule, what))

    for t in sorted(U):
        if isinstance(t, Pr) and ix.bound(t.a) and ix.bound(t.b) and not ix.bound(t):
            v("PairIntroduction", show_term(t))
        if isinstance(t, En) and ix.bound(t.p) and ix.bound(t.k) and not ix.bound(t):
            v("EncryptionIntroduction", show_term(t))
        if isinstance(t, Hs) and ix.bound(t.t) and not ix.bound(t):
            v("HashIntroduction", show_term(t))

    for b in ix.binds:
        t = b.t
        where = f"{show_term(t)} at {b.v}"
        if isinstance(t, Pr) and not ix.pair_expr_for(b.e, t):
            if (t.a, "frst", b.v) not in ix.derived or (t.b, "scnd", b.v) not in ix.derived:
                v("PairElimination", where)
        if isinstance(t, En) and not ix.encr_expr_for(b.e, t) and ix.bound(inverse(t.k)):
            ok = any(isinstance(d.e, DecrE) and d.e.le == b.v and ix.bound_to(d.e.lk, inverse(t.k))
                     for d in ix.binds if d.t == t.p)
            if not ok:
                v("Decryption", where)
        if isinstance(t, Hs) and not ix.hash_expr_for(b.e, t) and ix.bound(t.t):
            if not any(isinstance(c, Chash) and c.vh == b.v and ix.bound_to(c.vt, t.t) for c in ix.checks):
                v("CheckHash", where)
        if isinstance(t, Qt) and Cquot(b.v, t.s) not in ix.checks:
            v("CheckQuote", where)
        if is_elementary(t):
            for other in ix.by_term[t]:
                if not uf.same(b.v, other):
                    v("CheckEquality", f"{show_term(t)} at {b.v} and {other}")
            if not any(isinstance(c, Csrt) and c.s == sort_of(t) and uf.same(c.v, b.v) for c in ix.checks):
                v("CheckSort", where)
        if isinstance(t, Ak) and ix.bound(Ik(t.n)):
            if not any(isinstance(c, Ckypr) and ix.bound_to(c.v1, Ik(t.n)) and ix.bound_to(c.v2, t)
                       and uf.same(c.v2, b.v) for c in ix.checks):
                v("CheckKeyPair", where)
    return out


# ---- the main loop --------------------------------------------------------------

@dataclass(frozen=True)
class CompileState:
    role: tuple
    done: tuple
    todo: tuple
    proc: Proc
    next_loc: int
    next_genr: int
    next_param: int
    next_read: int


def initialize(rl: Role, log: SaturationLog | None = None) -> CompileState:
    rl = tuple(rl)
    pols = polarities(rl)
    positive = [t for t, pol in pols.items() if pol is Polarity.Positive]
    for t in positive:
        if isinstance(t, Mg):
            raise UnsupportedGeneric(t, "generic message variables cannot be generated")
    stmts: list[Stmt] = []
    loc, genr = 1, 1
    for t in positive:
        if is_elementary(t) and not isinstance(t, (Ak, Ik)):
            stmts.append(Bind(t, Loc(loc), Genr(genr, sort_of(t))))
            loc, genr = loc + 1, genr + 1
    seen: set[int] = set()
    for t in positive:
        if isinstance(t, (Ak, Ik)) and t.n not in seen:
            seen.add(t.n)
            pri = Loc(loc)
            stmts.append(Bind(Ik(t.n), pri, Genr(genr, Sort.Ikey)))
            stmts.append(Bind(Ak(t.n), Loc(loc + 1), PubOf(pri)))
            loc, genr = loc + 2, genr + 1
    for t in positive:
        if isinstance(t, Qt):
            stmts.append(Bind(t, Loc(loc), QuotE(t.s)))
            loc += 1
    ix = _Index(stmts)
    _saturate_index(ix, universe(rl), log)
    return CompileState(rl, (), rl, Proc(tuple(ix.stmts)), ix.top + 1, genr, 1, 1)


def _describe(a: Act) -> str:
    if isinstance(a, Prm):
        return f"input {show_term(a.x)}"
    if isinstance(a, Ret):
        return f"returning {show_term(a.x)}"
    verb = "receiving" if isinstance(a, Rcv) else "sending"
    return f"{verb} {show_term(a.m)} on {show_term(a.ch)}"


def step(st: CompileState, log: SaturationLog | None = None) -> CompileState:
    if not st.todo:
        raise ValueError("step on a finished compilation")
    a, U = st.todo[0], universe(st.role)
    ix = _Index(list(st.proc.stmts))
    ix.add(Comm(_describe(a)))
    param, read = st.next_param, st.next_read
    fresh = Loc(max(st.next_loc, ix.top + 1))
    if isinstance(a, Prm):
        ix.add(Evnt(Prm(fresh)))
        ix.add(Bind(a.x, fresh, Param(param)))
        param += 1
        _saturate_index(ix, U, log)
    elif isinstance(a, Rcv):
        ch = ix.first(a.ch)
        if ch is None:
            raise UnboundChannel(a.ch, "channels must be bound before use")
        ix.add(Evnt(Rcv(ch, fresh)))
        ix.add(Bind(a.m, fresh, Read(read)))
        read += 1
        _saturate_index(ix, U, log)
    else:
        _saturate_index(ix, U, log)
        m = a.m if isinstance(a, Snd) else a.x
        vm = ix.first(m)
        if vm is None:
            raise UnboundTerm(m, "no binding for an outgoing term")
        if isinstance(a, Snd):
            ch = ix.first(a.ch)
            if ch is None:
                raise UnboundChannel(a.ch, "channels must be bound before use")
            ix.add(Evnt(Snd(ch, vm)))
        else:
            ix.add(Evnt(Ret(vm)))
    return replace(st, done=st.done + (a,), todo=st.todo[1:], proc=Proc(tuple(ix.stmts)),
                   next_loc=ix.top + 1, next_param=param, next_read=read)


def invariant_violations(st: CompileState) -> list[str]:
    """The three loop invariants of the main loop."""
    out = []
    if st.done + st.todo != st.role:
        out.append("done ++ todo differs from the role")
    pairs = {(b.t, b.v) for b in st.proc.binds()}
    if not map_rel(lambda t, l: (t, l) in pairs, st.done, trace(st.proc)):
        out.append("trace does not map from the finished actions through the bindings")
    for viol in check_closed(st.proc, universe(st.role)):
        out.append(f"not saturated: {viol}")
    return out


def compile_role(rl: Role, log: SaturationLog | None = None, check_invariants: bool = False) -> Proc:
    st = initialize(rl, log)
    while st.todo:
        st = step(st, log)
        if check_invariants:
            bad = invariant_violations(st)
            if bad:
                raise AssertionError("; ".join(bad))
    return st.proc
