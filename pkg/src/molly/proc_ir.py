"""The straight-line intermediate language: locations, expressions, statements."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Union

from .errors import ParseError
from .syntax import Cursor, quote
from .terms import (
    ACTS, Act, En, Hs, Pr, Prm, Rcv, Ret, Snd, Sort, Term, parse_term_body, show_term,
)


@dataclass(frozen=True, order=True)
class Loc:
    index: int

    def __str__(self) -> str:
        return f"L {self.index}"

    def __repr__(self) -> str:
        return f"L{self.index}"


# ---- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class PairE:
    l1: Loc
    l2: Loc


@dataclass(frozen=True)
class Frst:
    l: Loc


@dataclass(frozen=True)
class Scnd:
    l: Loc


@dataclass(frozen=True)
class EncrE:
    lp: Loc
    lk: Loc


@dataclass(frozen=True)
class DecrE:
    le: Loc
    lk: Loc


@dataclass(frozen=True)
class HashE:
    l: Loc


@dataclass(frozen=True)
class QuotE:
    s: str


@dataclass(frozen=True)
class PubOf:
    l: Loc


@dataclass(frozen=True)
class Genr:
    n: int
    srt: Sort


@dataclass(frozen=True)
class Param:
    n: int


@dataclass(frozen=True)
class Read:
    n: int


Expr = Union[PairE, Frst, Scnd, EncrE, DecrE, HashE, QuotE, PubOf, Genr, Param, Read]

# print name, argument kinds ("L" location, "s" string, "n" number, "S" sort)
_EXPRS: dict[type, tuple[str, str]] = {
    PairE: ("Pair", "LL"), Frst: ("Frst", "L"), Scnd: ("Scnd", "L"),
    EncrE: ("Encr", "LL"), DecrE: ("Decr", "LL"), HashE: ("Hash", "L"),
    QuotE: ("Quot", "s"), PubOf: ("PubOf", "L"), Genr: ("Genr", "nS"),
    Param: ("Param", "n"), Read: ("Read", "n"),
}


def expr_locs(e: Expr) -> tuple[Loc, ...]:
    return tuple(x for x in vars(e).values() if isinstance(x, Loc))


# ---- statements ------------------------------------------------------------

@dataclass(frozen=True)
class Evnt:
    a: Act  # Act[Loc]


@dataclass(frozen=True)
class Bind:
    t: Term
    v: Loc
    e: Expr


@dataclass(frozen=True)
class Csrt:
    v: Loc
    s: Sort


@dataclass(frozen=True)
class Csame:
    v1: Loc
    v2: Loc


@dataclass(frozen=True)
class Ckypr:
    v1: Loc  # private half
    v2: Loc  # public half


@dataclass(frozen=True)
class Chash:
    vh: Loc  # holds the hash
    vt: Loc  # holds the body


@dataclass(frozen=True)
class Cquot:
    v: Loc
    s: str


@dataclass(frozen=True)
class Comm:
    s: str


Stmt = Union[Evnt, Bind, Csrt, Csame, Ckypr, Chash, Cquot, Comm]
CHECKS = (Csrt, Csame, Ckypr, Chash, Cquot)


@dataclass(frozen=True)
class Proc:
    stmts: tuple = ()

    def __iter__(self) -> Iterator[Stmt]:
        return iter(self.stmts)

    def __len__(self) -> int:
        return len(self.stmts)

    def __str__(self) -> str:
        return print_proc(self)

    def binds(self) -> Iterator[Bind]:
        return (s for s in self.stmts if isinstance(s, Bind))


def stmt_locs(s: Stmt) -> tuple[Loc, ...]:
    """Locations a statement reads (for a Bind: those of its expression)."""
    if isinstance(s, Evnt):
        return tuple(s.a.payloads())
    if isinstance(s, Bind):
        return expr_locs(s.e)
    return tuple(x for x in vars(s).values() if isinstance(x, Loc))


def trace(p: Proc) -> list[Act]:
    return [s.a for s in p if isinstance(s, Evnt)]


def beta(p: Proc) -> set[tuple[Term, Loc]]:
    return {(s.t, s.v) for s in p.binds()}


def first_location(p: Proc, t: Term) -> Loc | None:
    return min((s.v for s in p.binds() if s.t == t), default=None)


def bind_at(p: Proc) -> dict[Loc, Bind]:
    return {s.v: s for s in p.binds()}


class UnionFind:
    def __init__(self, items: Iterable = ()):
        self.parent: dict = {}
        for x in items:
            self.find(x)

    def find(self, x):
        self.parent.setdefault(x, x)
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the smaller element as representative for stable output
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def same(self, a, b) -> bool:
        return self.find(a) == self.find(b)

    def classes(self) -> list[set]:
        groups: dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), set()).add(x)
        return sorted(groups.values(), key=min)


def sameness(p: Proc) -> UnionFind:
    uf = UnionFind()
    for s in p:
        if isinstance(s, Bind):
            uf.find(s.v)
        elif isinstance(s, Csame):
            uf.union(s.v1, s.v2)
    return uf


def _bound_to(p: Proc, l: Loc, t: Term) -> bool:
    return any(s.v == l and s.t == t for s in p.binds())


def is_pair_expr_for(p: Proc, e: Expr, t: Term) -> bool:
    return (isinstance(e, PairE) and isinstance(t, Pr)
            and _bound_to(p, e.l1, t.a) and _bound_to(p, e.l2, t.b))


def is_encr_expr_for(p: Proc, e: Expr, t: Term) -> bool:
    return (isinstance(e, EncrE) and isinstance(t, En)
            and _bound_to(p, e.lp, t.p) and _bound_to(p, e.lk, t.k))


def is_hash_expr_for(p: Proc, e: Expr, t: Term) -> bool:
    return isinstance(e, HashE) and isinstance(t, Hs) and _bound_to(p, e.l, t.t)


def definition_before_use(p: Proc) -> list[str]:
    """Single left-to-right pass; returns a message per premature use."""
    seen: set[Loc] = set()
    bad = []
    for i, s in enumerate(p.stmts):
        if isinstance(s, Evnt):
            a = s.a
            reads = [a.ch] if isinstance(a, (Rcv, Snd)) else []
            if isinstance(a, (Snd, Ret)):
                reads.append(a.m if isinstance(a, Snd) else a.x)
            for l in reads:
                if l not in seen:
                    bad.append(f"statement {i}: {l} used before definition")
            if isinstance(a, Prm):
                seen.add(a.x)
            elif isinstance(a, Rcv):
                seen.add(a.m)
            continue
        for l in stmt_locs(s):
            if l not in seen:
                bad.append(f"statement {i}: {l} used before definition")
        if isinstance(s, Bind):
            seen.add(s.v)
    return bad


# ---- printing ----------------------------------------------------------------

def _paren_loc(l: Loc) -> str:
    return f"({l})"


def show_expr(e: Expr) -> str:
    name, kinds = _EXPRS[type(e)]
    parts = [name]
    for kind, x in zip(kinds, vars(e).values()):
        if kind == "L":
            parts.append(_paren_loc(x))
        elif kind == "s":
            parts.append(quote(x))
        else:
            parts.append(str(x))
    return " ".join(parts)


def show_stmt(s: Stmt) -> str:
    if isinstance(s, Evnt):
        inner = " ".join([type(s.a).__name__] + [_paren_loc(l) for l in s.a.payloads()])
        return f"Evnt ({inner})"
    if isinstance(s, Bind):
        return f"Bind ({show_term(s.t, top=True)}, {s.v}) ({show_expr(s.e)})"
    if isinstance(s, Csrt):
        return f"Csrt ({s.v}) {s.s}"
    if isinstance(s, Cquot):
        return f"Cquot ({s.v}) {quote(s.s)}"
    if isinstance(s, Comm):
        return f"Comm {quote(s.s)}"
    a, b = vars(s).values()
    return f"{type(s).__name__} ({a}) ({b})"


def print_proc(p: Proc) -> str:
    return ";\n".join(show_stmt(s) for s in p) + ("\n" if p.stmts else "")


# ---- parsing -----------------------------------------------------------------

def _loc(c: Cursor, parens: bool = True) -> Loc:
    """`(L n)`; the compact `L2` form is also accepted."""
    if parens and c.accept("("):
        l = _loc(c, parens=False)
        c.expect(")", what="')' after a location")
        return l
    tok = c.expect("ident", what="a location 'L n'")
    if tok.text == "L":
        return Loc(c.int_())
    if tok.text[:1] == "L" and tok.text[1:].isdigit():
        return Loc(int(tok.text[1:]))
    raise ParseError(f"unexpected {tok.text!r}", tok.line, tok.col, "a location 'L n'")


def _sort(c: Cursor) -> Sort:
    tok = c.expect("ident", what="a sort name")
    try:
        return Sort(tok.text)
    except ValueError:
        raise ParseError(f"unknown sort {tok.text!r}", tok.line, tok.col, "a sort name") from None


def _expr(c: Cursor) -> Expr:
    tok = c.expect("ident", what="an expression")
    for cls, (name, kinds) in _EXPRS.items():
        if name == tok.text:
            break
    else:
        raise ParseError(f"unknown expression {tok.text!r}", tok.line, tok.col, "an expression")
    args: list = []
    for kind in kinds:
        if kind == "L":
            args.append(_loc(c))
        elif kind == "s":
            args.append(c.str_())
        elif kind == "n":
            args.append(c.int_())
        else:
            args.append(_sort(c))
    return cls(*args)


def _stmt(c: Cursor) -> Stmt:
    tok = c.expect("ident", what="a statement keyword")
    kw = tok.text
    if kw == "Evnt":
        paren = c.accept("(") is not None
        at = c.expect("ident", what="an action (Prm Ret Rcv Snd)")
        if at.text not in ACTS:
            raise ParseError(f"unknown action {at.text!r}", at.line, at.col, "Prm, Ret, Rcv or Snd")
        cls = ACTS[at.text]
        n = 1 if cls in (Prm, Ret) else 2
        act = cls(*[_loc(c) for _ in range(n)])
        if paren:
            c.expect(")", what="')' closing the event")
        return Evnt(act)
    if kw == "Bind":
        c.expect("(", what="'(' opening the binding")
        t = parse_term_body(c) if not c.at("(") else _paren_term(c)
        c.expect(",", what="','")
        v = _loc(c, parens=False) if not c.at("(") else _loc(c)
        c.expect(")", what="')'")
        if c.accept("("):
            e = _expr(c)
            c.expect(")", what="')' closing the expression")
        else:
            e = _expr(c)
        return Bind(t, v, e)
    if kw == "Csrt":
        return Csrt(_loc(c), _sort(c))
    if kw in ("Csame", "Same"):
        return Csame(_loc(c), _loc(c))
    if kw == "Ckypr":
        return Ckypr(_loc(c), _loc(c))
    if kw == "Chash":
        return Chash(_loc(c), _loc(c))
    if kw == "Cquot":
        return Cquot(_loc(c), c.str_())
    if kw == "Comm":
        return Comm(c.str_())
    raise ParseError(f"unknown statement {kw!r}", tok.line, tok.col,
                     "Evnt, Bind, Csrt, Csame, Ckypr, Chash, Cquot or Comm")


def _paren_term(c: Cursor) -> Term:
    c.expect("(")
    t = parse_term_body(c)
    c.expect(")", what="')' closing a term")
    return t


def parse_proc(text: str) -> Proc:
    c = Cursor.of(text)
    out = []
    while not c.at("eof"):
        if c.accept(";"):
            continue
        out.append(_stmt(c))
    return Proc(tuple(out))


# ---- comparison up to renaming ---------------------------------------------------

def rename_stmt(s: Stmt, f: dict[Loc, Loc]) -> Stmt:
    def r(x):
        return f.get(x, x) if isinstance(x, Loc) else x

    if isinstance(s, Evnt):
        return Evnt(s.a.map(r))
    if isinstance(s, Bind):
        return Bind(s.t, r(s.v), type(s.e)(*[r(x) for x in vars(s.e).values()]))
    return type(s)(*[r(x) for x in vars(s).values()])


def _all_locs(p: Proc) -> set[Loc]:
    out: set[Loc] = set()
    for s in p.stmts:
        out |= set(stmt_locs(s))
        if isinstance(s, Bind):
            out.add(s.v)
    return out


def match_procs(ours: Proc, ref: Proc, monotone_on: set[Loc] | None = None) -> dict[Loc, Loc] | None:
    """Find a renaming of ref's locations onto ours that makes the procs agree.

    Agreement means equal traces and equal multisets of Binds and checks, with
    Comm statements ignored. The renaming must preserve order among the
    locations in `monotone_on` (all of ref's by default). Returns the renaming
    or None.
    """
    from collections import Counter

    a = [s for s in ours.stmts if not isinstance(s, Comm)]
    b = [s for s in ref.stmts if not isinstance(s, Comm)]
    if len(a) != len(b):
        return None
    ref_locs = sorted(_all_locs(ref))
    our_locs = sorted(_all_locs(ours))
    if len(ref_locs) != len(our_locs):
        return None
    mono = set(ref_locs) if monotone_on is None else set(monotone_on)
    our_bind = {s.v: s for s in a if isinstance(s, Bind)}
    ref_bind = {s.v: s for s in b if isinstance(s, Bind)}

    def shape(bd: Bind | None):
        if bd is None:
            return None
        return (bd.t, type(bd.e), tuple(x for x in vars(bd.e).values() if not isinstance(x, Loc)))

    want_stmts = Counter(a)
    want_trace = [s for s in a if isinstance(s, Evnt)]

    def consistent(f: dict[Loc, Loc]) -> bool:
        done = [l for l in f if l in mono]
        return all((x < y) == (f[x] < f[y]) for x in done for y in done if x != y)

    def search(i: int, f: dict[Loc, Loc], used: set[Loc]) -> dict[Loc, Loc] | None:
        if i == len(ref_locs):
            renamed = [rename_stmt(s, f) for s in b]
            if Counter(renamed) == want_stmts and [s for s in renamed if isinstance(s, Evnt)] == want_trace:
                return dict(f)
            return None
        l = ref_locs[i]
        for m in our_locs:
            if m in used or shape(our_bind.get(m)) != shape(ref_bind.get(l)):
                continue
            f[l] = m
            if consistent(f):
                used.add(m)
                got = search(i + 1, f, used)
                if got is not None:
                    return got
                used.discard(m)
            del f[l]
        return None

    return search(0, {}, set())
