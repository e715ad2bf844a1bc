"""Symbolic messages, sorts, actions and roles."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Generic, Iterable, Iterator, Sequence, TypeVar

from .syntax import Cursor, quote

X = TypeVar("X")
Y = TypeVar("Y")


class Sort(Enum):
    Chan = "Chan"
    Data = "Data"
    Name = "Name"
    Text = "Text"
    Skey = "Skey"
    Akey = "Akey"
    Ikey = "Ikey"
    Mesg = "Mesg"

    def __str__(self) -> str:
        return self.value

    @property
    def is_base(self) -> bool:
        return self is not Sort.Mesg


BASE_SORTS = tuple(s for s in Sort if s.is_base)


class Term:
    """Base class of symbolic terms. Subclasses are frozen dataclasses."""

    __slots__ = ()
    rank = 0

    def key(self) -> tuple:
        raise NotImplementedError

    def __lt__(self, other: "Term") -> bool:
        return self.key() < other.key()

    def __str__(self) -> str:
        return show_term(self)


def _atom(name: str, rank: int, sort: Sort):
    @dataclass(frozen=True, repr=False)
    class Atom(Term):
        n: int
        def key(self) -> tuple:
            return (self.rank, self.n)
        def __repr__(self) -> str:
            return f"{name}({self.n})"

    Atom.__name__ = Atom.__qualname__ = name
    Atom.rank = rank
    Atom.sort = sort
    return Atom


Ch = _atom("Ch", 0, Sort.Chan)
Tx = _atom("Tx", 1, Sort.Text)
Dt = _atom("Dt", 2, Sort.Data)
Nm = _atom("Nm", 3, Sort.Name)
Sk = _atom("Sk", 4, Sort.Skey)
Ak = _atom("Ak", 5, Sort.Akey)
Ik = _atom("Ik", 6, Sort.Ikey)
Mg = _atom("Mg", 7, Sort.Mesg)

ATOMS = {c.__name__: c for c in (Ch, Tx, Dt, Nm, Sk, Ak, Ik, Mg)}


@dataclass(frozen=True, repr=False)
class Qt(Term):
    s: str
    rank = 8

    def key(self) -> tuple:
        return (self.rank, self.s)

    def __repr__(self) -> str:
        return f"Qt({self.s!r})"


@dataclass(frozen=True, repr=False)
class Pr(Term):
    a: Term
    b: Term
    rank = 9

    def key(self) -> tuple:
        return (self.rank, self.a.key(), self.b.key())

    def __repr__(self) -> str:
        return f"Pr({self.a!r}, {self.b!r})"


@dataclass(frozen=True, repr=False)
class En(Term):
    p: Term
    k: Term
    rank = 10

    def key(self) -> tuple:
        return (self.rank, self.p.key(), self.k.key())

    def __repr__(self) -> str:
        return f"En({self.p!r}, {self.k!r})"


@dataclass(frozen=True, repr=False)
class Hs(Term):
    t: Term
    rank = 11

    def key(self) -> tuple:
        return (self.rank, self.t.key())

    def __repr__(self) -> str:
        return f"Hs({self.t!r})"


def is_elementary(t: Term) -> bool:
    return not isinstance(t, (Pr, En, Hs, Qt))


def sort_of(t: Term) -> Sort:
    return getattr(type(t), "sort", Sort.Mesg)


def inverse(t: Term) -> Term:
    if isinstance(t, Ik):
        return Ak(t.n)
    if isinstance(t, Ak):
        return Ik(t.n)
    return t


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, (Pr,)):
        return (t.a, t.b)
    if isinstance(t, En):
        return (t.p, t.k)
    if isinstance(t, Hs):
        return (t.t,)
    return ()


def iter_subterms(t: Term) -> Iterator[Term]:
    """Pre-order walk, duplicates included."""
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        stack.extend(reversed(children(u)))


def subterms(t: Term) -> set[Term]:
    return set(iter_subterms(t))


def size(t: Term) -> int:
    return 1 + sum(size(c) for c in children(t))


def depth(t: Term) -> int:
    return 1 + max((depth(c) for c in children(t)), default=0)


# ---- actions -------------------------------------------------------------

class Act(Generic[X]):
    __slots__ = ()

    def payloads(self) -> tuple:
        raise NotImplementedError

    def map(self, f: Callable[[X], Y]) -> "Act[Y]":
        return type(self)(*map(f, self.payloads()))


@dataclass(frozen=True)
class Prm(Act[X]):
    x: X

    def payloads(self) -> tuple:
        return (self.x,)


@dataclass(frozen=True)
class Ret(Act[X]):
    x: X

    def payloads(self) -> tuple:
        return (self.x,)


@dataclass(frozen=True)
class Rcv(Act[X]):
    ch: X
    m: X

    def payloads(self) -> tuple:
        return (self.ch, self.m)


@dataclass(frozen=True)
class Snd(Act[X]):
    ch: X
    m: X

    def payloads(self) -> tuple:
        return (self.ch, self.m)


ACTS = {"Prm": Prm, "Ret": Ret, "Rcv": Rcv, "Snd": Snd}

Role = Sequence[Act]


class Polarity(Enum):
    Positive = "Positive"
    Negative = "Negative"
    Absent = "Absent"


def act_map_rel(r: Callable[[X, Y], bool], a: Act, b: Act) -> bool:
    """Lift a relation, given as a predicate, to actions."""
    return type(a) is type(b) and all(r(x, y) for x, y in zip(a.payloads(), b.payloads()))


def map_rel(r: Callable[[X, Y], bool], xs: Sequence[Act], ys: Sequence[Act]) -> bool:
    return len(xs) == len(ys) and all(act_map_rel(r, a, b) for a, b in zip(xs, ys))


def rel_of(pairs: Iterable[tuple]) -> Callable[[object, object], bool]:
    s = set(pairs)
    return lambda x, y: (x, y) in s


def act_terms(a: Act) -> Iterator[Term]:
    """Every subterm occurrence of the action, in pre-order."""
    for x in a.payloads():
        yield from iter_subterms(x)


def polarity(rl: Role, t: Term) -> Polarity:
    for a in rl:
        if any(u == t for u in act_terms(a)):
            return Polarity.Negative if isinstance(a, (Prm, Rcv)) else Polarity.Positive
    return Polarity.Absent


def polarities(rl: Role) -> dict[Term, Polarity]:
    """Polarity of every subterm of the role, in first-occurrence order."""
    out: dict[Term, Polarity] = {}
    for a in rl:
        pol = Polarity.Negative if isinstance(a, (Prm, Rcv)) else Polarity.Positive
        for u in act_terms(a):
            out.setdefault(u, pol)
    return out


def obtained_terms(rl: Role) -> set[Term]:
    out: set[Term] = set()
    for a in rl:
        if isinstance(a, Prm):
            out.add(a.x)
        elif isinstance(a, Rcv):
            out.add(a.m)
    return out


# ---- text form -------------------------------------------------------------

def show_term(t: Term, top: bool = False) -> str:
    if isinstance(t, (Ak, Ik)):
        body = f"{type(t).__name__} (Av {t.n})"
    elif is_elementary(t):
        body = f"{type(t).__name__} {t.n}"
    elif isinstance(t, Qt):
        body = f"Qt {quote(t.s)}"
    else:
        body = " ".join([type(t).__name__] + [show_term(c) for c in children(t)])
    return body if top else f"({body})"


def show_act(a: Act, show: Callable[[object], str] = show_term) -> str:
    return "(" + " ".join([type(a).__name__] + [show(x) for x in a.payloads()]) + ")"


def parse_term_at(c: Cursor) -> Term:
    c.expect("(", what="'(' starting a term")
    t = parse_term_body(c)
    c.expect(")", what="')' closing a term")
    return t


def parse_term_body(c: Cursor) -> Term:
    """A term without its outer parentheses, e.g. `Pr (Dt 1) (Dt 2)`."""
    tok = c.expect("ident", what="a term constructor")
    name = tok.text
    if name in ("Ak", "Ik"):
        if c.accept("("):
            c.expect("ident", "Av", what="'Av'")
            n = c.int_()
            c.expect(")", what="')'")
        else:
            n = c.int_()
        return ATOMS[name](n)
    if name in ATOMS:
        return ATOMS[name](c.int_())
    if name == "Qt":
        return Qt(c.str_())
    if name in ("Pr", "En"):
        a = parse_term_at(c)
        b = parse_term_at(c)
        return Pr(a, b) if name == "Pr" else En(a, b)
    if name == "Hs":
        return Hs(parse_term_at(c))
    c.pos -= 1
    raise c.fail("a term constructor (Ch Tx Dt Nm Sk Ak Ik Mg Qt Pr En Hs)")


def parse_term(text: str) -> Term:
    c = Cursor.of(text)
    t = parse_term_at(c) if c.at("(") else parse_term_body(c)
    c.done()
    return t
