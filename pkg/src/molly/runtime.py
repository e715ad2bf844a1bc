"""A concrete model of the runtime theory, with tagged (randomized) encryption."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, Union

from .errors import ParseError
from .syntax import Cursor, quote
from .terms import Sort

ATOM_SORTS = (Sort.Chan, Sort.Data, Sort.Name, Sort.Text, Sort.Skey)


@dataclass(frozen=True)
class AtomV:
    sort: Sort
    id: int

    def __post_init__(self):
        if self.sort not in ATOM_SORTS:
            raise ValueError(f"AtomV cannot have sort {self.sort}")


@dataclass(frozen=True)
class PrivK:
    id: int


@dataclass(frozen=True)
class PubK:
    id: int


@dataclass(frozen=True)
class PairV:
    a: "RtVal"
    b: "RtVal"


@dataclass(frozen=True)
class HashV:
    inner: "RtVal"


@dataclass(frozen=True)
class QuoteV:
    s: str


@dataclass(frozen=True)
class EncV:
    plain: "RtVal"
    key: "RtVal"
    tag: int


RtVal = Union[AtomV, PrivK, PubK, PairV, HashV, QuoteV, EncV]


class TagSource:
    """Supplies encryption tags. Counter mode never repeats; SeededRandom draws 64-bit tags."""

    def __init__(self, mode: str = "counter", start: int = 1, seed: int = 0):
        if mode not in ("counter", "random"):
            raise ValueError(f"unknown tag mode {mode!r}")
        self.mode = mode
        self.next = start
        self.seed = seed
        self._rng = random.Random(seed)

    @classmethod
    def counter(cls, start: int = 1) -> "TagSource":
        return cls("counter", start=start)

    @classmethod
    def seeded(cls, seed: int) -> "TagSource":
        return cls("random", seed=seed)

    def fresh(self) -> int:
        if self.mode == "counter":
            t = self.next
            self.next += 1
            return t
        return self._rng.getrandbits(64)

    def __repr__(self) -> str:
        if self.mode == "counter":
            return f"TagSource.counter({self.next})"
        return f"TagSource.seeded({self.seed})"


def rt_pair(a: RtVal, b: RtVal) -> RtVal:
    return PairV(a, b)


def rt_frst(r: RtVal) -> RtVal | None:
    return r.a if isinstance(r, PairV) else None


def rt_scnd(r: RtVal) -> RtVal | None:
    return r.b if isinstance(r, PairV) else None


def rt_hash(r: RtVal) -> RtVal:
    return HashV(r)


def rt_quote(s: str) -> RtVal:
    return QuoteV(s)


def rt_encrypt(p: RtVal, k: RtVal, tags: TagSource) -> RtVal:
    return EncV(p, k, tags.fresh())


def rt_encr_check(p: RtVal, k: RtVal, e: RtVal) -> bool:
    return isinstance(e, EncV) and e.plain == p and e.key == k


def rt_inv_check(a: RtVal, b: RtVal) -> bool:
    if isinstance(a, PrivK):
        return isinstance(b, PubK) and a.id == b.id
    if isinstance(a, PubK):
        return isinstance(b, PrivK) and a.id == b.id
    return a == b


def rt_inverse(r: RtVal) -> RtVal:
    """The unique r' with rt_inv_check(r, r'). Total in the model, never used by procs."""
    if isinstance(r, PrivK):
        return PubK(r.id)
    if isinstance(r, PubK):
        return PrivK(r.id)
    return r


def rt_decr(e: RtVal, kd: RtVal) -> RtVal | None:
    if isinstance(e, EncV) and rt_inv_check(e.key, kd):
        return e.plain
    return None


def rt_pubof(r: RtVal) -> RtVal | None:
    return PubK(r.id) if isinstance(r, PrivK) else None


def rt_kypr(a: RtVal, b: RtVal) -> bool:
    pub = rt_pubof(a)
    return pub is not None and pub == b


def rt_gen(n: int, srt: Sort) -> RtVal:
    if srt is Sort.Mesg:
        raise ValueError("cannot generate a value of sort Mesg")
    if srt is Sort.Ikey:
        return PrivK(n)
    if srt is Sort.Akey:
        return PubK(n)
    return AtomV(srt, n)


def rt_sort(r: RtVal) -> Sort:
    if isinstance(r, AtomV):
        return r.sort
    if isinstance(r, PrivK):
        return Sort.Ikey
    if isinstance(r, PubK):
        return Sort.Akey
    return Sort.Mesg


def subvalues(r: RtVal) -> Iterator[RtVal]:
    yield r
    if isinstance(r, PairV):
        yield from subvalues(r.a)
        yield from subvalues(r.b)
    elif isinstance(r, HashV):
        yield from subvalues(r.inner)
    elif isinstance(r, EncV):
        yield from subvalues(r.plain)
        yield from subvalues(r.key)


def value_depth(r: RtVal) -> int:
    if isinstance(r, PairV):
        return 1 + max(value_depth(r.a), value_depth(r.b))
    if isinstance(r, HashV):
        return 1 + value_depth(r.inner)
    if isinstance(r, EncV):
        return 1 + max(value_depth(r.plain), value_depth(r.key))
    return 1


# ---- text form -------------------------------------------------------------

def show_value(r: RtVal) -> str:
    if isinstance(r, AtomV):
        return f"Atom[{r.sort},{r.id}]"
    if isinstance(r, PrivK):
        return f"Priv[{r.id}]"
    if isinstance(r, PubK):
        return f"Pub[{r.id}]"
    if isinstance(r, PairV):
        return f"Pair({show_value(r.a)}, {show_value(r.b)})"
    if isinstance(r, HashV):
        return f"Hash({show_value(r.inner)})"
    if isinstance(r, QuoteV):
        return f"Quote({quote(r.s)})"
    if isinstance(r, EncV):
        return f"Enc[tag={r.tag}]({show_value(r.plain)}, {show_value(r.key)})"
    raise TypeError(f"not a runtime value: {r!r}")


def parse_value_at(c: Cursor) -> RtVal:
    tok = c.expect("ident", what="a value constructor (Atom Priv Pub Pair Hash Quote Enc)")
    name = tok.text
    if name == "Atom":
        c.expect("[")
        st = c.expect("ident", what="a sort")
        try:
            srt = Sort(st.text)
        except ValueError:
            raise ParseError(f"unknown sort {st.text!r}", st.line, st.col, "a sort") from None
        if srt not in ATOM_SORTS:
            raise ParseError(f"atoms cannot have sort {srt}", st.line, st.col, "Chan, Data, Name, Text or Skey")
        c.expect(",")
        n = c.int_()
        c.expect("]")
        return AtomV(srt, n)
    if name in ("Priv", "Pub"):
        c.expect("[")
        n = c.int_()
        c.expect("]")
        return PrivK(n) if name == "Priv" else PubK(n)
    if name == "Quote":
        c.expect("(")
        s = c.str_()
        c.expect(")")
        return QuoteV(s)
    if name == "Hash":
        c.expect("(")
        v = parse_value_at(c)
        c.expect(")")
        return HashV(v)
    if name == "Pair":
        c.expect("(")
        a = parse_value_at(c)
        c.expect(",")
        b = parse_value_at(c)
        c.expect(")")
        return PairV(a, b)
    if name == "Enc":
        c.expect("[")
        c.expect("ident", "tag", what="'tag'")
        c.expect("=")
        tag = c.int_()
        c.expect("]")
        c.expect("(")
        p = parse_value_at(c)
        c.expect(",")
        k = parse_value_at(c)
        c.expect(")")
        return EncV(p, k, tag)
    raise ParseError(f"unknown value constructor {name!r}", tok.line, tok.col,
                     "Atom, Priv, Pub, Pair, Hash, Quote or Enc")


def parse_value(text: str) -> RtVal:
    c = Cursor.of(text)
    v = parse_value_at(c)
    c.done()
    return v
