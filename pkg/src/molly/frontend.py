"""Text formats: role files, transcripts, stores and valuations."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError
from .proc_ir import Loc
from .runtime import RtVal, parse_value_at, show_value
from .semantics import Valuation
from .syntax import Cursor
from .terms import ACTS, Act, Prm, Ret, Role, parse_term_at, parse_term_body, show_act, show_term


@dataclass(frozen=True)
class RoleFile:
    name: str
    actions: tuple

    def __iter__(self):
        return iter(self.actions)

    def __len__(self) -> int:
        return len(self.actions)


def _act(c: Cursor, payload) -> Act:
    tok = c.expect("ident", what="an action (Prm Ret Rcv Snd)")
    if tok.text not in ACTS:
        raise ParseError(f"unknown action {tok.text!r}", tok.line, tok.col, "Prm, Ret, Rcv or Snd")
    cls = ACTS[tok.text]
    arity = 1 if cls in (Prm, Ret) else 2
    args = []
    for i in range(arity):
        if c.at(")") or c.at("eof"):
            raise c.fail(f"{arity} argument(s) for {tok.text}")
        args.append(payload(c))
    return cls(*args)


def parse_role(text: str, name: str = "") -> RoleFile:
    c = Cursor.of(text)
    acts = []
    while not c.at("eof"):
        c.expect("(", what="'(' starting an action")
        acts.append(_act(c, parse_term_at))
        c.expect(")", what="')' closing the action")
    return RoleFile(name, tuple(acts))


def print_role(rl: Role) -> str:
    return "".join(show_act(a) + "\n" for a in rl)


def load_role(path: str | Path) -> RoleFile:
    path = Path(path)
    return parse_role(path.read_text(), path.stem)


# ---- transcripts ---------------------------------------------------------------

def show_event(ev: Act) -> str:
    return " ".join([type(ev).__name__] + [show_value(r) for r in ev.payloads()])


def print_transcript(tr) -> str:
    return "".join(show_event(ev) + "\n" for ev in tr)


def parse_transcript(text: str) -> list:
    c = Cursor.of(text)
    out = []
    while not c.at("eof"):
        if c.accept(";"):
            continue
        out.append(_act(c, parse_value_at))
    return out


# ---- stores ----------------------------------------------------------------------

def print_store(s: dict) -> str:
    return "".join(f"{l} = {show_value(s[l])}\n" for l in sorted(s))


def parse_store(text: str) -> dict:
    c = Cursor.of(text)
    out: dict[Loc, RtVal] = {}
    while not c.at("eof"):
        c.expect("ident", "L", what="a location 'L n'")
        l = Loc(c.int_())
        c.expect("=", what="'='")
        out[l] = parse_value_at(c)
    return out


# ---- valuations -------------------------------------------------------------------

def print_valuation(v: Valuation) -> str:
    rows = sorted(v.pairs, key=lambda tr: (tr[0].key(), show_value(tr[1])))
    return "".join(f"{show_term(t, top=True)} |-> {show_value(r)}\n" for t, r in rows)


def parse_valuation(text: str) -> Valuation:
    c = Cursor.of(text)
    pairs = []
    while not c.at("eof"):
        t = parse_term_at(c) if c.at("(") else parse_term_body(c)
        c.expect("|->", what="'|->'")
        pairs.append((t, parse_value_at(c)))
    return Valuation.of(pairs)


EXAMPLE_ROLES = ("init1", "resp1", "genhash", "badhash", "encr1", "encrfail", "encrsym",
                 "fail1", "fail2", "fail3", "dupsend")


def example_role(name: str) -> RoleFile:
    """One of the bundled example roles, by file stem."""
    from importlib.resources import files

    return parse_role((files("molly") / "data" / "roles" / f"{name}.role").read_text(), name)
