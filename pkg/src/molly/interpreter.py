"""Executing procs against the runtime model."""
from __future__ import annotations

import copy
from dataclasses import dataclass, field
from enum import Enum

from .errors import Violation
from .proc_ir import (
    Bind, Chash, Ckypr, Comm, Cquot, Csame, Csrt, DecrE, EncrE, Evnt, Expr, Frst, Genr,
    HashE, Loc, PairE, Param, Proc, PubOf, QuotE, Read, Scnd,
)
from .runtime import (
    AtomV, PrivK, PubK, RtVal, TagSource, rt_decr, rt_encr_check, rt_encrypt, rt_frst, rt_gen,
    rt_hash, rt_kypr, rt_pair, rt_pubof, rt_quote, rt_scnd, rt_sort,
)
from .terms import (
    Ak, En, Hs, Ik, Mg, Pr, Prm, Qt, Rcv, Role, Sort, Term,
    is_elementary, polarities, show_term, sort_of,
)

Store = dict  # Loc -> RtVal
Transcript = list  # list of Act[RtVal]


class Reason(Enum):
    FrstOnNonPair = "FrstOnNonPair"
    ScndOnNonPair = "ScndOnNonPair"
    DecryptFailed = "DecryptFailed"
    PubOfOnNonPrivate = "PubOfOnNonPrivate"
    SortMismatch = "SortMismatch"
    SameMismatch = "SameMismatch"
    KeyPairMismatch = "KeyPairMismatch"
    HashMismatch = "HashMismatch"
    QuoteMismatch = "QuoteMismatch"
    InputExhausted = "InputExhausted"


class ExecFailure(Exception):
    """Execution halted at statement `stmt_index` (0-based)."""

    def __init__(self, stmt_index: int, reason: Reason, store: Store, transcript: Transcript):
        self.stmt_index = stmt_index
        self.reason = reason
        self.store = store
        self.transcript = transcript
        super().__init__(f"halted at statement {stmt_index}: {reason.value}")


@dataclass
class ExecEnv:
    params: list = field(default_factory=list)
    inbound: list = field(default_factory=list)
    tags: TagSource = field(default_factory=TagSource.counter)


def _input_index(p: Proc) -> dict[Loc, tuple[str, int]]:
    out = {}
    for b in p.binds():
        if isinstance(b.e, Param):
            out[b.v] = ("param", b.e.n)
        elif isinstance(b.e, Read):
            out[b.v] = ("read", b.e.n)
    return out


def exec_proc(p: Proc, env: ExecEnv) -> tuple[Store, Transcript]:
    """Run p. Raises ExecFailure at the first failing statement."""
    store: Store = {}
    tr: Transcript = []
    inputs = _input_index(p)
    tags = env.tags

    def take(kind: str, n: int, i: int) -> RtVal:
        src = env.params if kind == "param" else env.inbound
        if not 1 <= n <= len(src):
            raise ExecFailure(i, Reason.InputExhausted, store, tr)
        return src[n - 1]

    def get(l: Loc) -> RtVal:
        if l not in store:
            raise ValueError(f"{l} read before it was defined")
        return store[l]

    def evaluate(e: Expr, i: int) -> RtVal:
        def need(r: RtVal | None, why: Reason) -> RtVal:
            if r is None:
                raise ExecFailure(i, why, store, tr)
            return r

        if isinstance(e, PairE):
            return rt_pair(get(e.l1), get(e.l2))
        if isinstance(e, Frst):
            return need(rt_frst(get(e.l)), Reason.FrstOnNonPair)
        if isinstance(e, Scnd):
            return need(rt_scnd(get(e.l)), Reason.ScndOnNonPair)
        if isinstance(e, EncrE):
            return rt_encrypt(get(e.lp), get(e.lk), tags)
        if isinstance(e, DecrE):
            return need(rt_decr(get(e.le), get(e.lk)), Reason.DecryptFailed)
        if isinstance(e, HashE):
            return rt_hash(get(e.l))
        if isinstance(e, QuotE):
            return rt_quote(e.s)
        if isinstance(e, PubOf):
            return need(rt_pubof(get(e.l)), Reason.PubOfOnNonPrivate)
        if isinstance(e, Genr):
            return rt_gen(e.n, e.srt)
        if isinstance(e, (Param, Read)):
            return take("param" if isinstance(e, Param) else "read", e.n, i)
        raise TypeError(f"unknown expression {e!r}")

    def check(ok: bool, why: Reason, i: int) -> None:
        if not ok:
            raise ExecFailure(i, why, store, tr)

    for i, s in enumerate(p.stmts):
        if isinstance(s, Evnt):
            a = s.a
            if isinstance(a, (Prm, Rcv)):
                v = a.x if isinstance(a, Prm) else a.m
                if v not in inputs:
                    raise ValueError(f"{v} is received but never bound to an input")
                store[v] = take(*inputs[v], i)
            tr.append(a.map(get))
        elif isinstance(s, Bind):
            r = evaluate(s.e, i)
            if s.v in store and store[s.v] != r:
                raise ValueError(f"{s.v} bound twice to different values")
            store[s.v] = r
        elif isinstance(s, Csrt):
            check(rt_sort(get(s.v)) == s.s, Reason.SortMismatch, i)
        elif isinstance(s, Csame):
            check(get(s.v1) == get(s.v2), Reason.SameMismatch, i)
        elif isinstance(s, Ckypr):
            check(rt_kypr(get(s.v1), get(s.v2)), Reason.KeyPairMismatch, i)
        elif isinstance(s, Chash):
            check(get(s.vh) == rt_hash(get(s.vt)), Reason.HashMismatch, i)
        elif isinstance(s, Cquot):
            check(get(s.v) == rt_quote(s.s), Reason.QuoteMismatch, i)
        elif not isinstance(s, Comm):
            raise TypeError(f"unknown statement {s!r}")
    return store, tr


def check_store(p: Proc, s: Store) -> list[Violation]:
    """Does s respect every check and every binding expression of p?"""
    out: list[Violation] = []

    def has(*locs: Loc) -> bool:
        missing = [l for l in locs if l not in s]
        for l in missing:
            out.append(Violation("Undefined", f"{l} has no value"))
        return not missing

    for st in p.stmts:
        if isinstance(st, Csrt) and has(st.v):
            if rt_sort(s[st.v]) != st.s:
                out.append(Violation("Csrt", f"{st.v} is not of sort {st.s}"))
        elif isinstance(st, Csame) and has(st.v1, st.v2):
            if s[st.v1] != s[st.v2]:
                out.append(Violation("Csame", f"{st.v1} and {st.v2} differ"))
        elif isinstance(st, Ckypr) and has(st.v1, st.v2):
            if not rt_kypr(s[st.v1], s[st.v2]):
                out.append(Violation("Ckypr", f"{st.v1} and {st.v2} are not a key pair"))
        elif isinstance(st, Chash) and has(st.vh, st.vt):
            if s[st.vh] != rt_hash(s[st.vt]):
                out.append(Violation("Chash", f"{st.vh} is not the hash of {st.vt}"))
        elif isinstance(st, Cquot) and has(st.v):
            if s[st.v] != rt_quote(st.s):
                out.append(Violation("Cquot", f"{st.v} is not the quote {st.s!r}"))
        elif isinstance(st, Bind):
            e, v = st.e, st.v
            if isinstance(e, (Genr, Param, Read)):
                has(v)
                continue
            if isinstance(e, QuotE):
                if has(v) and s[v] != rt_quote(e.s):
                    out.append(Violation("Quot", f"{v}"))
                continue
            locs = [x for x in vars(e).values() if isinstance(x, Loc)]
            if not has(v, *locs):
                continue
            ok = True
            if isinstance(e, PairE):
                ok = rt_pair(s[e.l1], s[e.l2]) == s[v]
            elif isinstance(e, EncrE):
                ok = rt_encr_check(s[e.lp], s[e.lk], s[v])
            elif isinstance(e, HashE):
                ok = rt_hash(s[e.l]) == s[v]
            elif isinstance(e, PubOf):
                ok = rt_pubof(s[e.l]) == s[v]
            elif isinstance(e, Frst):
                ok = rt_frst(s[e.l]) == s[v]
            elif isinstance(e, Scnd):
                ok = rt_scnd(s[e.l]) == s[v]
            elif isinstance(e, DecrE):
                ok = rt_decr(s[e.le], s[e.lk]) == s[v]
            if not ok:
                out.append(Violation(type(e).__name__, f"{v} does not respect its expression"))
    return out


# ---- the honest peer -------------------------------------------------------------

FRESH_BASE = 1_000_000  # ids of peer-chosen atoms; generated values use small ids
ENV_TAG_BASE = 1 << 40  # peer encryptions never share tags with the proc's in counter mode


class Mode(Enum):
    Fresh = "fresh"
    Shared = "shared"


def _tag_sources(seed: int, tags: str) -> tuple[TagSource, TagSource]:
    if tags == "counter":
        return TagSource.counter(), TagSource.counter(ENV_TAG_BASE)
    return TagSource.seeded(seed), TagSource.seeded(seed ^ 0x5EED_0F_BEEF)


def honest_env(rl: Role, mode: Mode = Mode.Fresh, seed: int = 0, tags: str = "counter",
               proc: Proc | None = None) -> ExecEnv:
    """Parameters and inbound messages a cooperative peer would supply.

    Elementary terms the role receives get fresh peer atoms. Terms the proc
    generates are mirrored by evaluating its Genr bindings, so the peer can
    send back, say, the hash of a value the role produced. In Fresh mode every
    encryption the peer builds gets its own tag; in Shared mode an encryption
    the proc has already computed is reused, otherwise one value per symbolic
    encryption is shared across the run.
    """
    from .compiler import compile_role

    if isinstance(mode, str):
        mode = Mode(mode)
    p = proc if proc is not None else compile_role(rl)
    proc_tags, peer_tags = _tag_sources(seed, tags)
    atoms: dict[Term, RtVal] = {}
    for b in p.binds():
        if isinstance(b.e, Genr):
            atoms[b.t] = rt_gen(b.e.n, b.e.srt)
    for b in p.binds():
        if isinstance(b.t, Ak) and isinstance(b.e, PubOf) and Ik(b.t.n) in atoms:
            atoms[b.t] = rt_pubof(atoms[Ik(b.t.n)])
    next_id = FRESH_BASE
    for t, pol in polarities(rl).items():
        if not is_elementary(t) or t in atoms:
            continue
        if isinstance(t, (Ak, Ik)):
            partner = Ik(t.n) if isinstance(t, Ak) else Ak(t.n)
            if partner in atoms:
                kid = atoms[partner].id
            else:
                kid, next_id = next_id, next_id + 1
            atoms[t] = PubK(kid) if isinstance(t, Ak) else PrivK(kid)
        elif isinstance(t, Mg):
            atoms[t] = rt_hash(AtomV(Sort.Data, next_id))  # any compound value has sort Mesg
            next_id += 1
        else:
            atoms[t] = AtomV(sort_of(t), next_id)
            next_id += 1

    shared: dict[Term, RtVal] = {}

    def value(t: Term) -> RtVal:
        if t in atoms:
            return atoms[t]
        if isinstance(t, Pr):
            return rt_pair(value(t.a), value(t.b))
        if isinstance(t, Hs):
            return rt_hash(value(t.t))
        if isinstance(t, Qt):
            return rt_quote(t.s)
        if isinstance(t, En):
            if mode is Mode.Shared:
                if t not in shared:
                    shared[t] = rt_encrypt(value(t.p), value(t.k), peer_tags)
                return shared[t]
            return rt_encrypt(value(t.p), value(t.k), peer_tags)
        raise ValueError(f"no value for {show_term(t)}")

    params = [value(a.x) for a in rl if isinstance(a, Prm)]
    inbound: list[RtVal] = []
    encs = [b for b in p.binds() if isinstance(b.e, EncrE)]
    for a in rl:
        if not isinstance(a, Rcv):
            continue
        if mode is Mode.Shared and encs:
            # replay the proc up to this reception to learn its own encryptions
            try:
                store, _ = exec_proc(p, ExecEnv(params, inbound, copy.deepcopy(proc_tags)))
            except ExecFailure as f:
                store = f.store
            for b in encs:
                if b.v in store and b.t not in shared:
                    shared[b.t] = store[b.v]
        inbound.append(value(a.m))
    return ExecEnv(params, inbound, proc_tags)

