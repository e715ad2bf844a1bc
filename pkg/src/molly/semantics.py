"""Valuations, transcript validity for roles and procs, reflection and completion."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import Violation
from .interpreter import ExecEnv, ExecFailure, Store, Transcript, check_store, exec_proc
from .proc_ir import EncrE, Genr, Proc, trace
from .runtime import (
    EncV, HashV, PairV, QuoteV, RtVal, TagSource, rt_decr, rt_encr_check, rt_inverse,
    rt_kypr, rt_quote, rt_sort, show_value, subvalues,
)
from .terms import (
    Ak, En, Hs, Ik, Pr, Prm, Qt, Rcv, Role, Term, inverse, is_elementary, map_rel, show_term,
    sort_of, subterms,
)


@dataclass(frozen=True)
class Valuation:
    """A finite relation between terms and runtime values."""

    pairs: frozenset = frozenset()

    @classmethod
    def of(cls, pairs: Iterable[tuple[Term, RtVal]]) -> "Valuation":
        return cls(frozenset(pairs))

    def __iter__(self) -> Iterator[tuple[Term, RtVal]]:
        return iter(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def images(self) -> dict[Term, set[RtVal]]:
        out: dict[Term, set[RtVal]] = {}
        for t, r in self.pairs:
            out.setdefault(t, set()).add(r)
        return out

    def holds(self, t: Term, r: RtVal) -> bool:
        return (t, r) in self.pairs


def _sorted(pairs) -> list:
    return sorted(pairs, key=lambda tr: (tr[0].key(), show_value(tr[1])))


def _clauses(v: Valuation, strong: bool) -> list[Violation]:
    img = v.images()
    out: list[Violation] = []

    def bad(rule: str, t: Term, r: RtVal | None = None, why: str = "") -> None:
        at = show_term(t) + (f" |-> {show_value(r)}" if r is not None else "")
        out.append(Violation(rule, f"{at}{': ' + why if why else ''}"))

    for t, rs in sorted(img.items(), key=lambda kv: kv[0].key()):
        if is_elementary(t) and len(rs) > 1:
            bad("Functional", t, why=f"{len(rs)} distinct values")
    for t, r in _sorted(v.pairs):
        if is_elementary(t):
            if rt_sort(r) != sort_of(t):
                bad("Sorts", t, r, f"value has sort {rt_sort(r)}")
        elif isinstance(t, Pr):
            if not isinstance(r, PairV) or not (v.holds(t.a, r.a) and v.holds(t.b, r.b)):
                bad("Pairing", t, r)
        elif isinstance(t, Hs):
            if not isinstance(r, HashV) or not v.holds(t.t, r.inner):
                bad("Hashing", t, r)
        elif isinstance(t, Qt):
            if r != rt_quote(t.s):
                bad("Quote", t, r)
        elif isinstance(t, En):
            plains = img.get(t.p, set())
            encr = any(rt_encr_check(rp, rk, r) for rp in plains for rk in img.get(t.k, ()))
            decr = any(rt_decr(r, rk) == rp for rp in plains for rk in img.get(inverse(t.k), ()))
            if strong and not encr:
                bad("StrongEncryption", t, r, "no plaintext and key images encrypt to this value")
            elif not (encr or decr):
                bad("Encryption", t, r, "neither encryption nor decryption condition holds")
    for t, rs in sorted(img.items(), key=lambda kv: kv[0].key()):
        if isinstance(t, Ik):
            pubs = img.get(Ak(t.n), set())
            for r1 in rs:
                for r2 in pubs:
                    if not rt_kypr(r1, r2):
                        bad("KeyPairs", t, r1, f"not the private half of {show_value(r2)}")
                if strong and not any(rt_kypr(r1, r2) for r2 in pubs):
                    bad("StrongKeyPairs", t, r1, "no public partner")
        elif isinstance(t, Ak) and strong:
            privs = img.get(Ik(t.n), set())
            for r2 in rs:
                if not any(rt_kypr(r1, r2) for r1 in privs):
                    bad("StrongKeyPairs", t, r2, "no private partner")
    return out


def is_valuation(v: Valuation) -> list[Violation]:
    return _clauses(v, strong=False)


def is_strong_valuation(v: Valuation) -> list[Violation]:
    return _clauses(v, strong=True)


def induces(v: Valuation, rl: Role, tr: Transcript) -> bool:
    return map_rel(v.holds, list(rl), list(tr))


def role_transcript_valid(rl: Role, tr: Transcript, v: Valuation) -> list[Violation]:
    out = is_valuation(v)
    if len(rl) != len(tr):
        out.append(Violation("Induces", f"role has {len(rl)} actions, transcript {len(tr)}"))
    else:
        for i, (a, b) in enumerate(zip(rl, tr)):
            if not map_rel(v.holds, [a], [b]):
                out.append(Violation("Induces", f"event {i} is not related to action {i}"))
    return out


def reflect_valuation(p: Proc, s: Store) -> Valuation:
    return Valuation.of((b.t, s[b.v]) for b in p.binds() if b.v in s)


def completion(v: Valuation) -> Valuation:
    return Valuation(v.pairs | {(inverse(t), rt_inverse(r)) for t, r in v.pairs})


# ---- validity for procs ------------------------------------------------------------

class WitnessRequired(ValueError):
    pass


def _alignment(p: Proc, tr: Transcript) -> list[Violation]:
    """Violations visible from the trace alone: shape, and one value per location."""
    tp = trace(p)
    if len(tp) != len(tr):
        return [Violation("TraceShape", f"proc has {len(tp)} events, transcript {len(tr)}")]
    out = []
    seen: dict = {}
    for i, (a, b) in enumerate(zip(tp, tr)):
        if type(a) is not type(b):
            out.append(Violation("TraceShape", f"event {i}: {type(a).__name__} vs {type(b).__name__}"))
            continue
        for l, r in zip(a.payloads(), b.payloads()):
            if l in seen and seen[l] != r:
                out.append(Violation("Mapping", f"event {i}: {l} carries two different values"))
            seen.setdefault(l, r)
    return out


def proc_transcript_valid(p: Proc, tr: Transcript, witness: Store | None = None) -> list[Violation]:
    out = _alignment(p, tr)
    if out:
        return out
    if witness is None:
        if any(isinstance(b.e, (Genr, EncrE)) for b in p.binds()):
            raise WitnessRequired("generated or encrypted values cannot be recovered from the transcript")
        params = [ev.x for ev in tr if isinstance(ev, Prm)]
        inbound = [ev.m for ev in tr if isinstance(ev, Rcv)]
        try:
            witness, _ = exec_proc(p, ExecEnv(params, inbound, TagSource.counter()))
        except ExecFailure as f:
            return [Violation("Replay", f"replaying the transcript halts: {f.reason.value} at statement {f.stmt_index}")]
    out = check_store(p, witness)
    for i, (a, b) in enumerate(zip(trace(p), tr)):
        if any(l not in witness for l in a.payloads()):
            continue
        if a.map(witness.get) != b:
            out.append(Violation("Mapping", f"event {i} is not the store image of the trace"))
    return out


# ---- small-instance search ------------------------------------------------------------

def _seed_pairs(rl: Role, tr: Transcript) -> set | None:
    if len(rl) != len(tr):
        return None
    seed = set()
    for a, b in zip(rl, tr):
        if type(a) is not type(b):
            return None
        seed |= set(zip(a.payloads(), b.payloads()))
    return seed


def _compatible(t: Term, r: RtVal) -> bool:
    if is_elementary(t):
        return rt_sort(r) == sort_of(t)
    return isinstance(r, {Pr: PairV, En: EncV, Hs: HashV, Qt: QuoteV}[type(t)])


def search_valuation(rl: Role, tr: Transcript, max_candidates: int = 16) -> Valuation | None:
    """Brute force over relations between role subterms and transcript subvalues.

    Enumerates supersets of the pairs forced by the transcript, smallest first.
    Only meant for tiny instances; raises ValueError past `max_candidates`.
    """
    seed = _seed_pairs(rl, tr)
    if seed is None:
        return None
    U = set().union(*(subterms(x) for a in rl for x in a.payloads())) if rl else set()
    U |= {inverse(t) for t in U}
    vals = {r for ev in tr for x in ev.payloads() for r in subvalues(x)}
    vals |= {rt_inverse(r) for r in vals}
    cands = sorted(((t, r) for t in U for r in vals if (t, r) not in seed and _compatible(t, r)),
                   key=lambda tr_: (tr_[0].key(), show_value(tr_[1])))
    if len(cands) > max_candidates:
        raise ValueError(f"{len(cands)} candidate pairs exceed the search bound {max_candidates}")
    for k in range(len(cands) + 1):
        for extra in itertools.combinations(cands, k):
            v = Valuation(frozenset(seed) | frozenset(extra))
            if not is_valuation(v):
                return v
    return None
