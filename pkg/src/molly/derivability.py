"""Dolev-Yao derivability with free quotes and public-from-private keys.

Used as an oracle independent of the compiler: it reasons about terms only,
never about procs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .terms import Ak, En, Hs, Ik, Pr, Qt, Role, Term, inverse, subterms


@dataclass(frozen=True)
class DerivationStep:
    rule: str
    premises: tuple[Term, ...]
    conclusion: Term


def _close(hyps: set[Term], U: set[Term]) -> tuple[set[Term], list[DerivationStep]]:
    known: set[Term] = set()
    steps: list[DerivationStep] = []

    def learn(t: Term, rule: str, prem: tuple[Term, ...]) -> bool:
        if t in known:
            return False
        known.add(t)
        steps.append(DerivationStep(rule, prem, t))
        return True

    for h in sorted(hyps):
        learn(h, "hypothesis", ())
    for t in sorted(U):
        if isinstance(t, Qt):
            learn(t, "quote", ())

    changed = True
    while changed:
        changed = False
        for t in sorted(known):
            if isinstance(t, Pr):
                changed |= learn(t.a, "pair-left", (t,))
                changed |= learn(t.b, "pair-right", (t,))
            elif isinstance(t, En) and inverse(t.k) in known:
                changed |= learn(t.p, "decrypt", (t, inverse(t.k)))
        for t in sorted(U - known):
            if isinstance(t, Pr) and t.a in known and t.b in known:
                changed |= learn(t, "pair", (t.a, t.b))
            elif isinstance(t, En) and t.p in known and t.k in known:
                changed |= learn(t, "encrypt", (t.p, t.k))
            elif isinstance(t, Hs) and t.t in known:
                changed |= learn(t, "hash", (t.t,))
            elif isinstance(t, Ak) and Ik(t.n) in known:
                changed |= learn(t, "public-of-private", (Ik(t.n),))
    return known, steps


def derivable_closure(hyps: set[Term], U: set[Term]) -> set[Term]:
    """Least set containing hyps and closed under the rules, with constructions kept inside U."""
    return _close(set(hyps), set(U))[0]


def derivation(hyps: set[Term], U: set[Term]) -> list[DerivationStep]:
    return _close(set(hyps), set(U))[1]


def dy_derivable(hyps: set[Term], goal: Term, U: set[Term]) -> bool:
    if goal not in U:
        raise ValueError(f"goal {goal} lies outside the universe")
    return goal in derivable_closure(hyps, U)


def role_universe(rl: Role) -> set[Term]:
    out: set[Term] = set()
    for a in rl:
        for x in a.payloads():
            out |= subterms(x)
    return out


class Verdict(Enum):
    Executable = "Executable"
    NonExecutable = "NonExecutable"


@dataclass(frozen=True)
class Reason:
    kind: str  # MissingDecryptionKey or MissingHashBody
    term: Term

    def __str__(self) -> str:
        return f"{self.kind} {self.term}"


@dataclass(frozen=True)
class ExecutabilityReport:
    verdict: Verdict
    reasons: tuple[Reason, ...] = field(default=())

    def __str__(self) -> str:
        return "\n".join([self.verdict.value] + [str(r) for r in self.reasons])


def executability(rl: Role) -> ExecutabilityReport:
    """Other compile errors (unsupported generics, unbound channels) propagate."""
    from .compiler import NotJustifiedEncryption, NotJustifiedHash, compile_role

    try:
        compile_role(rl)
    except NotJustifiedEncryption as e:
        return ExecutabilityReport(Verdict.NonExecutable, (Reason("MissingDecryptionKey", e.missing),))
    except NotJustifiedHash as e:
        return ExecutabilityReport(Verdict.NonExecutable, (Reason("MissingHashBody", e.missing),))
    return ExecutabilityReport(Verdict.Executable)

