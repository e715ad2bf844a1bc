"""Drivers that exercise the toolchain end to end: random roles, honest and
fuzzed runs, and the cross-checks between compiler, derivability and semantics."""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .compiler import CompileError, SaturationLog, compile_role, universe
from .derivability import derivable_closure
from .errors import Violation
from .interpreter import ExecEnv, ExecFailure, Mode, check_store, exec_proc, honest_env
from .proc_ir import Genr, Loc, Proc, PubOf, trace
from .runtime import (
    AtomV, EncV, HashV, PairV, PrivK, PubK, QuoteV, RtVal, TagSource, subvalues,
)
from .semantics import reflect_valuation, role_transcript_valid
from .terms import (
    Ak, Ch, Dt, En, Hs, Ik, Nm, Pr, Prm, Qt, Rcv, Ret, Role, Sk, Snd, Sort, Term, Tx,
    obtained_terms,
)

ATOM_POOL: tuple[Term, ...] = (
    Dt(1), Dt(2), Dt(3), Nm(1), Nm(2), Tx(1), Sk(1), Ik(1), Ak(1), Ik(2), Ak(2), Qt("a"),
)


def random_term(rng: random.Random, max_depth: int, pool=ATOM_POOL) -> Term:
    if max_depth <= 1 or rng.random() < 0.35:
        return rng.choice(pool)
    kind = rng.choice("PPEEH")
    if kind == "P":
        return Pr(random_term(rng, max_depth - 1, pool), random_term(rng, max_depth - 1, pool))
    if kind == "E":
        return En(random_term(rng, max_depth - 1, pool), random_term(rng, max_depth - 1, pool))
    return Hs(random_term(rng, max_depth - 1, pool))


def random_role(rng: random.Random, max_events: int = 6, max_depth: int = 4) -> list:
    """Starts with a channel parameter; the rest is a random mix of actions."""
    ch = Ch(1)
    acts: list = [Prm(ch)]
    for _ in range(rng.randint(1, max_events - 1)):
        kind = rng.choice(("Prm", "Prm", "Rcv", "Rcv", "Snd", "Snd", "Ret"))
        if kind == "Prm":
            acts.append(Prm(rng.choice(ATOM_POOL)))
        elif kind == "Rcv":
            acts.append(Rcv(ch, random_term(rng, max_depth)))
        elif kind == "Snd":
            acts.append(Snd(ch, random_term(rng, max_depth)))
        else:
            acts.append(Ret(random_term(rng, max_depth)))
    return acts


def random_compilable_roles(count: int, seed: int = 0, max_events: int = 6, max_depth: int = 4,
                            max_tries: int = 100_000) -> list[list]:
    rng = random.Random(seed)
    out = []
    for _ in range(max_tries):
        if len(out) >= count:
            break
        rl = random_role(rng, max_events, max_depth)
        try:
            compile_role(rl)
        except CompileError:
            continue
        out.append(rl)
    return out


# ---- single runs --------------------------------------------------------------------

@dataclass
class RunOutcome:
    completed: bool
    violations: list = field(default_factory=list)
    failure: ExecFailure | None = None
    store: dict | None = None
    transcript: list | None = None


def reflect_run(rl: Role, p: Proc, env: ExecEnv) -> RunOutcome:
    """Execute once; if the run completes, check the reflected valuation."""
    try:
        s, tr = exec_proc(p, env)
    except ExecFailure as f:
        return RunOutcome(False, failure=f)
    viol = list(check_store(p, s))
    if [a.map(s.get) for a in trace(p)] != tr:
        viol.append(Violation("Mapping", "transcript is not the store image of the trace"))
    viol += role_transcript_valid(rl, tr, reflect_valuation(p, s))
    return RunOutcome(True, viol, store=s, transcript=tr)


# ---- fuzzing ---------------------------------------------------------------------------

def _mutants(rng: random.Random, r: RtVal, pool: list[RtVal]) -> RtVal:
    """Replace one random subvalue of r."""
    subs = list(subvalues(r))
    target = rng.choice(subs)
    choice = rng.random()
    if choice < 0.25:
        repl: RtVal = rng.choice(pool)
    elif choice < 0.45:
        repl = AtomV(rng.choice((Sort.Chan, Sort.Data, Sort.Name, Sort.Text, Sort.Skey)), rng.randrange(5))
    elif choice < 0.55:
        repl = rng.choice((PrivK, PubK))(rng.randrange(3))
    elif choice < 0.7 and isinstance(target, EncV):
        repl = EncV(target.plain, target.key, rng.randrange(1 << 20))
    elif choice < 0.8 and isinstance(target, PairV):
        repl = PairV(target.b, target.a)
    elif choice < 0.9:
        repl = HashV(rng.choice(pool))
    else:
        repl = QuoteV(rng.choice(("a", "b")))
    return _replace(r, target, repl)


def _replace(r: RtVal, old: RtVal, new: RtVal) -> RtVal:
    if r == old:
        return new
    if isinstance(r, PairV):
        return PairV(_replace(r.a, old, new), _replace(r.b, old, new))
    if isinstance(r, HashV):
        return HashV(_replace(r.inner, old, new))
    if isinstance(r, EncV):
        return EncV(_replace(r.plain, old, new), _replace(r.key, old, new), r.tag)
    return r


def fuzz_env(env: ExecEnv, rng: random.Random, tags: TagSource) -> ExecEnv:
    inbound = list(env.inbound)
    params = list(env.params)
    pool = [x for v in inbound + params for x in subvalues(v)] or [AtomV(Sort.Data, 0)]
    target = inbound if inbound and rng.random() < 0.85 else params
    if target:
        i = rng.randrange(len(target))
        for _ in range(rng.randint(1, 2)):
            target[i] = _mutants(rng, target[i], pool)
    return ExecEnv(params, inbound, tags)


# ---- cross-check against derivability ------------------------------------------------

def dy_discrepancies(rl: Role, p: Proc) -> list[Violation]:
    """Bound terms with Genr-free expressions versus the derivable closure."""
    U = universe(rl)
    at = {b.v: b for b in p.binds()}
    memo: dict[Loc, bool] = {}

    def genr_free(l: Loc) -> bool:
        if l not in memo:
            e = at[l].e
            memo[l] = not isinstance(e, Genr) and all(genr_free(x) for x in vars(e).values() if isinstance(x, Loc))
        return memo[l]

    bound = {b.t for b in p.binds()}
    free_bound = {b.t for b in p.binds() if genr_free(b.v)}
    generated = {b.t for b in p.binds() if isinstance(b.e, Genr)}
    generated |= {b.t for b in p.binds() if isinstance(b.e, PubOf) and isinstance(at[b.e.l].e, Genr)}
    obtained = obtained_terms(rl)
    out = []
    derived = derivable_closure(obtained, U)
    for t in sorted(free_bound - derived):
        out.append(Violation("BindNotDerived", str(t)))
    for t in sorted(derivable_closure(obtained | generated, U) - bound):
        out.append(Violation("DerivedNotBound", str(t)))
    return out


# ---- the reflection campaign ------------------------------------------------------------

@dataclass
class Campaign:
    roles: int = 0
    runs: int = 0
    completed: int = 0
    halted: int = 0
    violations: list = field(default_factory=list)
    weight_violations: list = field(default_factory=list)
    intro_overflows: list = field(default_factory=list)
    dy: list = field(default_factory=list)

    def summary(self) -> str:
        return (f"roles={self.roles} runs={self.runs} completed={self.completed} "
                f"halted={self.halted} violations={len(self.violations)}")


def reflect_campaign(roles: list, seeds: range, fuzz_per_role: int = 0, seed: int = 0) -> Campaign:
    """Honest runs in both modes for each seed, plus fuzzed runs, for every role."""
    rng = random.Random(seed)
    c = Campaign()
    for rl in roles:
        log = SaturationLog()
        p = compile_role(rl, log)
        c.roles += 1
        c.weight_violations += [(rl, f) for f in log.weight_violations()]
        if log.intro_count() > len(universe(rl)):
            c.intro_overflows.append(rl)
        c.dy += [(rl, d) for d in dy_discrepancies(rl, p)]
        for s in seeds:
            for mode in Mode:
                env = honest_env(rl, mode, s, tags="random", proc=p)
                _tally(c, rl, reflect_run(rl, p, env))
        base = honest_env(rl, Mode.Fresh, seed, proc=p)
        for _ in range(fuzz_per_role):
            env = fuzz_env(base, rng, TagSource.seeded(rng.getrandbits(32)))
            _tally(c, rl, reflect_run(rl, p, env))
    return c


def _tally(c: Campaign, rl: Role, out: RunOutcome) -> None:
    c.runs += 1
    if out.completed:
        c.completed += 1
        c.violations += [(rl, v) for v in out.violations]
    else:
        c.halted += 1
