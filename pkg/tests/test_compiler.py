import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import listing, role
from molly.compiler import (
    NotJustifiedEncryption, NotJustifiedHash, SaturationLog, UnboundChannel, UnsupportedGeneric,
    check_closed, check_justified, compile_role, initialize, invariant_violations, saturate, step,
    universe, weight,
)
from molly.harness import random_compilable_roles, random_role
from molly.proc_ir import (
    Bind, Chash, Comm, Csame, Csrt, DecrE, Evnt, Frst, Genr, Loc, PairE, Param, Proc, PubOf, Read,
    Scnd,
)
from molly.terms import Ak, Ch, Dt, En, Hs, Ik, Mg, Nm, Pr, Prm, Qt, Rcv, Ret, Snd, Sort

L = Loc


def stmts(p):
    return [s for s in p.stmts if not isinstance(s, Comm)]


def test_universe():
    assert universe(role("resp1")) == {Ch(1), Pr(Dt(1), Dt(2)), Dt(1), Dt(2)}
    assert universe([]) == set()
    assert universe(role("genhash")) == {Ch(1), Dt(1), Hs(Dt(1))}


def test_initialize():
    st_ = initialize(role("genhash"))
    assert st_.proc.stmts[0] == Bind(Dt(1), L(1), Genr(1, Sort.Data))
    assert st_.done == () and st_.todo == tuple(role("genhash"))
    assert not any(isinstance(b.e, Genr) for b in initialize(role("init1")).proc.binds())
    rl = [Prm(Ch(1)), Snd(Ch(1), Ik(1))]
    binds = list(initialize(rl).proc.binds())
    assert binds[:2] == [Bind(Ik(1), L(1), Genr(1, Sort.Ikey)), Bind(Ak(1), L(2), PubOf(L(1)))]


def test_initialize_quotes_and_generics():
    rl = [Prm(Ch(1)), Snd(Ch(1), Pr(Qt("hi"), Dt(1)))]
    binds = list(initialize(rl).proc.binds())
    assert binds[0] == Bind(Dt(1), L(1), Genr(1, Sort.Data))
    assert any(b.t == Qt("hi") for b in binds)
    with pytest.raises(UnsupportedGeneric):
        initialize([Prm(Ch(1)), Snd(Ch(1), Mg(1))])
    # a received generic is fine
    compile_role([Prm(Ch(1)), Rcv(Ch(1), Mg(1)), Snd(Ch(1), Mg(1))])


def test_saturate_pair_reception():
    p = Proc((Evnt(Rcv(L(1), L(2))), Bind(Ch(1), L(1), Param(1)), Bind(Pr(Dt(1), Dt(2)), L(2), Read(1))))
    U = universe(role("resp1"))
    q = saturate(p, U)
    new = q.stmts[len(p.stmts):]
    assert Bind(Dt(1), L(3), Frst(L(2))) in new
    assert Bind(Dt(2), L(4), Scnd(L(2))) in new
    assert sum(isinstance(s, Csrt) and s.s is Sort.Data for s in new) == 2
    assert saturate(q, U) == q


def test_saturate_rejects_unjustified():
    with pytest.raises(NotJustifiedEncryption) as e:
        compile_role(role("encrfail"))
    assert e.value.term == En(Nm(0), Ak(2))
    assert e.value.missing == Ik(2)


def test_steps_of_init1():
    st_ = initialize(role("init1"))
    st_ = step(st_)
    assert stmts(st_.proc) == [Evnt(Prm(L(1))), Bind(Ch(1), L(1), Param(1)), Csrt(L(1), Sort.Chan)]
    st_ = step(st_)
    n = len(st_.proc.stmts)
    # the pair is introduced as soon as both halves are bound, before the send
    st_ = step(step(st_))
    tail = stmts(Proc(st_.proc.stmts[n:]))
    assert tail[-1] == Evnt(Snd(L(1), L(4)))
    assert Bind(Pr(Dt(1), Dt(2)), L(4), PairE(L(2), L(3))) in tail[:-1]
    n = len(st_.proc.stmts)
    st_ = step(st_)
    assert stmts(Proc(st_.proc.stmts[n:])) == [Evnt(Rcv(L(1), L(5))), Bind(Dt(2), L(5), Read(1)),
                                              Csame(L(5), L(3))]
    assert not st_.todo
    with pytest.raises(ValueError):
        step(st_)


def test_compile_examples():
    assert compile_role([]) == Proc(())
    with pytest.raises(NotJustifiedHash) as e:
        compile_role(role("badhash"))
    assert e.value.term == Hs(Dt(1))
    with pytest.raises(UnboundChannel):
        compile_role([Rcv(Ch(1), Dt(1))])
    # a channel first used in a send is positive, hence generated
    assert Bind(Ch(2), L(1), Genr(1, Sort.Chan)) in compile_role([Prm(Dt(1)), Snd(Ch(2), Dt(1))]).stmts


def test_comm_texts():
    comms = [s.s for s in compile_role(role("encrsym")).stmts if isinstance(s, Comm)]
    assert comms == ["input (Ch 1)", "input (Dt 2)", "receiving (En (Nm 0) (Hs (Dt 2))) on (Ch 1)",
                     "sending (Nm 0) on (Ch 1)"]


def test_encr1_uses_public_key_introduction():
    p = compile_role(role("encr1"))
    assert Bind(Ak(2), L(3), PubOf(L(2))) in p.stmts
    assert Bind(Nm(0), L(5), DecrE(L(4), L(2))) in p.stmts


def test_genhash_checks_received_hash():
    p = compile_role(role("genhash"))
    assert Chash(L(4), L(1)) in p.stmts
    assert not any(isinstance(s, Csame) for s in p.stmts)


def test_ret_action():
    p = compile_role([Prm(Dt(1)), Ret(Hs(Dt(1)))])
    assert Evnt(Ret(L(2))) in p.stmts


# ---- conditions ---------------------------------------------------------------------

@pytest.mark.parametrize("name", ["init1", "resp1", "genhash", "encr1", "encrsym", "fail2", "fail3"])
def test_compiled_examples_are_closed_and_justified(name):
    rl = role(name)
    p = compile_role(rl)
    assert check_closed(p, universe(rl)) == []
    assert check_justified(p) == []


def test_check_closed_detects_missing_equality():
    p = listing("init1")
    mutated = Proc(tuple(s for s in p.stmts if not isinstance(s, Csame)))
    bad = check_closed(mutated, universe(role("init1")))
    # L5 loses both its link to L3 and, through it, L3's sort check
    assert sorted(v.rule for v in bad) == ["CheckEquality", "CheckEquality", "CheckSort"]
    assert all("(Dt 2)" in v.detail for v in bad)
    assert check_closed(Proc(()), set()) == []


def test_check_closed_detects_missing_elimination():
    p = Proc((Bind(Ch(1), L(1), Param(1)), Csrt(L(1), Sort.Chan),
              Bind(Pr(Dt(1), Dt(2)), L(2), Read(1))))
    rules = {v.rule for v in check_closed(p, {Ch(1), Pr(Dt(1), Dt(2)), Dt(1), Dt(2)})}
    assert rules == {"PairElimination"}


def test_check_justified():
    assert check_justified(compile_role(role("encr1"))) == []
    pre = Proc((Evnt(Prm(L(1))), Bind(Ch(1), L(1), Param(1)), Csrt(L(1), Sort.Chan),
                Evnt(Rcv(L(1), L(2))), Bind(En(Nm(0), Ak(2)), L(2), Read(1))))
    bad = check_justified(pre)
    assert [v.rule for v in bad] == ["Encryption"]
    assert "(Ik (Av 2))" in bad[0].detail
    assert check_justified(listing("init1")) == []


# ---- weight -----------------------------------------------------------------------------

def test_weight_examples():
    pr = Pr(Dt(1), Dt(2))
    assert weight(Proc((Bind(pr, L(1), Read(1)),))) == 2 * 3
    assert weight(Proc(())) == 0
    for name in ("init1", "resp1", "encr1", "encrsym"):
        assert weight(compile_role(role(name))) == 0


def test_weight_rises_on_nested_pair_elimination():
    # Hand computation: the outer pair is a redex for both projections (2 x 5).
    # After the left projection it keeps one redex (5) and the new inner pair
    # is a redex for both projections (2 x 3), so 10 becomes 11.
    outer = Pr(Pr(Dt(1), Dt(2)), Dt(3))
    before = Proc((Bind(outer, L(1), Read(1)),))
    after = Proc(before.stmts + (Bind(Pr(Dt(1), Dt(2)), L(2), Frst(L(1))),))
    assert weight(before) == 10
    assert weight(after) == 11


def test_saturation_log():
    log = SaturationLog()
    compile_role(role("resp1"), log)
    assert [f.rule for f in log.firings] == ["CheckSort", "PairElimL", "PairElimR", "CheckSort", "CheckSort"]
    assert log.intro_count() == 0
    assert log.weight_violations() == []
    log = SaturationLog()
    compile_role([Prm(Ch(1)), Rcv(Ch(1), Pr(Pr(Dt(1), Dt(2)), Dt(3)))], log)
    assert [(f.rule, f.weight_before, f.weight_after) for f in log.weight_violations()] == [
        ("PairElimL", 10, 11)]


# ---- properties -------------------------------------------------------------------------

def test_invariants_hold_on_random_roles():
    for rl in random_compilable_roles(60, seed=21):
        compile_role(rl, check_invariants=True)


def test_invariants_of_examples():
    for name in ("init1", "resp1", "genhash", "encr1", "encrsym", "fail2", "fail3"):
        st_ = initialize(role(name))
        while st_.todo:
            st_ = step(st_)
            assert invariant_violations(st_) == []


@settings(max_examples=50)
@given(st.integers(0, 10**6))
def test_compilation_is_deterministic(seed):
    import random

    rl = random_role(random.Random(seed))
    try:
        a = compile_role(rl)
    except Exception as e:  # noqa: BLE001 - compare failures too
        with pytest.raises(type(e)):
            compile_role(list(rl))
        return
    assert compile_role(list(rl)) == a


def test_intro_firings_bounded_by_universe():
    for rl in random_compilable_roles(60, seed=8):
        log = SaturationLog()
        compile_role(rl, log)
        assert log.intro_count() <= len(universe(rl))
