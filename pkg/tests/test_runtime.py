import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import value_atoms, values
from molly.runtime import (
    AtomV, EncV, HashV, PairV, PrivK, PubK, QuoteV, TagSource, parse_value, rt_decr,
    rt_encr_check, rt_encrypt, rt_frst, rt_gen, rt_hash, rt_inv_check, rt_inverse, rt_kypr,
    rt_pair, rt_pubof, rt_quote, rt_scnd, rt_sort, show_value,
)
from molly.terms import BASE_SORTS, Sort

D1, D2 = AtomV(Sort.Data, 1), AtomV(Sort.Data, 2)


def test_pairs():
    assert rt_frst(rt_pair(D1, D2)) == D1
    assert rt_scnd(rt_pair(D1, D2)) == D2
    assert rt_frst(D1) is None
    assert rt_scnd(HashV(D1)) is None
    assert rt_pair(D1, D2) != rt_pair(D2, D1)


def test_encryption_is_randomized():
    tags = TagSource.counter()
    a, b = rt_encrypt(D1, D2, tags), rt_encrypt(D1, D2, tags)
    assert a != b
    assert rt_encr_check(D1, D2, a) and rt_encr_check(D1, D2, b)
    assert rt_decr(rt_encrypt(D1, PubK(3), tags), PrivK(3)) == D1


def test_encr_check():
    e = EncV(D1, D2, 4)
    assert rt_encr_check(D1, D2, e)
    assert not rt_encr_check(D2, D2, e)
    assert not rt_encr_check(D1, D2, HashV(D1))


def test_decr():
    k = AtomV(Sort.Skey, 1)
    assert rt_decr(EncV(D1, k, 1), k) == D1
    assert rt_decr(EncV(D1, PubK(3), 1), PrivK(3)) == D1
    assert rt_decr(EncV(D1, PubK(3), 1), PubK(3)) is None
    assert rt_decr(D1, k) is None


SMALL = [AtomV(Sort.Skey, 1), AtomV(Sort.Data, 1), PrivK(1), PubK(1), PrivK(2), PubK(2), HashV(D1)]


def test_decr_against_axioms_by_enumeration():
    # enumerate (key, decryption key) pairs; decryption succeeds iff the keys are inverse
    for ke, kd in itertools.product(SMALL, repeat=2):
        e = EncV(D1, ke, 0)
        got = rt_decr(e, kd)
        if rt_inv_check(ke, kd):
            assert got == D1
        else:
            assert got is None


def test_hash_and_quote():
    assert rt_hash(D1) == rt_hash(D1)
    assert rt_hash(D1) != rt_hash(D2)
    assert rt_quote("a") != rt_quote("b")


def test_keys():
    assert rt_pubof(PrivK(5)) == PubK(5)
    assert rt_pubof(PubK(5)) is None
    assert rt_pubof(D1) is None
    assert rt_kypr(PrivK(5), PubK(5))
    assert not rt_kypr(PubK(5), PrivK(5))
    assert rt_inv_check(AtomV(Sort.Skey, 2), AtomV(Sort.Skey, 2))
    assert not rt_inv_check(PubK(1), PubK(1))
    assert rt_inv_check(PubK(1), PrivK(1)) and rt_inv_check(PrivK(1), PubK(1))


def test_gen():
    assert rt_sort(rt_gen(1, Sort.Data)) is Sort.Data
    assert rt_gen(1, Sort.Data) != rt_gen(2, Sort.Data)
    assert rt_gen(1, Sort.Data) == rt_gen(1, Sort.Data)
    assert rt_sort(PairV(D1, D2)) is Sort.Mesg
    with pytest.raises(ValueError):
        rt_gen(1, Sort.Mesg)
    with pytest.raises(ValueError):
        AtomV(Sort.Ikey, 1)


def test_gen_distinct_across_sorts():
    vals = [rt_gen(n, s) for n in range(4) for s in BASE_SORTS]
    assert len(set(vals)) == len(vals)


# ---- axioms as properties ------------------------------------------------------------

@given(values(), values())
def test_pair_project(a, b):
    r = rt_pair(a, b)
    assert (rt_frst(r), rt_scnd(r)) == (a, b)


@given(values())
def test_pair_project_converse(r):
    if rt_frst(r) is not None:
        assert rt_pair(rt_frst(r), rt_scnd(r)) == r
    else:
        assert not isinstance(r, PairV)


@given(st.integers(0, 1000), st.sampled_from(BASE_SORTS))
def test_gen_sort(n, srt):
    assert rt_sort(rt_gen(n, srt)) is srt


@given(values())
def test_pubof_sorts_and_bijection(r):
    pub = rt_pubof(r)
    if pub is not None:
        assert rt_sort(r) is Sort.Ikey and rt_sort(pub) is Sort.Akey
    assert (pub is not None) == (rt_sort(r) is Sort.Ikey)
    if rt_sort(r) is Sort.Akey:
        assert rt_pubof(PrivK(r.id)) == r


@given(values(), values(), values(), st.integers(0, 5))
def test_encr_decr(p, ke, kd, tag):
    e = EncV(p, ke, tag)
    assert rt_encr_check(p, ke, e)
    if rt_inv_check(ke, kd):
        assert rt_decr(e, kd) == p


@given(values(), values(), values())
def test_decr_encr(e, ke, kd):
    p = rt_decr(e, kd)
    if p is not None and rt_inv_check(ke, kd):
        assert rt_encr_check(p, ke, e)


@given(values())
def test_inverse_is_functional(r):
    # rt_inverse(r) is the unique partner among a pool that contains it
    pool = [r, rt_inverse(r), PrivK(0), PubK(0), D1, HashV(r)]
    partners = {x for x in pool if rt_inv_check(r, x)}
    assert partners == {rt_inverse(r)}


# ---- tags -----------------------------------------------------------------------------

def test_seeded_tags_do_not_collide():
    tags = TagSource.seeded(99)
    es = {rt_encrypt(D1, D2, tags).tag for _ in range(1000)}
    assert len(es) == 1000


def test_counter_tags_never_repeat():
    tags = TagSource.counter()
    assert len({tags.fresh() for _ in range(1000)}) == 1000


def test_seeded_tags_are_reproducible():
    a, b = TagSource.seeded(5), TagSource.seeded(5)
    assert [a.fresh() for _ in range(5)] == [b.fresh() for _ in range(5)]
    assert all(0 <= TagSource.seeded(1).fresh() < 2**64 for _ in range(10))


# ---- text form ---------------------------------------------------------------------------

def test_show_value():
    assert show_value(EncV(D2, HashV(AtomV(Sort.Data, 3)), 7)) == "Enc[tag=7](Atom[Data,2], Hash(Atom[Data,3]))"
    assert show_value(PairV(PrivK(5), QuoteV("x"))) == 'Pair(Priv[5], Quote("x"))'


@given(values())
def test_value_round_trip(r):
    assert parse_value(show_value(r)) == r


@given(value_atoms)
def test_atom_round_trip(r):
    assert parse_value(show_value(r)) == r
