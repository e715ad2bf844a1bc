import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import role, terms, values
from molly.cli import cli_main
from molly.compiler import compile_role
from molly.errors import ParseError
from molly.frontend import (
    EXAMPLE_ROLES, example_role, load_role, parse_role, parse_store, parse_transcript,
    parse_valuation, print_role, print_store, print_transcript, print_valuation,
)
from molly.interpreter import Mode, exec_proc, honest_env
from molly.proc_ir import Loc, match_procs, parse_proc, print_proc
from molly.runtime import AtomV, PairV
from molly.semantics import Valuation, reflect_valuation
from molly.terms import Ch, Dt, Pr, Prm, Rcv, Ret, Snd, Sort

INIT1 = """\
(Prm (Ch 1))
(Prm (Dt 1))
(Prm (Dt 2))
(Snd (Ch 1) (Pr (Dt 1) (Dt 2)))
(Rcv (Ch 1) (Dt 2))
"""


def test_parse_role():
    rf = parse_role(INIT1, "init1")
    assert list(rf) == [Prm(Ch(1)), Prm(Dt(1)), Prm(Dt(2)), Snd(Ch(1), Pr(Dt(1), Dt(2))), Rcv(Ch(1), Dt(2))]
    assert rf.name == "init1" and len(rf) == 5
    assert list(parse_role("")) == []
    assert list(parse_role("# only a comment\n")) == []


def test_arity_error():
    with pytest.raises(ParseError) as e:
        parse_role("(Snd (Ch 1))")
    assert (e.value.line, e.value.col) == (1, 12)
    with pytest.raises(ParseError):
        parse_role("(Send (Ch 1) (Dt 1))")
    with pytest.raises(ParseError):
        parse_role("(Prm (Ch 1)")


@pytest.mark.parametrize("name", EXAMPLE_ROLES)
def test_example_roles_round_trip(name):
    rf = example_role(name)
    assert list(parse_role(print_role(rf))) == list(rf)


def test_print_role():
    assert print_role(parse_role(INIT1)) == INIT1


acts = st.one_of(
    st.builds(Prm, terms(4)), st.builds(Ret, terms(4)),
    st.builds(Rcv, terms(2), terms(4)), st.builds(Snd, terms(2), terms(4)),
)


@given(st.lists(acts, max_size=5))
def test_role_round_trip(rl):
    assert list(parse_role(print_role(rl))) == rl


@given(st.lists(st.one_of(st.builds(Prm, values()), st.builds(Snd, values(), values()),
                          st.builds(Rcv, values(), values()), st.builds(Ret, values())), max_size=5))
def test_transcript_round_trip(tr):
    assert parse_transcript(print_transcript(tr)) == tr


@given(st.dictionaries(st.integers(1, 30).map(Loc), values(), max_size=6))
def test_store_round_trip(s):
    assert parse_store(print_store(s)) == s


@settings(max_examples=50)
@given(st.lists(st.tuples(terms(4), values()), max_size=6))
def test_valuation_round_trip(pairs):
    v = Valuation.of(pairs)
    assert parse_valuation(print_valuation(v)) == v


def test_file_formats_by_example():
    a, b = AtomV(Sort.Data, 1), AtomV(Sort.Data, 2)
    assert print_transcript([Snd(AtomV(Sort.Chan, 1), PairV(a, b))]) == \
        "Snd Atom[Chan,1] Pair(Atom[Data,1], Atom[Data,2])\n"
    assert print_store({Loc(2): a}) == "L 2 = Atom[Data,1]\n"
    assert print_valuation(Valuation.of([(Dt(1), a)])) == "Dt 1 |-> Atom[Data,1]\n"


def test_load_role(tmp_path):
    f = tmp_path / "mine.role"
    f.write_text(INIT1)
    rf = load_role(f)
    assert rf.name == "mine" and len(rf) == 5


# ---- CLI --------------------------------------------------------------------------------

@pytest.fixture
def role_file(tmp_path):
    def make(name):
        f = tmp_path / f"{name}.role"
        f.write_text(print_role(example_role(name)))
        return str(f)
    return make


def test_cli_compile(role_file, capsys, load_listing):
    assert cli_main(["compile", role_file("init1")]) == 0
    out = capsys.readouterr().out
    assert match_procs(parse_proc(out), load_listing("init1")) is not None


def test_cli_compile_to_file(role_file, tmp_path):
    out = tmp_path / "x.proc"
    assert cli_main(["compile", role_file("encrsym"), "-o", str(out)]) == 0
    assert parse_proc(out.read_text()) == compile_role(role("encrsym"))


def test_cli_compile_failure(role_file, capsys):
    assert cli_main(["compile", role_file("badhash")]) == 1
    assert "NotJustifiedHash" in capsys.readouterr().err


def test_cli_check(role_file, capsys):
    assert cli_main(["check", role_file("badhash")]) == 1
    assert capsys.readouterr().out.strip() == "MissingHashBody (Dt 1)"
    assert cli_main(["check", role_file("fail2")]) == 0
    assert capsys.readouterr().out.strip() == "Executable"


def test_cli_reflect(role_file, capsys):
    assert cli_main(["reflect", role_file("encr1"), "--runs", "50"]) == 0
    assert "violations=0" in capsys.readouterr().out


def test_cli_usage_errors(capsys, tmp_path):
    with pytest.raises(SystemExit) as e:
        cli_main(["frobnicate"])
    assert e.value.code == 2
    assert cli_main(["check", str(tmp_path / "missing.role")]) == 2
    bad = tmp_path / "bad.role"
    bad.write_text("(Snd (Ch 1))")
    assert cli_main(["check", str(bad)]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_run_and_verify(role_file, tmp_path, capsys):
    tr, st_ = tmp_path / "t.txt", tmp_path / "s.txt"
    src = role_file("encr1")
    assert cli_main(["run", src, "--emit-transcript", str(tr), "--emit-store", str(st_)]) == 0
    procf = tmp_path / "p.proc"
    assert cli_main(["compile", src, "-o", str(procf)]) == 0
    assert cli_main(["verify", str(procf), str(tr), "--store", str(st_)]) == 0
    assert capsys.readouterr().out.strip().endswith("valid")
    # encr1 has no generated values, so replay works without a witness
    assert cli_main(["verify", str(procf), str(tr)]) == 0
    lines = tr.read_text().splitlines()
    lines[-1] = "Snd Atom[Chan,1000000] Atom[Name,5]"
    tr.write_text("\n".join(lines) + "\n")
    assert cli_main(["verify", str(procf), str(tr), "--store", str(st_)]) == 1


def test_cli_run_fail2(role_file, capsys):
    src = role_file("fail2")
    assert cli_main(["run", src, "--mode", "fresh"]) == 1
    assert "DecryptFailed" in capsys.readouterr().err
    assert cli_main(["run", src, "--mode", "shared", "--tags", "random", "--seed", "4"]) == 0


def test_cli_run_proc_with_env(tmp_path, capsys, load_listing):
    procf = tmp_path / "resp.proc"
    procf.write_text(print_proc(load_listing("resp1")))
    env = tmp_path / "env.txt"
    env.write_text("param Atom[Chan,1]\nread Pair(Atom[Data,1], Atom[Data,2])\n")
    assert cli_main(["run", str(procf), "--env", str(env)]) == 0
    assert capsys.readouterr().out.splitlines()[-1] == "Snd Atom[Chan,1] Atom[Data,2]"
    assert cli_main(["run", str(procf)]) == 2


def test_cli_verify_needs_witness(role_file, tmp_path, capsys):
    src = role_file("genhash")
    tr = tmp_path / "t.txt"
    assert cli_main(["run", src, "--emit-transcript", str(tr)]) == 0
    procf = tmp_path / "p.proc"
    cli_main(["compile", src, "-o", str(procf)])
    assert cli_main(["verify", str(procf), str(tr)]) == 2


def test_seed_from_environment(role_file, monkeypatch, capsys):
    src = role_file("encr1")
    monkeypatch.setenv("MOLLY_SEED", "9")
    assert cli_main(["run", src, "--tags", "random"]) == 0
    a = capsys.readouterr().out
    assert cli_main(["run", src, "--tags", "random", "--seed", "9"]) == 0
    assert capsys.readouterr().out == a
    monkeypatch.setenv("MOLLY_SEED", "nine")
    assert cli_main(["run", src]) == 2


def test_honest_transcripts_reflect(role_file):
    rl = role("init1")
    p = compile_role(rl)
    s, tr = exec_proc(p, honest_env(rl, Mode.Fresh, 0, proc=p))
    v = reflect_valuation(p, s)
    assert parse_valuation(print_valuation(v)) == v
