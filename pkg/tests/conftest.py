from pathlib import Path

import pytest
from hypothesis import strategies as st

from molly.frontend import example_role
from molly.proc_ir import parse_proc
from molly.runtime import AtomV, EncV, HashV, PairV, PrivK, PubK, QuoteV, ATOM_SORTS
from molly.terms import Ak, Ch, Dt, En, Hs, Ik, Nm, Pr, Qt, Sk, Tx

LISTINGS = Path(__file__).parent / "fixtures" / "listings"

# criterion number -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def role(name: str) -> list:
    return list(example_role(name))


def listing(name: str):
    return parse_proc((LISTINGS / f"{name}.proc").read_text())


@pytest.fixture
def load_role():
    return role


@pytest.fixture
def load_listing():
    return listing


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


# ---- hypothesis strategies ------------------------------------------------------

small = st.integers(min_value=0, max_value=3)

atoms = st.one_of(
    small.map(Ch), small.map(Tx), small.map(Dt), small.map(Nm), small.map(Sk),
    small.map(Ak), small.map(Ik), st.sampled_from(["a", "b"]).map(Qt),
)


def terms(max_leaves: int = 12):
    return st.recursive(
        atoms,
        lambda kids: st.one_of(
            st.builds(Pr, kids, kids), st.builds(En, kids, kids), st.builds(Hs, kids),
        ),
        max_leaves=max_leaves,
    )


value_atoms = st.one_of(
    st.builds(AtomV, st.sampled_from(ATOM_SORTS), small),
    small.map(PrivK), small.map(PubK), st.sampled_from(["a", "b"]).map(QuoteV),
)


def values(max_leaves: int = 10):
    return st.recursive(
        value_atoms,
        lambda kids: st.one_of(
            st.builds(PairV, kids, kids), st.builds(HashV, kids),
            st.builds(EncV, kids, kids, st.integers(0, 5)),
        ),
        max_leaves=max_leaves,
    )
