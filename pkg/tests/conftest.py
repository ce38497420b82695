"""Shared fixtures and a generator of small random session automata."""
import pytest
from hypothesis import strategies as st

from kmcheck import Automaton, System, receive, send
from kmcheck.cli import corpus_names, load_corpus


@pytest.fixture(scope="session")
def corpus():
    return {name: load_corpus(name) for name in corpus_names()}


@pytest.fixture
def csl():
    return load_corpus("client_server_logger")


@pytest.fixture
def ping():
    return load_corpus("ping")


@st.composite
def small_systems(draw, max_participants=3, max_states=3, labels=("a", "b")):
    """Valid CSA systems: every state is all-send, all-receive or final, and deterministic."""
    n = draw(st.integers(2, max_participants))
    names = ["p", "q", "r"][:n]
    machines = []
    for me in names:
        states = [str(i) for i in range(draw(st.integers(1, max_states)))]
        others = [x for x in names if x != me]
        trans = []
        for q in states:
            kind = draw(st.sampled_from(["send", "recv", "final"]))
            if kind == "final":
                continue
            picks = draw(st.lists(st.tuples(st.sampled_from(others), st.sampled_from(labels),
                                            st.sampled_from(states)), max_size=3,
                                  unique_by=lambda t: (t[0], t[1])))
            for partner, label, dst in picks:
                act = send(me, partner, label) if kind == "send" else receive(partner, me, label)
                trans.append((q, act, dst))
        machines.append(Automaton(me, "0", tuple(trans)))
    return System(machines, name="random")


# one line per acceptance criterion, repeated at the end of the run
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
