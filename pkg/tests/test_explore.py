"""Full and reduced exploration, checked against a naive explorer written from the step rules."""
from collections import deque

import pydot
import pytest
from hypothesis import given, settings

from kmcheck import ResourceLimit, build_full_ts, build_rts, check_obi, parse_system, partition, to_dot
from kmcheck.explore import FULL, REDUCED

from conftest import small_systems

DEAD_END_NO_OBI = """
machine p
init 0
end
machine q
init 0
0 1 q p ! a
0 0 q r ! a
end
machine r
init 0
0 1 r p ! a
1 0 q r ? a
end
"""


def naive_graph(system, k):
    """Breadth-first search over (states dict, queues dict) straight from the automata."""
    names = list(system.participants)

    def freeze(states, queues):
        return (tuple(states[p] for p in names),
                tuple(tuple(queues.get(c, ())) for c in system.channels))

    start = ({p: system.automata[p].initial for p in names}, {})
    seen = {freeze(*start)}
    edges = set()
    todo = deque([start])
    while todo:
        states, queues = todo.popleft()
        for p in names:
            for src, act, dst in system.automata[p].transitions:
                if src != states[p]:
                    continue
                q = dict(queues)
                word = list(q.get(act.channel, ()))
                if act.is_send:
                    if len(word) >= k:
                        continue
                    word.append(act.label)
                else:
                    if not word or word[0] != act.label:
                        continue
                    word.pop(0)
                q[act.channel] = tuple(word)
                nstates = dict(states, **{p: dst})
                a, b = freeze(states, queues), freeze(nstates, q)
                edges.add((a, act, b))
                if b not in seen:
                    seen.add(b)
                    todo.append((nstates, q))
    return seen, edges


def as_plain(ts):
    nodes = {(n.control, n.queues) for n in ts.nodes}
    edges = {((s.control, s.queues), a, (t.control, t.queues)) for s, a, t in ts.edges}
    return nodes, edges


class TestFullTs:
    @pytest.mark.parametrize("k", [1, 2])
    def test_corpus_matches_naive(self, corpus, k):
        for name, s in corpus.items():
            if name.startswith("rock"):
                continue
            assert as_plain(build_full_ts(s, k)) == naive_graph(s, k), name

    @settings(max_examples=60, deadline=None)
    @given(small_systems())
    def test_random_matches_naive(self, s):
        assert as_plain(build_full_ts(s, 2)) == naive_graph(s, 2)

    def test_deterministic_order(self, csl):
        assert build_full_ts(csl, 2).edges == build_full_ts(csl, 2).edges

    def test_kind_and_bound(self, csl):
        ts = build_full_ts(csl, 1)
        assert ts.kind == FULL and ts.bound == 1
        assert len(ts) == len(ts.edges)

    def test_node_cap(self, corpus):
        with pytest.raises(ResourceLimit) as err:
            build_full_ts(corpus["unbounded_mp_mq"], 3, node_cap=5)
        assert err.value.cap == 5

    def test_bound_must_be_positive(self, csl):
        with pytest.raises(ValueError):
            build_full_ts(csl, 0)


class TestPartition:
    def test_groups_by_subject(self, corpus):
        s = corpus["ordered_list"]
        groups = partition(s, s.initial(), 1)
        for g in groups:
            assert len({a.subject for a in g}) == 1
        assert [len(g) for g in groups] == sorted(len(g) for g in groups)

    def test_covers_enabled(self, corpus):
        for name, s in corpus.items():
            ts = build_full_ts(s, 1) if not name.startswith("rock") else None
            if ts is None:
                continue
            for node in ts.nodes[:50]:
                flat = {a for g in partition(s, node, 1) for a in g}
                assert flat == {a for a, _ in ts.successors(node)}, name


class TestReduced:
    def test_csl_edges(self, csl):
        rts = build_rts(csl, 1)
        assert rts.kind == REDUCED
        assert len(rts.edges) == 11
        assert len(rts.edges) <= len(build_full_ts(csl, 1).edges)

    def test_ordered_list_shape(self, corpus):
        rts = build_rts(corpus["ordered_list"], 1)
        assert (len(rts.nodes), len(rts.edges)) == (4, 3)

    @pytest.mark.parametrize("k", [1, 2])
    def test_subgraph_of_full(self, corpus, k):
        for name, s in corpus.items():
            rts, ts = build_rts(s, k), build_full_ts(s, k)
            assert rts.node_set <= ts.node_set, name
            assert rts.edge_set <= ts.edge_set, name

    def test_one_subject_per_node(self, corpus):
        for name, s in corpus.items():
            rts = build_rts(s, 2)
            for n in rts.nodes:
                assert len({a.subject for a, _ in rts.successors(n)}) <= 1, name

    @settings(max_examples=60, deadline=None)
    @given(small_systems())
    def test_dead_ends_preserved(self, s):
        # the reduction only promises this when output choices are bound-independent
        ts, rts = build_full_ts(s, 2), build_rts(s, 2)
        assert rts.edge_set <= ts.edge_set
        if check_obi(s, ts).holds:
            dead = {n for n in ts.nodes if not ts.successors(n)}
            assert dead <= rts.node_set

    def test_dead_end_lost_without_obi(self):
        # q's choice depends on which queue is full, so the reduced graph commits to one branch
        s = parse_system(DEAD_END_NO_OBI)
        ts, rts = build_full_ts(s, 2), build_rts(s, 2)
        assert not check_obi(s, ts).holds
        dead = {n for n in ts.nodes if not ts.successors(n)}
        assert not dead <= rts.node_set


class TestDot:
    def test_parses_back(self, csl):
        rts = build_rts(csl, 1)
        (graph,) = pydot.graph_from_dot_data(to_dot(rts, "csl"))
        labels = [e.get_label().strip('"') for e in graph.get_edges()]
        assert sorted(labels) == sorted(str(a) for _, a, _ in rts.edges)
        shapes = [n.get_shape() for n in graph.get_nodes() if n.get_shape()]
        assert shapes.count("doublecircle") == 1
