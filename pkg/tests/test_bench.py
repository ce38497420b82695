"""Benchmark family shape and the suite runner."""
import csv
import io

import pytest

from kmcheck import BenchSpec, build_rts, check_kmc, directedness, generate, run_suite, validate_csa
from kmcheck.bench import CSV_COLUMNS, to_csv


def label_paths(machine):
    """Maximal label sequences from the initial state (the machines are acyclic)."""
    def walk(q):
        out = machine.outgoing(q)
        if not out:
            return [()]
        return [(a.label,) + rest for a, dst in out for rest in walk(dst)]
    return walk(machine.initial)


class TestGenerate:
    def test_smallest(self):
        s = generate(BenchSpec(1, 1, 1))
        assert s.participants == ("p1", "p2")
        for m in s.automata.values():
            assert len(m.states) == 3 and len(m.transitions) == 2

    def test_two_messages(self):
        s = generate(BenchSpec(2, 1, 1))
        assert all(len(m.states) == 5 for m in s.automata.values())
        r = check_kmc(s, 3)
        assert (r.status, r.bound) == ("compatible", 2)

    def test_label_paths(self):
        m = generate(BenchSpec(1, 1, 2)).automata["p1"]
        assert len(label_paths(m)) == 2 ** 2

    def test_pairs_isolated(self):
        s = generate(BenchSpec(1, 3, 1))
        for m in s.automata.values():
            partners = {a.partner for _, a, _ in m.transitions}
            assert len(partners) == 1

    @pytest.mark.parametrize("k,m,n", [(1, 1, 1), (2, 2, 2), (3, 1, 2)])
    def test_valid_and_directed(self, k, m, n):
        s = generate(BenchSpec(k, m, n))
        assert validate_csa(s) == []
        assert directedness(s) == (True, True)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            BenchSpec(0, 1, 1)


class TestSuite:
    def test_rows(self):
        rows = run_suite([BenchSpec(k, 1, 1) for k in (2, 3, 4)], max_bound=5)
        assert [r.k_found for r in rows] == [2, 3, 4]
        assert all(r.status == "compatible" for r in rows)

    def test_edges_linear_in_pairs(self):
        rows = run_suite([BenchSpec(3, m, 1) for m in (1, 2, 3)])
        assert [r.edges for r in rows] == [rows[0].edges * m for m in (1, 2, 3)]

    def test_edges_grow_with_labels(self):
        one, three = run_suite([BenchSpec(2, 1, 1), BenchSpec(2, 1, 3)])
        assert three.edges > 3 * one.edges

    def test_resource_limit_row(self):
        (row,) = run_suite([BenchSpec(3, 2, 1)], node_cap=5)
        assert row.status == "resource-limit" and row.k_found is None

    def test_edges_match_rts(self):
        (row,) = run_suite([BenchSpec(2, 2, 1)])
        assert row.edges == len(build_rts(generate(BenchSpec(2, 2, 1)), 2).edges)

    def test_csv(self):
        rows = run_suite([BenchSpec(2, 1, 1)])
        table = list(csv.DictReader(io.StringIO(to_csv(rows))))
        assert tuple(table[0]) == CSV_COLUMNS
        assert table[0]["k_found"] == "2"
