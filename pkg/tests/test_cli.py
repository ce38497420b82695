"""Text formats, reports and the command-line driver."""
import json

import pydot
import pytest

from kmcheck import ParseError, ValidationError, parse_system, parse_trace, send
from kmcheck.cli import (ReportDocument, corpus_expected, corpus_names, corpus_text, format_system, format_trace,
                         main, parse_action)

TWO = """
# two machines
machine p
init 0
0 1 p q ! a
end
machine q
init 0
0 1 p q ? a
end
"""


class TestParse:
    def test_client_server_logger(self):
        s = parse_system(corpus_text("client_server_logger"))
        assert s.participants == ("c", "s", "l")

    def test_round_trip(self):
        for name in corpus_names():
            s = parse_system(corpus_text(name))
            again = parse_system(format_system(s))
            assert {p: m.transitions for p, m in again.automata.items()} == \
                {p: m.transitions for p, m in s.automata.items()}, name

    def test_syntax_error_line(self):
        with pytest.raises(ParseError) as err:
            parse_system(TWO.replace("0 1 p q ! a", "0 1 p q ! a extra"))
        assert err.value.line == 5

    def test_bad_direction(self):
        with pytest.raises(ParseError):
            parse_system(TWO.replace("p q ! a", "p q * a"))

    def test_bad_token(self):
        with pytest.raises(ParseError):
            parse_system(TWO.replace("! a", "! a-b"))

    def test_nondeterminism(self):
        text = TWO.replace("0 1 p q ! a\n", "0 1 p q ! a\n0 2 p q ! a\n")
        with pytest.raises(ValidationError) as err:
            parse_system(text)
        assert [v.rule for v in err.value.violations] == ["determinism"]

    def test_wrong_subject(self):
        with pytest.raises(ValidationError) as err:
            parse_system(TWO.replace("0 1 p q ! a", "0 1 q p ! a"))
        assert "subject" in [v.rule for v in err.value.violations]

    def test_unclosed_machine(self):
        with pytest.raises(ParseError):
            parse_system("machine p\ninit 0\n")

    def test_trace(self):
        phi = parse_trace("# x\np q ! a\np q ? a\n")
        assert format_trace(phi).split("\n")[:2] == ["p q ! a", "p q ? a"]
        assert parse_action(str(send("p", "q", "a"))) == send("p", "q", "a")


class TestCorpus:
    def test_sidecars(self):
        for name in corpus_names():
            assert isinstance(corpus_expected(name), dict), name

    def test_lists(self, capsys):
        assert main(["corpus"]) == 0
        assert "client_server_logger" in capsys.readouterr().out


class TestCheck:
    def test_csl(self, capsys):
        assert main(["check", "@client_server_logger", "--max", "5"]) == 0
        assert "1-MC" in capsys.readouterr().out

    def test_unbounded_fails(self, capsys):
        assert main(["check", "@unbounded_mp_mq", "--max", "3"]) == 1
        assert "failed" in capsys.readouterr().out

    def test_json_round_trip(self, capsys):
        assert main(["check", "@client_server_logger", "--json", "--smc", "--agnostic"]) == 0
        text = capsys.readouterr().out
        doc = ReportDocument.from_json(text)
        assert doc.render_json() == text
        assert json.loads(text)["format"] == 1

    def test_json_deterministic(self, capsys):
        main(["check", "@never_exhaustive", "--json", "--max", "2"])
        first = capsys.readouterr().out
        main(["check", "@never_exhaustive", "--json", "--max", "2"])
        assert capsys.readouterr().out == first

    def test_witness_survives_json(self, capsys):
        main(["check", "@stable_not_safe", "--json", "--max", "1"])
        doc = ReportDocument.from_json(capsys.readouterr().out)
        pg = [v for v in doc.rounds[0] if v.property == "pg"][0]
        assert not pg.holds and pg.witness is not None

    def test_dot(self, tmp_path, capsys):
        out = tmp_path / "g.dot"
        assert main(["check", "@client_server_logger", "--dot", str(out)]) == 0
        (graph,) = pydot.graph_from_dot_file(str(out))
        assert len(graph.get_edges()) == 11

    def test_properties(self, capsys):
        assert main(["check", "@four_player", "--property", "ibi,sibi,cibi,stable", "--full-ts"]) == 0
        out = capsys.readouterr().out
        assert "cibi" in out and "stable" in out

    def test_unknown_property(self, capsys):
        assert main(["check", "@ping", "--property", "bogus"]) == 2

    def test_parse_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.csa"
        bad.write_text("machine p\n0 1\n")
        assert main(["check", str(bad)]) == 2
        assert "line" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["check", str(tmp_path / "none.csa")]) == 2

    def test_resource_limit_exit(self, capsys):
        assert main(["check", "@rock_paper_scissors", "--node-cap", "3"]) == 3


class TestTrace:
    def test_example(self, capsys):
        assert main(["trace", "@not_synchronisable", "@phi1.trace", "--k", "1", "--json"]) == 0
        doc = json.loads(capsys.readouterr().out)["trace"]
        assert doc["valid"] and doc["min_match_bounded_k"] == 1 and doc["exchange_k"] is None

    def test_replay_error(self, tmp_path, capsys):
        t = tmp_path / "t.trace"
        t.write_text("P Q ? a\n")
        assert main(["trace", "@ping", str(t), "--k", "1"]) == 1
        assert "fails at step 0" in capsys.readouterr().out

    def test_equiv(self, capsys):
        main(["trace", "@not_synchronisable", "@phi1.trace", "--equiv", "@phi2.trace", "--json"])
        assert json.loads(capsys.readouterr().out)["equivalence"]["causal"] is True

    def test_parse_error(self, tmp_path, capsys):
        t = tmp_path / "t.trace"
        t.write_text("P Q ? \n")
        assert main(["trace", "@ping", str(t)]) == 2


class TestBench:
    def test_rows(self, capsys):
        assert main(["bench", "--k", "2..4", "--m", "1", "--n", "1"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 4
        rows = [dict(zip(lines[0].split(","), ln.split(","))) for ln in lines[1:]]
        assert all(int(r["k_found"]) <= int(r["k_msgs"]) for r in rows)

    def test_monotone_edges(self, capsys):
        main(["bench", "--k", "1", "--m", "1..3", "--n", "1"])
        lines = capsys.readouterr().out.strip().split("\n")[1:]
        edges = [int(ln.split(",")[6]) for ln in lines]
        assert edges == sorted(edges) and len(set(edges)) == 3

    def test_empty_range(self, capsys):
        assert main(["bench", "--k", "3..2"]) == 2

    def test_all_rows_capped(self, capsys):
        assert main(["bench", "--k", "3", "--m", "2", "--node-cap", "4"]) == 3

    def test_out_file(self, tmp_path, capsys):
        out = tmp_path / "b.csv"
        assert main(["bench", "--out", str(out)]) == 0
        assert out.read_text().startswith("k_msgs,")
