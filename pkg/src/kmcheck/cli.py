"""Text formats, reports and the ``kmcheck`` command line.

System files are line based::

    machine <name>
    init <state>
    <src> <dst> <sender> <receiver> <!|?> <label>
    end

Trace files hold one ``<sender> <receiver> <!|?> <label>`` per line.
``#`` starts a comment in both formats.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from . import bench as bench_mod
from .bisim import check_bound_agnostic
from .checks import (CIBI, COMPATIBLE, IBI, SIBI, STABLE, UNSAFE, KmcResult, PropertyVerdict, Witness, check_kmc,
                     check_smc)
from .core import RECEIVE, SEND, TOKEN, Action, Automaton, Configuration, System, validate_csa
from .explore import DEFAULT_NODE_CAP, ResourceLimit, to_dot
from .traces import analyse, causal_equiv, projected_equiv

FORMAT_VERSION = 1
EXTRA_PROPERTIES = (IBI, SIBI, CIBI, STABLE)


class ParseError(ValueError):
    def __init__(self, line: int | None, message: str):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line
        self.message = message


class ValidationError(ParseError):
    """The file parsed but some automaton breaks the session automaton rules."""

    def __init__(self, violations, lines=None):
        lines = lines or {}
        first = min((lines.get((v.machine, v.transition), 0) for v in violations), default=None)
        super().__init__(first or None, "; ".join(str(v) for v in violations))
        self.violations = violations


# ---------------------------------------------------------------- parsing

def _token(tok: str, what: str, line: int) -> str:
    if not TOKEN.match(tok):
        raise ParseError(line, f"bad {what} {tok!r}")
    return tok


def _action(parts, line: int) -> Action:
    sender, receiver, direction, label = parts
    if direction not in (SEND, RECEIVE):
        raise ParseError(line, f"direction must be ! or ?, got {direction!r}")
    return Action(_token(sender, "participant", line), _token(receiver, "participant", line), direction,
                  _token(label, "label", line))


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].split()
        if body:
            yield no, body


def parse_system(text: str, name: str = "system", validate: bool = True) -> System:
    machines = []
    current = None
    where = {}
    for no, words in _lines(text):
        head = words[0]
        if head == "machine":
            if current is not None:
                raise ParseError(no, "machine block opened before the previous one ended")
            if len(words) != 2:
                raise ParseError(no, "expected: machine <name>")
            current = {"name": _token(words[1], "participant", no), "init": None, "trans": [], "line": no}
        elif current is None:
            raise ParseError(no, f"unexpected {head!r} outside a machine block")
        elif head == "init":
            if len(words) != 2:
                raise ParseError(no, "expected: init <state>")
            if current["init"] is not None:
                raise ParseError(no, "initial state given twice")
            current["init"] = _token(words[1], "state", no)
        elif head == "end":
            if len(words) != 1:
                raise ParseError(no, "unexpected tokens after end")
            if current["init"] is None:
                raise ParseError(no, f"machine {current['name']} has no init line")
            machines.append(Automaton(current["name"], current["init"], tuple(current["trans"])))
            current = None
        else:
            if len(words) != 6:
                raise ParseError(no, "expected: <src> <dst> <sender> <receiver> <!|?> <label>")
            src, dst = _token(words[0], "state", no), _token(words[1], "state", no)
            act = _action(words[2:], no)
            current["trans"].append((src, act, dst))
            where[(current["name"], (src, act, dst))] = no
    if current is not None:
        raise ParseError(current["line"], f"machine {current['name']} is missing its end line")
    try:
        system = System(machines, name=name)
    except ValueError as err:
        raise ParseError(None, str(err)) from None
    if validate:
        violations = validate_csa(system)
        if violations:
            raise ValidationError(violations, where)
    return system


def parse_trace(text: str) -> list[Action]:
    trace = []
    for no, words in _lines(text):
        if len(words) != 4:
            raise ParseError(no, "expected: <sender> <receiver> <!|?> <label>")
        trace.append(_action(words, no))
    return trace


def format_system(system: System) -> str:
    out = []
    for p in system.participants:
        m = system.automata[p]
        out.append(f"machine {p}")
        out.append(f"init {m.initial}")
        for src, a, dst in m.transitions:
            out.append(f"{src} {dst} {a.sender} {a.receiver} {a.direction} {a.label}")
        out.append("end")
        out.append("")
    return "\n".join(out)


def format_trace(trace) -> str:
    return "".join(f"{a.sender} {a.receiver} {a.direction} {a.label}\n" for a in trace)


def parse_action(text: str) -> Action:
    """Inverse of ``str(action)``: ``pq!a`` or ``sender-receiver!label``."""
    for d in (SEND, RECEIVE):
        if d in text:
            left, label = text.split(d, 1)
            break
    else:
        raise ValueError(f"not an action: {text!r}")
    if "-" in left:
        sender, receiver = left.split("-", 1)
    elif len(left) == 2:
        sender, receiver = left[0], left[1]
    else:
        raise ValueError(f"not an action: {text!r}")
    return Action(sender, receiver, d, label)


# ---------------------------------------------------------------- corpus

def corpus_names() -> list[str]:
    root = resources.files("kmcheck") / "corpus"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".csa"))


def corpus_text(name: str, suffix: str = ".csa") -> str:
    return (resources.files("kmcheck") / "corpus" / f"{name}{suffix}").read_text()


def load_corpus(name: str) -> System:
    return parse_system(corpus_text(name), name=name)


def corpus_expected(name: str) -> dict:
    return json.loads(corpus_text(name, ".json"))


def _read(path: str) -> tuple[str, str]:
    """Return (text, name); ``@name`` refers to a bundled corpus file."""
    if path.startswith("@"):
        stem, dot, suffix = path[1:].rpartition(".")
        if dot and suffix in ("csa", "trace"):
            return corpus_text(stem, "." + suffix), stem
        return corpus_text(path[1:]), path[1:]
    p = Path(path)
    return p.read_text(), p.stem


# ---------------------------------------------------------------- reports

def _config_to_json(config: Configuration) -> dict:
    return {"control": list(config.control), "queues": [list(w) for w in config.queues]}


def _config_from_json(data: dict) -> Configuration:
    return Configuration(tuple(data["control"]), tuple(tuple(w) for w in data["queues"]))


def verdict_to_json(v: PropertyVerdict) -> dict:
    bound = v.bound if v.bound != float("inf") else "inf"
    witness = None
    if v.witness is not None:
        witness = {"actions": [str(a) for a in v.witness.actions], "config": _config_to_json(v.witness.config)}
    return {"property": v.property, "holds": v.holds, "bound": bound, "witness": witness, "detail": v.detail,
            "nodes": v.nodes, "edges": v.edges, "note": v.note}


def verdict_from_json(d: dict) -> PropertyVerdict:
    witness = None
    if d["witness"] is not None:
        witness = Witness(tuple(parse_action(a) for a in d["witness"]["actions"]),
                          _config_from_json(d["witness"]["config"]))
    bound = float("inf") if d["bound"] == "inf" else d["bound"]
    return PropertyVerdict(d["property"], d["holds"], bound, witness, d["detail"], d["nodes"], d["edges"], d["note"])


@dataclass(frozen=True)
class ReportDocument:
    system: str
    participants: tuple[str, ...]
    channels: tuple[str, ...]
    csa_valid: bool
    violations: tuple[str, ...]
    send_directed: bool
    receive_directed: bool
    status: str
    bound: int
    max_bound: int
    graph_kind: str
    rounds: tuple[tuple[PropertyVerdict, ...], ...] = ()
    agnostic: PropertyVerdict | None = None
    smc: PropertyVerdict | None = None
    notes: tuple[str, ...] = ()
    seconds: float = field(default=0.0, compare=False)

    def to_json(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "system": self.system,
            "participants": list(self.participants),
            "channels": list(self.channels),
            "csa": {"valid": self.csa_valid, "violations": list(self.violations)},
            "directedness": {"send": self.send_directed, "receive": self.receive_directed},
            "kmc": {"status": self.status, "bound": self.bound, "max": self.max_bound, "graph": self.graph_kind},
            "rounds": [[verdict_to_json(v) for v in row] for row in self.rounds],
            "agnostic": verdict_to_json(self.agnostic) if self.agnostic else None,
            "smc": verdict_to_json(self.smc) if self.smc else None,
            "notes": list(self.notes),
        }

    def render_json(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, data) -> "ReportDocument":
        if isinstance(data, str):
            data = json.loads(data)
        if data.get("format") != FORMAT_VERSION:
            raise ValueError(f"unsupported report format {data.get('format')!r}")
        opt = lambda d: verdict_from_json(d) if d else None  # noqa: E731
        return cls(data["system"], tuple(data["participants"]), tuple(data["channels"]), data["csa"]["valid"],
                   tuple(data["csa"]["violations"]), data["directedness"]["send"],
                   data["directedness"]["receive"], data["kmc"]["status"], data["kmc"]["bound"],
                   data["kmc"]["max"], data["kmc"]["graph"],
                   tuple(tuple(verdict_from_json(v) for v in row) for row in data["rounds"]),
                   opt(data["agnostic"]), opt(data["smc"]), tuple(data["notes"]))

    def render_text(self) -> str:
        out = [f"system {self.system}: participants {' '.join(self.participants)}",
               f"  directed: send {_yn(self.send_directed)}, receive {_yn(self.receive_directed)}"]
        for row in self.rounds:
            k = row[0].bound
            size = next((v for v in row if v.nodes), None)
            stats = f" ({size.nodes} configurations, {size.edges} transitions)" if size else ""
            out.append(f"  bound {k}{stats}")
            for v in row:
                line = f"    {v.property:<17} {_yn(v.holds)}"
                if v.note:
                    line += f"  [{v.note}]"
                if v.detail:
                    line += f"  {v.detail}"
                out.append(line)
                if v.witness is not None and not v.holds:
                    trace = " ".join(str(a) for a in v.witness.actions) or "(initial configuration)"
                    out.append(f"      witness: {trace}")
        for extra in (self.agnostic, self.smc):
            if extra is not None:
                out.append(f"  {extra.property} (bound {extra.bound}): {_yn(extra.holds)}"
                           + (f"  {extra.detail}" if extra.detail else ""))
        verdict = {COMPATIBLE: f"{self.bound}-MC (compatible at bound {self.bound})",
                   UNSAFE: f"premises hold at bound {self.bound} but the system is not {self.bound}-safe"}.get(
            self.status, f"failed: no bound up to {self.max_bound} satisfies the premises")
        out.append(f"result: {verdict}")
        out.extend(f"note: {n}" for n in self.notes)
        return "\n".join(out) + "\n"


def _yn(b: bool) -> str:
    return "yes" if b else "no"


def build_report(system: System, result: KmcResult, max_bound: int, full_ts: bool,
                 agnostic: PropertyVerdict | None = None, smc: PropertyVerdict | None = None) -> ReportDocument:
    from .core import directedness
    sd, rd = directedness(system)
    notes = []
    if result.compatible:
        notes.append(f"safe for every bound: the premises and {result.bound}-MC together imply unbounded safety")
    if any(v.property == STABLE for row in result.rounds for v in row):
        notes.append("the stable property is only decided within the explored bounded graph")
    return ReportDocument(
        system.name, system.participants, tuple(f"{a}{b}" if len(a) == len(b) == 1 else f"{a}-{b}"
                                                for a, b in system.channels),
        True, (), sd, rd, result.status, result.bound, max_bound, "full" if full_ts else "reduced",
        result.rounds, agnostic, smc, tuple(notes))


# ---------------------------------------------------------------- commands

def _parse_range(text: str) -> range:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return range(int(lo), int(hi) + 1)
    return range(int(text), int(text) + 1)


def cmd_check(args) -> int:
    try:
        text, name = _read(args.file)
        system = parse_system(text, name=name)
    except (ParseError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    extra = tuple(p.strip() for p in (args.property or "").split(",") if p.strip())
    for p in extra:
        if p not in EXTRA_PROPERTIES:
            print(f"error: unknown property {p!r}; choose from {', '.join(EXTRA_PROPERTIES)}", file=sys.stderr)
            return 2
    try:
        result = check_kmc(system, args.max, full_ts=args.full_ts, extra=extra, node_cap=args.node_cap)
        agnostic = check_bound_agnostic(system, result.bound, args.node_cap) if args.agnostic else None
        smc = check_smc(system) if args.smc else None
    except ResourceLimit as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    report = build_report(system, result, args.max, args.full_ts, agnostic, smc)
    if args.dot:
        Path(args.dot).write_text(to_dot(result.last_graph, system.name))
    sys.stdout.write(report.render_json() if args.json else report.render_text())
    return 0 if result.compatible else 1


def _trace_json(report) -> dict:
    d = dict(report.__dict__)
    if d["decomposition"] is not None:
        d["decomposition"] = [[str(a) for a in phase] for phase in d["decomposition"]]
    return d


def cmd_trace(args) -> int:
    try:
        text, name = _read(args.system)
        system = parse_system(text, name=name)
        trace = parse_trace(_read(args.trace)[0])
        other = parse_trace(_read(args.equiv)[0]) if args.equiv else None
    except (ParseError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    k = float("inf") if args.k is None else args.k
    report = analyse(trace, system, k)
    doc = {"format": FORMAT_VERSION, "trace": _trace_json(report)}
    if other is not None:
        doc["equivalence"] = {"causal": causal_equiv(trace, other), "projected": projected_equiv(trace, other)}
    if args.json:
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        r = report
        bound = "unbounded" if args.k is None else f"bound {args.k}"
        if r.replay_ok:
            print(f"replay at {bound}: ok ({r.length} steps)")
        else:
            print(f"replay at {bound}: fails at step {r.replay_index} ({r.replay_reason})")
        print(f"valid: {_yn(r.valid)}")
        fmt = lambda v: "none up to cap" if v is None else str(v)  # noqa: E731
        if r.valid:
            print(f"least bound for replay: {fmt(r.min_bounded_k)}")
            print(f"least match bound: {fmt(r.min_match_bounded_k)}")
            print(f"least exchange bound: {fmt(r.exchange_k)}")
            if r.decomposition:
                print("phases: " + " | ".join(" ".join(map(str, ph)) for ph in r.decomposition))
        if other is not None:
            print(f"causally equivalent: {_yn(doc['equivalence']['causal'])}")
            print(f"projection equivalent: {_yn(doc['equivalence']['projected'])}")
    return 0 if report.valid and report.replay_ok else 1


def cmd_bench(args) -> int:
    try:
        ks, ms, ns = _parse_range(args.k), _parse_range(args.m), _parse_range(args.n)
    except ValueError as err:
        print(f"error: bad range: {err}", file=sys.stderr)
        return 2
    if not ks or not ms or not ns or min(ks[0], ms[0], ns[0]) < 1:
        print("error: ranges must be non-empty and start at 1 or more", file=sys.stderr)
        return 2
    specs = [bench_mod.BenchSpec(k, m, n) for k in ks for m in ms for n in ns]
    rows = bench_mod.run_suite(specs, args.max, args.node_cap)
    text = bench_mod.to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if all(r.status == "resource-limit" for r in rows):
        return 3
    return 0


def cmd_corpus(args) -> int:
    for name in corpus_names():
        first = corpus_text(name).splitlines()[0].lstrip("# ").strip()
        print(f"{name:<28} {first}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kmcheck", description="Bounded compatibility checker for "
                                     "communicating session automata.")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="search for the least bound at which the system is k-MC")
    c.add_argument("file", help="system file, or @name for a bundled example")
    c.add_argument("--max", type=int, default=10, help="largest bound to try (default 10)")
    c.add_argument("--full-ts", action="store_true", help="use the full transition system instead of the reduced one")
    c.add_argument("--property", help=f"extra properties to report each round: {','.join(EXTRA_PROPERTIES)}")
    c.add_argument("--smc", action="store_true", help="also check synchronous compatibility")
    c.add_argument("--agnostic", action="store_true", help="also check local bound-agnosticity at the final bound")
    c.add_argument("--dot", metavar="PATH", help="write the final transition system as DOT")
    c.add_argument("--json", action="store_true", help="print a JSON report")
    c.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP, help="abort above this many configurations")
    c.set_defaults(func=cmd_check)

    t = sub.add_parser("trace", help="analyse a recorded execution")
    t.add_argument("system")
    t.add_argument("trace")
    t.add_argument("--k", type=int, help="bound used for replay (default unbounded)")
    t.add_argument("--equiv", metavar="OTHER", help="second trace to compare against")
    t.add_argument("--json", action="store_true")
    t.set_defaults(func=cmd_trace)

    b = sub.add_parser("bench", help="run the generated benchmark family and print CSV")
    b.add_argument("--k", default="2", help="messages per phase, N or A..B")
    b.add_argument("--m", default="1", help="number of pairs, N or A..B")
    b.add_argument("--n", default="1", help="labels per step, N or A..B")
    b.add_argument("--max", type=int, default=10)
    b.add_argument("--out", metavar="CSV")
    b.add_argument("--node-cap", type=int, default=DEFAULT_NODE_CAP)
    b.set_defaults(func=cmd_bench)

    ls = sub.add_parser("corpus", help="list bundled example systems")
    ls.set_defaults(func=cmd_corpus)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if getattr(args, "max", 1) < 1:
        parser.error("--max must be at least 1")
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
