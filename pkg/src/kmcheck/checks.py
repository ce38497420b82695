"""Bounded property checks and the iterative k-MC driver.

Every ``check_*`` function takes a system and an explicit transition
system (reduced or full) and returns a :class:`PropertyVerdict`.  When a
property fails, the verdict carries a shortest path from the initial
configuration to a configuration exhibiting the violation.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from .core import Action, Configuration, System, directedness
from .explore import DEFAULT_NODE_CAP, SYNCHRONOUS, ResourceLimit, TransitionSystem, build_full_ts, build_rts

SEND_DIRECTED = "send-directed"
RECEIVE_DIRECTED = "receive-directed"
OBI = "obi"
IBI = "ibi"
SIBI = "sibi"
CIBI = "cibi"
EXHAUSTIVE = "exhaustive"
SAFETY_ER = "er"
SAFETY_PG = "pg"
STABLE = "stable"
KMC = "kmc"
SMC = "smc"

PROPERTIES = (SEND_DIRECTED, RECEIVE_DIRECTED, OBI, IBI, SIBI, CIBI, EXHAUSTIVE, SAFETY_ER, SAFETY_PG, STABLE,
              KMC, SMC)

COMPATIBLE = "compatible"
UNSAFE = "unsafe"
FAILED = "failed"


@dataclass(frozen=True)
class Witness:
    """An execution from the initial configuration and the configuration it reaches."""

    actions: tuple[Action, ...]
    config: Configuration


@dataclass(frozen=True)
class PropertyVerdict:
    property: str
    holds: bool
    bound: float
    witness: Witness | None = None
    detail: str = ""
    nodes: int = 0
    edges: int = 0
    note: str = ""
    seconds: float = field(default=0.0, compare=False)

    def __bool__(self) -> bool:
        return self.holds


@dataclass(frozen=True)
class KmcResult:
    """Outcome of the bounded k-MC search.

    ``status`` is ``compatible`` (all premises and k-safety hold at ``bound``),
    ``unsafe`` (the premises held at ``bound`` but k-safety did not) or
    ``failed`` (no bound up to ``bound`` satisfied the premises).
    """

    status: str
    bound: int
    rounds: tuple[tuple[PropertyVerdict, ...], ...] = ()
    graphs: tuple[TransitionSystem, ...] = field(default=(), repr=False, compare=False)

    @property
    def compatible(self) -> bool:
        return self.status == COMPATIBLE

    def verdicts_at(self, k: int) -> dict[str, PropertyVerdict]:
        for row in self.rounds:
            if row and row[0].bound == k:
                return {v.property: v for v in row}
        raise KeyError(k)

    @property
    def last_graph(self) -> TransitionSystem | None:
        return self.graphs[-1] if self.graphs else None


# ---------------------------------------------------------------- helpers

def _bfs_tree(ts: TransitionSystem) -> dict:
    parent = {ts.initial: None}
    todo = deque([ts.initial])
    while todo:
        s = todo.popleft()
        for act, t in ts.successors(s):
            if t not in parent:
                parent[t] = (s, act)
                todo.append(t)
    return parent


def _path_to(parent: dict, node: Configuration) -> tuple[Action, ...]:
    path = []
    while parent[node] is not None:
        node, act = parent[node]
        path.append(act)
    return tuple(reversed(path))


class _Failure:
    """Collects violating nodes and keeps the one closest to the initial configuration."""

    def __init__(self, ts: TransitionSystem):
        self.ts = ts
        self.best = None
        self._parent = None
        self._depth = None

    def add(self, node: Configuration, detail: str):
        if self._parent is None:
            self._parent = _bfs_tree(self.ts)
            self._depth = {}
        depth = self._depth.get(node)
        if depth is None:
            depth = len(_path_to(self._parent, node))
            self._depth[node] = depth
        if self.best is None or depth < self.best[0]:
            self.best = (depth, node, detail)

    def verdict(self, prop: str, started: float, note: str = "") -> PropertyVerdict:
        ts = self.ts
        common = dict(bound=ts.bound, nodes=len(ts.nodes), edges=len(ts.edges), note=note,
                      seconds=time.perf_counter() - started)
        if self.best is None:
            return PropertyVerdict(prop, True, **common)
        _, node, detail = self.best
        return PropertyVerdict(prop, False, witness=Witness(_path_to(self._parent, node), node), detail=detail,
                               **common)


def _backward(ts: TransitionSystem, sources, allowed=None) -> set:
    """Nodes that reach some node in ``sources`` using edges whose action satisfies ``allowed``."""
    seen = set(sources)
    todo = deque(seen)
    while todo:
        t = todo.popleft()
        for act, s in ts.predecessors(t):
            if s not in seen and (allowed is None or allowed(act)):
                seen.add(s)
                todo.append(s)
    return seen


def _edge_sources(ts: TransitionSystem) -> dict[Action, set]:
    by_label: dict[Action, set] = {}
    for s, act, _ in ts.edges:
        by_label.setdefault(act, set()).add(s)
    return by_label


# ---------------------------------------------------------------- directedness

def check_directed(system: System, bound: float = 1) -> tuple[PropertyVerdict, PropertyVerdict]:
    sd, rd = directedness(system)
    return PropertyVerdict(SEND_DIRECTED, sd, bound), PropertyVerdict(RECEIVE_DIRECTED, rd, bound)


# ---------------------------------------------------------------- bound independence

def check_obi(system: System, ts: TransitionSystem) -> PropertyVerdict:
    """Output bound independence: a participant able to send can take any of its sends.

    On a reduced graph this is the reduced variant; on the full graph it is
    the original definition.
    """
    started = time.perf_counter()
    fail = _Failure(ts)
    k = ts.bound
    for node in ts.nodes:
        en = {a for a, _ in system.moves(node, k)}
        for p in {a.subject for a in en if a.is_send}:
            q = system.state_of(node, p)
            for act, _ in system.automata[p].outgoing(q):
                if act.is_send and act not in en:
                    fail.add(node, f"{p} can send but {act} is blocked")
    return fail.verdict(OBI, started)


def check_reduced_obi(system: System, rts: TransitionSystem) -> PropertyVerdict:
    return check_obi(system, rts)


def check_ibi(system: System, ts: TransitionSystem) -> PropertyVerdict:
    """Input bound independence: a participant able to receive has exactly one enabled action."""
    started = time.perf_counter()
    fail = _Failure(ts)
    k = ts.bound
    for node in ts.nodes:
        by_subject: dict[str, list[Action]] = {}
        for a, _ in system.moves(node, k):
            by_subject.setdefault(a.subject, []).append(a)
        for p, acts in by_subject.items():
            if len(acts) > 1 and any(not a.is_send for a in acts):
                names = ", ".join(sorted(map(str, acts)))
                fail.add(node, f"{p} has several enabled actions including a receive: {names}")
    return fail.verdict(IBI, started)


def _rivals(system: System, node: Configuration, act: Action):
    """Receives of the same participant, from the same local state, with a different sender."""
    p = act.subject
    q = system.state_of(node, p)
    for other, _ in system.automata[p].outgoing(q):
        if not other.is_send and other.sender != act.sender:
            yield other


def check_sibi(system: System, ts: TransitionSystem) -> PropertyVerdict:
    """Strong input bound independence.

    For each receive edge ``qp?a`` out of ``s`` and each rival receive
    ``sp?b`` of ``p``: the rival is not enabled at ``s`` and no path from the
    post-state fires ``sp!b``.
    """
    started = time.perf_counter()
    fail = _Failure(ts)
    k = ts.bound
    sources = _edge_sources(ts)
    reach_cache: dict[Action, set] = {}
    for s, act, s2 in ts.edges:
        if act.is_send:
            continue
        rivals = list(_rivals(system, s, act))
        if not rivals:
            continue
        en = {a for a, _ in system.moves(s, k)}
        for rival in rivals:
            if rival in en:
                fail.add(s, f"{act} and {rival} are both enabled")
                continue
            trigger = Action(rival.sender, rival.receiver, "!", rival.label)
            if trigger not in reach_cache:
                reach_cache[trigger] = _backward(ts, sources.get(trigger, ()))
            if s2 in reach_cache[trigger]:
                fail.add(s, f"after {act}, {trigger} can still be sent")
    return fail.verdict(SIBI, started)


def depends(system: System, config: Configuration, l1: Action, l2: Action) -> bool:
    """One-step dependency: same subject, or same channel while that channel is empty at ``config``."""
    if l1.subject == l2.subject:
        return True
    return l1.channel == l2.channel and not system.queue(config, l1.channel)


def depends_in(system: System, config: Configuration, l1: Action, phi, l2: Action) -> bool:
    """Chained dependency of ``l2`` on ``l1`` through a subsequence of ``phi``.

    Follows the recursive definition directly; exponential in ``len(phi)``
    in the worst case, so it is meant for short executions and testing.
    """
    phi = tuple(phi)
    if not phi:
        return depends(system, config, l1, l2)
    head, rest = phi[0], phi[1:]
    if depends(system, config, l1, head) and depends_in(system, config, head, rest, l2):
        return True
    return depends_in(system, config, l1, rest, l2)


def _frontier_start(system: System, config: Configuration, root: Action):
    """Dependency at a fixed configuration only looks at subjects and at channels
    empty there, so the actions chained to ``root`` are summarised by those two sets."""
    return _frontier_add(system, config, (frozenset(), frozenset()), root)


def _frontier_add(system: System, config: Configuration, frontier, act: Action):
    subjects, chans = frontier
    if act.subject not in subjects:
        subjects = subjects | {act.subject}
    if act.channel not in chans and not system.queue(config, act.channel):
        chans = chans | {act.channel}
    return (subjects, chans)


def _frontier_joins(frontier, act: Action) -> bool:
    subjects, chans = frontier
    return act.subject in subjects or act.channel in chans


def _cibi_counterexample(system: System, ts: TransitionSystem, s: Configuration, root: Action,
                         post: Configuration, trigger: Action) -> bool:
    """Search paths from ``post`` for a firing of ``trigger`` not chained to ``root``.

    Explores the product of graph nodes with dependency frontiers, so it
    covers every path (cyclic ones included) in finitely many steps.
    """
    start = (post, _frontier_start(system, s, root))
    seen = {start}
    todo = deque([start])
    while todo:
        node, front = todo.popleft()
        for act, nxt in ts.successors(node):
            joined = _frontier_joins(front, act)
            if act == trigger and not joined:
                return True
            item = (nxt, _frontier_add(system, s, front, act) if joined else front)
            if item not in seen:
                seen.add(item)
                todo.append(item)
    return False


def check_cibi(system: System, ts: TransitionSystem) -> PropertyVerdict:
    """Chained input bound independence (reduced variant on a reduced graph)."""
    started = time.perf_counter()
    fail = _Failure(ts)
    k = ts.bound
    sources = _edge_sources(ts)
    reach_cache: dict[Action, set] = {}
    for s, act, s2 in ts.edges:
        if act.is_send:
            continue
        rivals = list(_rivals(system, s, act))
        if not rivals:
            continue
        en = {a for a, _ in system.moves(s, k)}
        for rival in rivals:
            if rival in en:
                fail.add(s, f"{act} and {rival} are both enabled")
                continue
            trigger = Action(rival.sender, rival.receiver, "!", rival.label)
            if trigger not in reach_cache:
                reach_cache[trigger] = _backward(ts, sources.get(trigger, ()))
            if s2 not in reach_cache[trigger]:
                continue
            if _cibi_counterexample(system, ts, s, act, s2, trigger):
                fail.add(s, f"after {act}, {trigger} can be sent without depending on it")
    return fail.verdict(CIBI, started)


# ---------------------------------------------------------------- exhaustivity, safety, stability

def check_exhaustive(system: System, ts: TransitionSystem) -> PropertyVerdict:
    """Every send available in a sending local state can be reached without the sender moving first."""
    started = time.perf_counter()
    fail = _Failure(ts)
    sources = _edge_sources(ts)
    cache: dict[Action, set] = {}
    for node in ts.nodes:
        for p in system.participants:
            q = system.state_of(node, p)
            m = system.automata[p]
            if not m.is_sending(q):
                continue
            for act, _ in m.outgoing(q):
                if act not in cache:
                    cache[act] = _backward(ts, sources.get(act, ()), lambda a, p=p: a.subject != p)
                if node not in cache[act]:
                    fail.add(node, f"{act} can never be fired by {p}")
    return fail.verdict(EXHAUSTIVE, started)


def check_safety(system: System, ts: TransitionSystem) -> tuple[PropertyVerdict, PropertyVerdict]:
    """Eventual reception and progress, decided within the given graph."""
    started = time.perf_counter()
    sources = _edge_sources(ts)
    er = _Failure(ts)
    cache: dict[Action, set] = {}
    for node in ts.nodes:
        for ch, w in zip(system.channels, node.queues):
            if not w:
                continue
            act = Action(ch[0], ch[1], "?", w[0])
            if act not in cache:
                cache[act] = _backward(ts, sources.get(act, ()))
            if node not in cache[act]:
                er.add(node, f"message {w[0]} on {ch[0]}{ch[1]} is never received")
    er_verdict = er.verdict(SAFETY_ER, started)

    started = time.perf_counter()
    pg = _Failure(ts)
    by_receiver: dict[str, set] = {}
    for act, srcs in sources.items():
        if not act.is_send:
            by_receiver.setdefault(act.subject, set()).update(srcs)
    reach = {p: _backward(ts, by_receiver.get(p, ())) for p in system.participants}
    for node in ts.nodes:
        for p in system.participants:
            if system.automata[p].is_receiving(system.state_of(node, p)) and node not in reach[p]:
                pg.add(node, f"{p} waits forever in state {system.state_of(node, p)}")
    return er_verdict, pg.verdict(SAFETY_PG, started)


def check_stable_bounded(system: System, ts: TransitionSystem) -> PropertyVerdict:
    """From every node some path reaches a configuration with all queues empty (within the graph)."""
    started = time.perf_counter()
    fail = _Failure(ts)
    ok = _backward(ts, [n for n in ts.nodes if n.is_stable()])
    for node in ts.nodes:
        if node not in ok:
            fail.add(node, "no stable configuration is reachable")
    return fail.verdict(STABLE, started, note=f"bounded({ts.bound})")


# ---------------------------------------------------------------- k-MC

def _round(system: System, ts: TransitionSystem, send_dir: bool, recv_dir: bool, extra=()) -> tuple[bool, list]:
    k = ts.bound
    verdicts = list(check_directed(system, k))
    obi = check_obi(system, ts)
    verdicts.append(obi)
    ibi_ok = recv_dir
    if not recv_dir or SIBI in extra or CIBI in extra:
        sibi = check_sibi(system, ts)
        verdicts.append(sibi)
        ibi_ok = ibi_ok or sibi.holds
        if not sibi.holds or CIBI in extra:
            cibi = check_cibi(system, ts)
            verdicts.append(cibi)
            ibi_ok = ibi_ok or cibi.holds
    if IBI in extra:
        verdicts.append(check_ibi(system, ts))
    exh = check_exhaustive(system, ts)
    verdicts.append(exh)
    phi = (send_dir or obi.holds) and ibi_ok and exh.holds
    verdicts.extend(check_safety(system, ts))
    if STABLE in extra:
        verdicts.append(check_stable_bounded(system, ts))
    return phi, verdicts


def check_kmc(system: System, max_bound: int = 10, full_ts: bool = False, extra=(),
              node_cap: int = DEFAULT_NODE_CAP) -> KmcResult:
    """Search k = 1..max_bound for a bound at which the premises hold, then report k-safety there.

    ``full_ts`` replaces the reduced graph with the full one (useful as an
    oracle).  ``extra`` names additional properties to evaluate each round.
    """
    if max_bound < 1:
        raise ValueError("max_bound must be >= 1")
    send_dir, recv_dir = directedness(system)
    build = build_full_ts if full_ts else build_rts
    rounds, graphs = [], []
    for k in range(1, max_bound + 1):
        ts = build(system, k, node_cap)
        phi, verdicts = _round(system, ts, send_dir, recv_dir, extra)
        if phi:
            safe = all(v.holds for v in verdicts if v.property in (SAFETY_ER, SAFETY_PG))
            status = COMPATIBLE if safe else UNSAFE
            verdicts.append(PropertyVerdict(KMC, safe, k, nodes=len(ts.nodes), edges=len(ts.edges)))
            rounds.append(tuple(verdicts))
            graphs.append(ts)
            return KmcResult(status, k, tuple(rounds), tuple(graphs))
        verdicts.append(PropertyVerdict(KMC, False, k, nodes=len(ts.nodes), edges=len(ts.edges),
                                        detail="premises do not hold at this bound"))
        rounds.append(tuple(verdicts))
        graphs.append(ts)
    return KmcResult(FAILED, max_bound, tuple(rounds), tuple(graphs))


def is_kmc(system: System, ts: TransitionSystem) -> bool:
    """k-safety together with k-exhaustivity on one graph (no premise checks)."""
    er, pg = check_safety(system, ts)
    return er.holds and pg.holds and check_exhaustive(system, ts).holds


# ---------------------------------------------------------------- synchronous compatibility

def _sync_steps(system: System, config: Configuration):
    """Exchanges (send, receive) that can fire back to back from a stable configuration at bound 1."""
    for send_act, mid in system.moves(config, 1):
        if not send_act.is_send:
            continue
        recv = Action(send_act.sender, send_act.receiver, "?", send_act.label)
        for act, nxt in system.moves(mid, 1):
            if act == recv:
                yield send_act, mid, recv, nxt


def build_ts0(system: System, node_cap: int = DEFAULT_NODE_CAP) -> TransitionSystem:
    """Synchronous transition system: each send is immediately followed by its reception.

    Stable nodes are reached by completed exchanges; the one-message
    configurations in between are kept as half-step nodes, so every edge is
    a single action and exchanges compose into paths.
    """
    s0 = system.initial()
    order = {s0: None}
    edges = {}
    todo = deque([s0])
    while todo:
        s = todo.popleft()
        for send_act, mid, recv, nxt in _sync_steps(system, s):
            edges[(s, send_act, mid)] = None
            edges[(mid, recv, nxt)] = None
            order.setdefault(mid, None)
            if nxt not in order:
                order[nxt] = None
                todo.append(nxt)
            if len(order) > node_cap:
                raise ResourceLimit(node_cap, SYNCHRONOUS, 0)
    return TransitionSystem(system, s0, tuple(order), tuple(edges), SYNCHRONOUS, 0)


def check_smc(system: System, ts0: TransitionSystem | None = None) -> PropertyVerdict:
    """Synchronous multiparty compatibility over the synchronous transition system.

    At every stable node: a participant in a sending state can perform each
    of its sends, and one in a receiving state can perform one of its
    receives, after exchanges in which it takes no part.
    """
    started = time.perf_counter()
    ts0 = ts0 or build_ts0(system)
    fail = _Failure(ts0)
    stable = [n for n in ts0.nodes if n.is_stable()]
    for p in system.participants:
        m = system.automata[p]
        # exchanges not involving p never change p's state
        others = {}
        for s in stable:
            others[s] = [nxt for a, _, _, nxt in _sync_steps(system, s) if p not in a.channel]
        for s in stable:
            q = system.state_of(s, p)
            if m.is_final(q):
                continue
            seen = {s}
            todo = deque([s])
            fired = set()
            while todo:
                t = todo.popleft()
                for a, _, r, _ in _sync_steps(system, t):
                    if a.subject == p:
                        fired.add(a)
                    elif r.subject == p:
                        fired.add(r)
                for nxt in others[t]:
                    if nxt not in seen:
                        seen.add(nxt)
                        todo.append(nxt)
            if m.is_sending(q):
                for act, _ in m.outgoing(q):
                    if act not in fired:
                        fail.add(s, f"{p} cannot synchronously perform {act}")
            elif not fired:
                fail.add(s, f"{p} cannot synchronously receive in state {q}")
    return fail.verdict(SMC, started)
